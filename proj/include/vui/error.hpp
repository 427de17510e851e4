#pragma once

#include <stdexcept>
#include <string>

namespace vui {

// Base for every error the engine surfaces. Each subclass corresponds to one
// named failure of a public operation.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptyLabel : public Error {
 public:
  EmptyLabel() : Error("state label must be non-empty") {}
};

class UnknownState : public Error {
 public:
  explicit UnknownState(const std::string& what) : Error("unknown state: " + what) {}
};

class UnknownInput : public Error {
 public:
  explicit UnknownInput(const std::string& what) : Error("unknown input event: " + what) {}
};

// A raw output is already owned by a different state than the one it is
// being merged into.
class VariantConflict : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class MissingSlot : public Error {
 public:
  explicit MissingSlot(std::string slot)
      : Error("missing template slot: " + slot), slot_(std::move(slot)) {}
  const std::string& slot() const noexcept { return slot_; }

 private:
  std::string slot_;
};

class TemplateError : public Error {
 public:
  using Error::Error;
};

class BackendUnavailable : public Error {
 public:
  using Error::Error;
};

class ContextOverflow : public Error {
 public:
  using Error::Error;
};

class SchemaError : public Error {
 public:
  SchemaError(std::string path, const std::string& message)
      : Error(path + ": " + message), path_(std::move(path)) {}
  // JSON path of the offending element, e.g. "$.states[2].transitions[0].to".
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

class SessionEnded : public Error {
 public:
  SessionEnded() : Error("conversation already ended") {}
};

class TargetTimeout : public Error {
 public:
  using Error::Error;
};

class ProtocolError : public Error {
 public:
  using Error::Error;
};

class TargetUnavailable : public Error {
 public:
  using Error::Error;
};

}  // namespace vui

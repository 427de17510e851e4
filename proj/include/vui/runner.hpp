#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "vui/exploration.hpp"
#include "vui/extraction.hpp"
#include "vui/input_generation.hpp"
#include "vui/llm.hpp"
#include "vui/model.hpp"
#include "vui/target.hpp"

namespace vui::runner {

// When max_rounds is set the wall clock is ignored, so seeded runs stay
// reproducible.
struct Budget {
  std::optional<int> max_rounds;
  std::optional<double> wall_clock_s;

  void validate() const;  // throws InvalidArgument
};

struct RunOptions {
  int relaunch_cap = 10;
  inputs::ParserConfig parser = inputs::ParserConfig::defaults();
  extract::FilterOptions filter;
};

struct InputAdd {
  std::string phrase;
  model::Origin origin = model::Origin::Gateway;
  bool operator==(const InputAdd&) const = default;
};

// How the output of a round was mapped to a state.
enum class DecisionSource { ExactMatch, Gateway, Fallback };
std::string_view to_string(DecisionSource s);

// One interaction round together with the model mutations it caused, in
// the order they were applied.
struct RoundRecord {
  int round = 0;
  model::StateId state_before;
  std::string input;
  std::string raw_output;
  bool ended = false;
  bool timed_out = false;

  std::vector<InputAdd> pre_inputs;  // added to state_before before the round applies
  extract::StateDecision decision;
  DecisionSource source = DecisionSource::ExactMatch;
  model::StateId resolved;
  bool marked_final = false;
  bool marked_confusion = false;
  std::vector<InputAdd> inputs_added;
  std::optional<model::Validity> validity;  // input checker verdict for (state_before, input)
  std::vector<InputAdd> feedback_inputs;    // added after invalid-input feedback

  std::vector<std::string> checker_verdicts;
  std::optional<explore::ThoughtTrace> thought_trace;  // reasoning that chose `input`
};

struct PhaseStats {
  int invocations = 0;
  int llm_calls = 0;
  int feedback_rounds = 0;
  int fallbacks = 0;
};

struct Stats {
  PhaseStats extraction;
  PhaseStats generation;
  PhaseStats exploration;
  int chat_calls = 0;
  int exact_matches = 0;
  int relaunches = 0;
  int timeouts = 0;

  int llm_calls() const;
  int fallbacks() const;
  int phase_invocations() const;
};

// Ground truth per round, taken from the target's scoring channel. Nothing
// in the test loop reads it.
struct EvalRecord {
  int round = 0;
  std::string truth_state;
  bool was_fallback = false;
};

struct CoveragePoint {
  int round = 0;
  int covered = 0;
  int total = 0;
  double rate() const { return total == 0 ? 0.0 : static_cast<double>(covered) / total; }
  bool operator==(const CoveragePoint&) const = default;
};

struct TestReport {
  std::string tester;
  std::uint64_t seed = 0;
  std::vector<RoundRecord> transcript;
  model::BehaviorModel model;
  std::vector<EvalRecord> eval;
  std::vector<CoveragePoint> coverage;
  Stats stats;
  std::string stop_reason;
};

TestReport run_elevate(target::Target& target, llm::Gateway& gateway, const Budget& budget, std::uint64_t seed,
                       const RunOptions& options = {});

enum class BaselineKind { Chatbot, Random, Weighted };
std::string_view to_string(BaselineKind k);
BaselineKind parse_baseline_kind(std::string_view s);

// `gateway` may be null except for the chatbot baseline.
TestReport run_baseline(BaselineKind kind, target::Target& target, llm::Gateway* gateway, const Budget& budget,
                        std::uint64_t seed, const RunOptions& options = {});

// Rebuilds the model from the mutations logged in a transcript.
model::BehaviorModel replay(const std::vector<RoundRecord>& transcript);

struct SentenceState {
  std::string text;
  std::vector<std::string> inputs;
};

// Folds sentences through state extraction against an accumulating model
// and returns the labels of the resulting states. The text-only form takes
// each sentence's rule-based replies as its input events.
std::set<std::string> canonicalize(const std::vector<SentenceState>& sentences, llm::Gateway& gateway,
                                   const RunOptions& options = {});
std::set<std::string> canonicalize(const std::vector<std::string>& sentences, llm::Gateway& gateway,
                                   const RunOptions& options = {});

// The non-initial states of a report's model with their input events.
std::vector<SentenceState> discovered_sentences(const TestReport& report);

// Round-by-round count of ground-truth states reached: <START> plus the
// states owning each output seen so far.
std::vector<CoveragePoint> coverage_timeline(const TestReport& report, const model::BehaviorModel& truth);

// Without ground truth: every report's outputs are canonicalized together
// and the total is the size of the union (plus <START>).
std::vector<std::vector<CoveragePoint>> coverage_union(const std::vector<const TestReport*>& reports,
                                                       llm::Gateway& gateway, const RunOptions& options = {});

// Coverage rate at `round`, holding the last value after a timeline ends.
double rate_at(const std::vector<CoveragePoint>& timeline, int round);

// CSV: "round,<mode>,..." with one row per round and the mean coverage rate
// of each mode across skills.
std::string compare_csv(const std::vector<std::string>& modes,
                        const std::vector<std::vector<std::vector<CoveragePoint>>>& timelines, int rounds);

std::string report_to_json(const TestReport& report);
TestReport report_from_json(std::string_view text);

}  // namespace vui::runner

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "vui/error.hpp"
#include "vui/input_generation.hpp"
#include "vui/text.hpp"

namespace vui::inputs {

namespace {

const std::set<std::string_view> kYesNoLeads = {"would", "do",     "does",   "did",  "is",  "are", "was",
                                                "were",  "can",    "could",  "shall", "should", "will",
                                                "may",   "have",   "has",    "am"};
const std::set<std::string_view> kWhLeads = {"what", "which", "who", "where", "when", "why", "how", "whose"};

// Words that frame a question rather than name an option.
const std::set<std::string_view> kFrameWords = {
    "do",     "does",  "did",      "would", "will",   "can",    "could",  "shall",   "should", "is",
    "are",    "was",   "were",     "you",   "your",   "i",      "we",     "it",      "want",   "like",
    "prefer", "rather", "have",    "to",    "hear",   "about",  "which",  "what",    "who",    "whose",
    "one",    "choose", "pick",    "select", "please", "maybe", "perhaps", "let's",  "lets",   "me",
    "us",     "tell",  "the",      "a",     "an",     "of",     "kind",   "type",    "interested", "in",
    "for",    "now",   "today",    "then",  "so",     "or",     "and"};

const std::set<std::string_view> kLeadingFillers = {"the", "a", "an", "to", "for", "about", "me", "us", "your", "my"};

const std::set<std::string_view> kStopWords = {
    "a",     "an",     "the",   "is",     "are",   "was",    "were",   "be",     "been",   "to",
    "of",    "in",     "on",    "at",     "for",   "from",   "by",     "with",   "about",  "as",
    "and",   "or",     "but",   "if",     "then",  "so",     "this",   "that",   "these",  "those",
    "here",  "there",  "it",    "its",    "it's",  "i",      "i'm",    "me",     "my",     "we",
    "our",   "you",    "your",  "you're", "he",    "she",    "they",   "them",   "their",  "what",
    "which", "who",    "where", "when",   "why",   "how",    "can",    "could",  "would",  "will",
    "shall", "should", "may",   "might",  "must",  "do",     "does",   "did",    "have",   "has",
    "had",   "not",    "no",    "yes",    "just",  "also",   "very",   "really", "now",    "today",
    "again", "more",   "some",  "any",    "all",   "every",  "each",   "other",  "welcome", "hello",
    "hi",    "hey",    "thanks", "thank", "please", "let's", "lets",   "ok",     "okay",   "sure",
    "well",  "great",  "good",  "nice",   "get",   "got",    "going",  "like",   "want",   "say",
    "ask",   "tell",   "using", "used",   "am",    "let",    "us",     "bye",    "see",    "soon"};

constexpr std::size_t kMaxSalientPhrases = 3;

struct Sentence {
  std::string text;  // lowercased, terminator removed
  char end = 0;
};

// Curly quotes and apostrophes to ASCII so one set of rules applies.
std::string fold_quotes(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i + 2 < s.size() && static_cast<unsigned char>(s[i]) == 0xE2 && static_cast<unsigned char>(s[i + 1]) == 0x80) {
      const auto c = static_cast<unsigned char>(s[i + 2]);
      if (c == 0x9C || c == 0x9D) {
        out += '"';
        i += 2;
        continue;
      }
      if (c == 0x98 || c == 0x99) {
        out += '\'';
        i += 2;
        continue;
      }
    }
    out += s[i];
  }
  return out;
}

bool is_terminator(char c) { return c == '.' || c == '?' || c == '!'; }

std::vector<Sentence> split_sentences(std::string_view raw) {
  const std::string s = text::to_lower(fold_quotes(raw));
  std::vector<Sentence> out;
  std::string cur;
  bool in_quote = false;
  auto flush = [&](char end) {
    auto t = text::trim(cur);
    if (!t.empty()) out.push_back(Sentence{std::string(t), end});
    cur.clear();
  };
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (c == '"') in_quote = !in_quote;
    if (!in_quote && is_terminator(c)) {
      std::size_t j = i;
      char end = c;
      while (j + 1 < s.size() && is_terminator(s[j + 1])) {
        ++j;
        if (s[j] == '?') end = '?';
      }
      if (j + 1 == s.size() || s[j + 1] == ' ' || s[j + 1] == '"') {
        flush(end == '!' ? '.' : end);
        i = j;
        continue;
      }
    }
    cur += c;
  }
  flush(0);
  return out;
}

std::string strip_punct(std::string_view w) {
  auto is_p = [](char c) {
    return c == ',' || c == '.' || c == '?' || c == '!' || c == ';' || c == ':' || c == '"' || c == '(' ||
           c == ')' || c == '\'';
  };
  while (!w.empty() && is_p(w.front())) w.remove_prefix(1);
  while (!w.empty() && is_p(w.back())) w.remove_suffix(1);
  return std::string(w);
}

std::vector<std::string> words_of(std::string_view s) {
  std::vector<std::string> out;
  for (const auto& raw : text::split_words(s)) {
    auto w = strip_punct(raw);
    if (!w.empty()) out.push_back(std::move(w));
  }
  return out;
}

struct Cues {
  bool interrogative = false;
  bool yes_no = false;
  bool wh = false;
  bool instruction = false;
  bool options = false;
};

Cues cues_of(const Sentence& s) {
  Cues c;
  const auto words = words_of(s.text);
  if (words.empty()) return c;
  c.interrogative = s.end == '?';
  c.yes_no = c.interrogative && kYesNoLeads.count(words.front()) > 0;
  c.wh = c.interrogative && kWhLeads.count(words.front()) > 0;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (words[i] == "say" || words[i] == "ask") c.instruction = true;
    if (words[i] == "tell" && i + 1 < words.size() && words[i + 1] == "me") c.instruction = true;
  }
  const bool has_conj = std::any_of(words.begin(), words.end(), [](const std::string& w) { return w == "or" || w == "and"; });
  c.options = (c.interrogative || c.instruction) && has_conj;
  return c;
}

std::vector<std::string> quoted_phrases(std::string_view s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    auto open = s.find('"', pos);
    if (open == std::string_view::npos) break;
    auto close = s.find('"', open + 1);
    if (close == std::string_view::npos) break;
    auto phrase = strip_punct(s.substr(open + 1, close - open - 1));
    if (!phrase.empty()) out.push_back(std::move(phrase));
    pos = close + 1;
  }
  return out;
}

std::optional<std::string> lexicon_answer(const std::vector<std::string>& words, std::size_t from,
                                          const ParserConfig& config) {
  for (std::size_t i = from; i < words.size(); ++i) {
    std::string w = words[i];
    if (w.size() > 2 && w.ends_with("'s")) w.resize(w.size() - 2);
    for (const auto& [noun, answer] : config.noun_lexicon) {
      if (w == noun || (w.size() == noun.size() + 1 && w.back() == 's' && w.starts_with(noun))) return answer;
    }
  }
  return std::nullopt;
}

std::string join_words(const std::vector<std::string>& words, std::size_t begin, std::size_t end) {
  std::string out;
  for (std::size_t i = begin; i < end; ++i) {
    if (!out.empty()) out += ' ';
    out += words[i];
  }
  return out;
}

enum class Boundary { None, Comma, Conjunction, Colon };

struct Part {
  std::vector<std::string> words;
  Boundary before = Boundary::None;
};

// Splits on commas, semicolons and the conjunctions "or"/"and". A colon
// discards everything before it.
std::vector<Part> split_conjuncts(std::string_view s) {
  std::vector<Part> parts(1);
  for (const auto& raw : text::split_words(s)) {
    const std::string w = strip_punct(raw);
    if (w == "or" || w == "and") {
      if (!parts.back().words.empty()) parts.push_back(Part{{}, Boundary::Conjunction});
      else parts.back().before = Boundary::Conjunction;
      continue;
    }
    if (!w.empty()) parts.back().words.push_back(w);
    const char last = raw.back();
    if (last == ':') {
      parts.assign(1, Part{{}, Boundary::Colon});
    } else if ((last == ',' || last == ';') && !parts.back().words.empty()) {
      parts.push_back(Part{{}, Boundary::Comma});
    }
  }
  std::erase_if(parts, [](const Part& p) { return p.words.empty(); });
  return parts;
}

std::vector<std::string> strip_leading(std::vector<std::string> words, const std::set<std::string_view>& drop) {
  std::size_t i = 0;
  while (i < words.size() && drop.count(words[i]) > 0) ++i;
  words.erase(words.begin(), words.begin() + static_cast<std::ptrdiff_t>(i));
  return words;
}

// Cuts a trailing purpose clause: "next to continue" -> "next".
std::vector<std::string> cut_tail(std::vector<std::string> words) {
  static const std::set<std::string_view> kTail = {"to", "for", "if", "when", "anytime", "instead"};
  for (std::size_t i = 1; i < words.size(); ++i) {
    if (kTail.count(words[i]) > 0) {
      words.resize(i);
      break;
    }
  }
  return words;
}

std::vector<std::string> selection_conjuncts(const Sentence& s, const Cues& c) {
  auto parts = split_conjuncts(s.text);
  // "What would you like, x or y?": the question frame precedes the list.
  if (parts.size() > 1 && c.wh && parts[0].before != Boundary::Colon && parts[1].before == Boundary::Comma) {
    parts.erase(parts.begin());
  }
  std::vector<std::string> out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    auto words = i == 0 ? strip_leading(parts[i].words, kFrameWords)
                        : strip_leading(parts[i].words, {"the", "a", "an", "to"});
    if (!words.empty()) out.push_back(join_words(words, 0, words.size()));
  }
  return out;
}

std::vector<std::string> instruction_phrases(const Sentence& s, const ParserConfig& config) {
  auto quoted = quoted_phrases(s.text);
  if (!quoted.empty()) return quoted;

  const auto raw_words = text::split_words(s.text);
  std::vector<std::string> plain;
  for (const auto& w : raw_words) plain.push_back(strip_punct(w));

  struct Cue {
    std::size_t begin;
    std::size_t after;
    bool tell;
  };
  std::vector<Cue> cues;
  for (std::size_t i = 0; i < plain.size(); ++i) {
    if (plain[i] == "say" || plain[i] == "ask") cues.push_back({i, i + 1, false});
    if (plain[i] == "tell" && i + 1 < plain.size() && plain[i + 1] == "me") cues.push_back({i, i + 2, true});
  }

  std::vector<std::string> out;
  for (std::size_t k = 0; k < cues.size(); ++k) {
    const std::size_t end = k + 1 < cues.size() ? cues[k + 1].begin : raw_words.size();
    std::string segment;
    for (std::size_t i = cues[k].after; i < end; ++i) {
      if (!segment.empty()) segment += ' ';
      segment += raw_words[i];
    }
    for (auto& part : split_conjuncts(segment)) {
      auto words = cut_tail(strip_leading(part.words, kLeadingFillers));
      if (words.empty()) continue;
      if (cues[k].tell) {
        if (auto answer = lexicon_answer(words, 0, config)) {
          out.push_back(*answer);
          continue;
        }
      }
      out.push_back(join_words(words, 0, words.size()));
    }
  }
  return out;
}

std::vector<std::string> salient_phrases(std::string_view s) {
  std::vector<std::string> out;
  std::vector<std::string> run;
  auto flush = [&] {
    if (!run.empty() && out.size() < kMaxSalientPhrases) out.push_back(join_words(run, 0, run.size()));
    run.clear();
  };
  for (const auto& raw : text::split_words(text::to_lower(fold_quotes(s)))) {
    const std::string w = strip_punct(raw);
    const bool content = w.size() >= 3 && kStopWords.count(w) == 0;
    if (content) run.push_back(w);
    if (!content || raw.back() == ',' || raw.back() == '.' || raw.back() == '?' || raw.back() == '!') flush();
  }
  flush();
  return out;
}

std::vector<std::string> read_lines(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw InvalidArgument("cannot read " + p.string());
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    auto t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    out.emplace_back(t);
  }
  return out;
}

}  // namespace

std::string_view to_string(QuestionType t) {
  switch (t) {
    case QuestionType::YesNo: return "yes-no";
    case QuestionType::Selection: return "selection";
    case QuestionType::Instruction: return "instruction";
    case QuestionType::Wh: return "wh";
    case QuestionType::InstructionSelection: return "instruction+selection";
    case QuestionType::WhSelection: return "wh+selection";
    case QuestionType::YesNoSelection: return "yes-no+selection";
    case QuestionType::Other: return "other";
  }
  return "other";
}

bool is_mixed(QuestionType t) {
  return t == QuestionType::InstructionSelection || t == QuestionType::WhSelection ||
         t == QuestionType::YesNoSelection;
}

const ParserConfig& ParserConfig::defaults() {
  static const ParserConfig config = [] {
    ParserConfig c;
    c.noun_lexicon = {{"name", "alex"},   {"color", "blue"},  {"colour", "blue"}, {"number", "seven"},
                      {"city", "paris"},  {"animal", "dog"},  {"food", "pizza"}};
    c.confusion_phrases = {"sorry", "didn't get", "didn't understand", "not sure", "try again", "can't help"};
    return c;
  }();
  return config;
}

ParserConfig ParserConfig::load(const std::filesystem::path& lexicon_file,
                                const std::filesystem::path& confusion_file) {
  ParserConfig c = defaults();
  if (!lexicon_file.empty()) {
    c.noun_lexicon.clear();
    for (const auto& line : read_lines(lexicon_file)) {
      const auto colon = line.find(':');
      if (colon == std::string::npos) throw InvalidArgument("lexicon line without ':': " + line);
      c.noun_lexicon.emplace_back(text::normalize(line.substr(0, colon)), text::normalize(line.substr(colon + 1)));
    }
  }
  if (!confusion_file.empty()) {
    c.confusion_phrases.clear();
    for (const auto& line : read_lines(confusion_file)) c.confusion_phrases.push_back(text::normalize(line));
  }
  return c;
}

std::string ParserConfig::lexicon_file_text(const ParserConfig& c) {
  std::string out = "# noun:sample answer\n";
  for (const auto& [noun, answer] : c.noun_lexicon) out += noun + ":" + answer + "\n";
  return out;
}

std::string ParserConfig::confusion_file_text(const ParserConfig& c) {
  std::string out = "# one phrase per line, matched case-insensitively\n";
  for (const auto& p : c.confusion_phrases) out += p + "\n";
  return out;
}

QuestionType classify_question(std::string_view raw_output) {
  bool instruction = false;
  bool options = false;
  std::optional<QuestionType> first_plain;
  bool wh = false;
  bool yes_no = false;
  for (const auto& s : split_sentences(raw_output)) {
    const Cues c = cues_of(s);
    instruction |= c.instruction;
    options |= c.options;
    wh |= c.wh;
    yes_no |= c.yes_no;
    if (!first_plain && c.yes_no) first_plain = QuestionType::YesNo;
    if (!first_plain && c.wh) first_plain = QuestionType::Wh;
  }
  if (instruction) return options ? QuestionType::InstructionSelection : QuestionType::Instruction;
  if (options) {
    if (wh) return QuestionType::WhSelection;
    if (yes_no) return QuestionType::YesNoSelection;
    return QuestionType::Selection;
  }
  return first_plain.value_or(QuestionType::Other);
}

std::vector<std::string> rule_based_inputs(std::string_view raw_output, const ParserConfig& config) {
  std::vector<std::string> found;
  auto add = [&](const std::vector<std::string>& items) { found.insert(found.end(), items.begin(), items.end()); };

  for (const auto& s : split_sentences(raw_output)) {
    const Cues c = cues_of(s);
    if (c.instruction) {
      add(instruction_phrases(s, config));
      continue;
    }
    if (!c.interrogative) continue;
    if (c.yes_no) add({"yes", "no"});
    bool answered = false;
    if (c.wh) {
      if (auto answer = lexicon_answer(words_of(s.text), 1, config)) {
        add({*answer});
        answered = true;
      }
    }
    if (c.options) {
      add(selection_conjuncts(s, c));
    } else if (c.wh && !answered) {
      add(salient_phrases(s.text));
    } else if (!c.yes_no && !c.wh) {
      add(salient_phrases(s.text));
    }
  }

  auto out = normalize_inputs(found, config.max_words);
  if (out.empty()) out = normalize_inputs(salient_phrases(raw_output), config.max_words);
  if (out.empty()) out = {"help"};
  return out;
}

std::vector<std::string> normalize_inputs(const std::vector<std::string>& items, std::size_t max_words) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& item : items) {
    std::string n = text::normalize(strip_punct(text::normalize(fold_quotes(item))));
    if (n.empty() || text::word_count(n) > max_words) continue;
    if (seen.insert(n).second) out.push_back(std::move(n));
  }
  return out;
}

bool is_confusion_response(std::string_view output, const ParserConfig& config) {
  const std::string folded = fold_quotes(output);
  return std::any_of(config.confusion_phrases.begin(), config.confusion_phrases.end(),
                     [&](const std::string& p) { return text::contains_ci(folded, p); });
}

}  // namespace vui::inputs

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "vui/error.hpp"
#include "vui/experiment.hpp"
#include "vui/input_generation.hpp"
#include "vui/runner.hpp"
#include "vui/simulator.hpp"
#include "vui/target.hpp"

namespace fs = std::filesystem;
using namespace vui;

namespace {

constexpr int kConfigError = 2;
constexpr int kTargetError = 3;

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw InvalidArgument("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& content) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + p.string());
  out << content;
}

std::pair<int, int> parse_range(const std::string& s) {
  const auto dots = s.find("..");
  try {
    if (dots == std::string::npos) {
      const int v = std::stoi(s);
      return {v, v};
    }
    return {std::stoi(s.substr(0, dots)), std::stoi(s.substr(dots + 2))};
  } catch (const std::exception&) {
    throw InvalidArgument("expected a range like 5..15, got '" + s + "'");
  }
}

struct BackendOptions {
  std::string backend = "perfect";
  double error_rate = 0.3;
  std::string endpoint;
  std::string model_name = "gpt-4";
  std::string templates_dir;
  std::string lexicon_file;
  std::string confusion_file;
  int requests_per_minute = 0;

  void add_to(CLI::App& app) {
    app.add_option("--backend", backend, "perfect, noisy or remote")->check(CLI::IsMember({"perfect", "noisy", "remote"}));
    app.add_option("--error-rate", error_rate, "fault rate of the noisy backend")->check(CLI::Range(0.0, 1.0));
    app.add_option("--endpoint", endpoint, "chat-completion URL for the remote backend");
    app.add_option("--model", model_name, "model name sent to the remote backend");
    app.add_option("--templates", templates_dir, "directory overriding the prompt templates");
    app.add_option("--rpm", requests_per_minute, "remote request rate limit per minute");
    app.add_option("--lexicon", lexicon_file, "noun:answer lexicon for wh questions");
    app.add_option("--confusion", confusion_file, "phrases marking a confusion response");
  }

  runner::RunOptions run_options() const {
    runner::RunOptions o;
    if (!lexicon_file.empty() || !confusion_file.empty()) {
      o.parser = inputs::ParserConfig::load(lexicon_file, confusion_file);
    }
    return o;
  }

  llm::GatewayConfig config(std::uint64_t seed) const {
    llm::GatewayConfig c;
    c.backend = llm::parse_backend_kind(backend);
    c.error_rate = c.backend == llm::BackendKind::Noisy ? error_rate : 0.0;
    c.endpoint = endpoint;
    c.model_name = model_name;
    c.seed = seed;
    c.requests_per_minute = requests_per_minute;
    c.validate();
    return c;
  }

  llm::TemplateSet templates() const {
    return templates_dir.empty() ? llm::TemplateSet::defaults() : llm::TemplateSet::load_dir(templates_dir);
  }
};

// A URL, a skill spec, or a target config file.
target::TargetConfig resolve_target(const std::string& arg, std::uint64_t seed, double timeout_s) {
  target::TargetConfig c;
  if (arg.rfind("http://", 0) == 0 || arg.rfind("https://", 0) == 0) {
    c.kind = target::Kind::Remote;
    c.url = arg;
    c.timeout_s = timeout_s;
  } else {
    const auto j = nlohmann::json::parse(read_file(arg), nullptr, false);
    if (j.is_object() && j.contains("kind")) {
      c = target::load_target_config(arg);
    } else {
      c.spec_path = arg;
    }
  }
  c.seed = seed;
  return c;
}

runner::Budget make_budget(int max_rounds, double time_limit) {
  runner::Budget b;
  if (max_rounds >= 0) b.max_rounds = max_rounds;
  if (time_limit > 0) b.wall_clock_s = time_limit;
  b.validate();
  return b;
}

std::vector<sim::SkillSpec> load_corpus(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw InvalidArgument("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw InvalidArgument("no skill specs in " + dir.string());
  std::vector<sim::SkillSpec> corpus;
  for (const auto& f : files) {
    try {
      corpus.push_back(sim::load_spec_file(f));
    } catch (const SchemaError& e) {
      throw InvalidArgument(f.filename().string() + ": " + e.what());
    }
  }
  return corpus;
}

std::vector<std::string> split_modes(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string m; std::getline(ss, m, ',');) {
    if (m.empty()) continue;
    if (!runner::is_known_mode(m)) throw InvalidArgument("unknown mode '" + m + "'");
    out.push_back(m);
  }
  if (out.empty()) throw InvalidArgument("no modes given");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Black-box behavior modeling for voice apps"};
  app.require_subcommand(1);

  // test
  auto* test = app.add_subcommand("test", "explore one app and write a report");
  std::string target_arg, out_path, tester = "elevate";
  std::uint64_t seed = 0;
  int max_rounds = -1;
  double time_limit = 0, timeout_s = 15.0;
  BackendOptions test_backend;
  test->add_option("--target", target_arg, "skill spec, target config, or http(s) URL")->required();
  test_backend.add_to(*test);
  test->add_option("--tester", tester, "elevate, chatbot, random or weighted")
      ->check(CLI::IsMember({"elevate", "chatbot", "random", "weighted"}));
  test->add_option("--seed", seed, "run seed");
  test->add_option("--max-rounds", max_rounds, "round budget");
  test->add_option("--time-limit", time_limit, "wall-clock budget in seconds, ignored with --max-rounds");
  test->add_option("--timeout", timeout_s, "per-send timeout for URL targets");
  test->add_option("--out", out_path, "report path")->required();

  // compare
  auto* compare = app.add_subcommand("compare", "run several testers over a corpus and write coverage curves");
  std::string corpus_dir, modes_arg = "elevate,chatbot,random,weighted", csv_path, reports_dir;
  bool rounds_match = false;
  int compare_rounds = 20;
  double compare_time = 0;
  std::uint64_t compare_seed = 0;
  BackendOptions compare_backend;
  compare->add_option("--corpus", corpus_dir, "directory of skill specs")->required();
  compare->add_option("--modes", modes_arg, "comma-separated testers");
  compare->add_flag("--rounds-match", rounds_match, "give every tester the same round budget");
  compare->add_option("--rounds", compare_rounds, "round budget per skill");
  compare->add_option("--time-limit", compare_time, "wall-clock budget per skill without --rounds-match");
  compare->add_option("--seed", compare_seed, "run seed");
  compare->add_option("--reports", reports_dir, "also write every report into this directory");
  compare_backend.add_to(*compare);
  compare->add_option("--out", csv_path, "CSV path")->required();

  // gen-corpus
  auto* gen = app.add_subcommand("gen-corpus", "generate synthetic skill specs");
  std::uint64_t gen_seed = 42;
  int gen_count = 10;
  std::string sizes = "5..15", variants = "2..4", branching = "2..4", gen_out;
  gen->add_option("--seed", gen_seed, "corpus seed");
  gen->add_option("--count", gen_count, "number of skills");
  gen->add_option("--sizes", sizes, "state count range");
  gen->add_option("--variants", variants, "utterance variants per state");
  gen->add_option("--branching", branching, "out-degree range");
  gen->add_option("--out", gen_out, "output directory")->required();

  // export
  auto* exp = app.add_subcommand("export", "write the model of a report as DOT or JSON");
  std::string report_path, dot_path, model_path;
  exp->add_option("--report", report_path, "report JSON")->required();
  exp->add_option("--dot", dot_path, "DOT output");
  exp->add_option("--model", model_path, "model JSON output");

  // templates
  auto* tpl = app.add_subcommand("templates", "write the default prompt templates and parser lists");
  std::string tpl_out, parser_out;
  tpl->add_option("--out", tpl_out, "template directory")->required();
  tpl->add_option("--parser-out", parser_out, "directory for lexicon.txt and confusion.txt");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (test->parsed()) {
      const auto budget = make_budget(max_rounds, time_limit);
      const auto config = test_backend.config(seed);
      auto target = target::make_target(resolve_target(target_arg, seed, timeout_s));
      const auto options = test_backend.run_options();
      llm::Gateway gateway(config, llm::make_backend(config, target->truth()), test_backend.templates());
      runner::TestReport report =
          tester == "elevate"
              ? runner::run_elevate(*target, gateway, budget, seed, options)
              : runner::run_baseline(runner::parse_baseline_kind(tester), *target, &gateway, budget, seed, options);
      if (auto* local = dynamic_cast<target::LocalTarget*>(target.get())) {
        report.coverage = runner::coverage_timeline(report, sim::ground_truth(local->spec()));
      }
      write_file(out_path, runner::report_to_json(report));
      std::cout << report.transcript.size() << " rounds, " << report.model.size() << " states, stop: "
                << report.stop_reason;
      if (!report.coverage.empty()) std::cout << ", coverage " << report.coverage.back().rate();
      std::cout << "\n";
    } else if (compare->parsed()) {
      const auto modes = split_modes(modes_arg);
      const auto corpus = load_corpus(corpus_dir);
      const auto budget = rounds_match ? make_budget(compare_rounds, 0)
                                       : make_budget(compare_time > 0 ? -1 : compare_rounds, compare_time);
      const auto config = compare_backend.config(compare_seed);
      const auto templates = compare_backend.templates();
      const auto options = compare_backend.run_options();
      std::vector<std::vector<std::vector<runner::CoveragePoint>>> timelines;
      int rounds = budget.max_rounds.value_or(0);
      for (const auto& mode : modes) {
        const auto reports = runner::run_corpus(corpus, mode, config, budget, compare_seed, options, templates);
        std::vector<std::vector<runner::CoveragePoint>> per_skill;
        for (std::size_t i = 0; i < reports.size(); ++i) {
          per_skill.push_back(reports[i].coverage);
          if (!reports[i].coverage.empty()) rounds = std::max(rounds, reports[i].coverage.back().round);
          if (!reports_dir.empty()) {
            write_file(fs::path(reports_dir) / (mode + "_" + std::to_string(i) + ".json"),
                       runner::report_to_json(reports[i]));
          }
        }
        timelines.push_back(std::move(per_skill));
      }
      const std::string csv = runner::compare_csv(modes, timelines, rounds);
      write_file(csv_path, csv);
      std::cout << csv.substr(csv.rfind('\n', csv.size() - 2) + 1);
    } else if (gen->parsed()) {
      sim::CorpusOptions o;
      o.seed = gen_seed;
      o.count = gen_count;
      o.states = parse_range(sizes);
      o.variants = parse_range(variants);
      o.branching = parse_range(branching);
      const auto corpus = sim::gen_corpus(o);
      for (std::size_t i = 0; i < corpus.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "skill_%03zu.json", i);
        write_file(fs::path(gen_out) / name, sim::to_json(corpus[i]) + "\n");
      }
      std::cout << corpus.size() << " skills written to " << gen_out << "\n";
    } else if (exp->parsed()) {
      if (dot_path.empty() && model_path.empty()) throw InvalidArgument("nothing to export: pass --dot or --model");
      const auto report = runner::report_from_json(read_file(report_path));
      if (!dot_path.empty()) write_file(dot_path, report.model.to_dot());
      if (!model_path.empty()) write_file(model_path, report.model.to_json());
    } else if (tpl->parsed()) {
      llm::TemplateSet::defaults().save_dir(tpl_out);
      if (!parser_out.empty()) {
        const auto& d = inputs::ParserConfig::defaults();
        write_file(fs::path(parser_out) / "lexicon.txt", inputs::ParserConfig::lexicon_file_text(d));
        write_file(fs::path(parser_out) / "confusion.txt", inputs::ParserConfig::confusion_file_text(d));
      }
    }
  } catch (const TargetUnavailable& e) {
    std::cerr << "target failure: " << e.what() << "\n";
    return kTargetError;
  } catch (const ProtocolError& e) {
    std::cerr << "target failure: " << e.what() << "\n";
    return kTargetError;
  } catch (const SessionEnded& e) {
    std::cerr << "target failure: " << e.what() << "\n";
    return kTargetError;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  }
  return 0;
}

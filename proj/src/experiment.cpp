#include "vui/experiment.hpp"

#include <future>
#include <memory>

#include "vui/error.hpp"
#include "vui/target.hpp"

namespace vui::runner {

bool is_known_mode(std::string_view mode) {
  return mode == "elevate" || mode == "chatbot" || mode == "random" || mode == "weighted";
}

std::vector<TestReport> run_corpus(const std::vector<sim::SkillSpec>& corpus, std::string_view mode,
                                   const llm::GatewayConfig& config, const Budget& budget, std::uint64_t seed,
                                   const RunOptions& options, const llm::TemplateSet& templates) {
  if (!is_known_mode(mode)) throw InvalidArgument("unknown tester '" + std::string(mode) + "'");
  budget.validate();
  config.validate();

  auto work = [&](std::size_t i) {
    auto spec = std::make_shared<const sim::SkillSpec>(corpus[i]);
    target::LocalTarget target(spec, derive_seed(seed, "skill:" + std::to_string(i)));
    llm::Gateway gateway(config, llm::make_backend(config, target.truth()), templates);
    TestReport report = mode == "elevate"
                            ? run_elevate(target, gateway, budget, seed, options)
                            : run_baseline(parse_baseline_kind(mode), target, &gateway, budget, seed, options);
    report.coverage = coverage_timeline(report, sim::ground_truth(*spec));
    return report;
  };

  std::vector<std::future<TestReport>> workers;
  for (std::size_t i = 0; i < corpus.size(); ++i) workers.push_back(std::async(std::launch::async, work, i));
  std::vector<TestReport> out;
  for (auto& w : workers) out.push_back(w.get());
  return out;
}

double mean_rate_at(const std::vector<TestReport>& reports, int round) {
  if (reports.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& r : reports) sum += rate_at(r.coverage, round);
  return sum / static_cast<double>(reports.size());
}

}  // namespace vui::runner

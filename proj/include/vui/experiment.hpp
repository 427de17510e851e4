#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "vui/llm.hpp"
#include "vui/runner.hpp"
#include "vui/simulator.hpp"

namespace vui::runner {

// "elevate" or a baseline name.
bool is_known_mode(std::string_view mode);

// Runs one tester per skill on a local target, one worker thread per skill.
// Each report carries its ground-truth coverage timeline. Skill i talks to a
// target seeded with derive_seed(seed, "skill:i").
std::vector<TestReport> run_corpus(const std::vector<sim::SkillSpec>& corpus, std::string_view mode,
                                   const llm::GatewayConfig& config, const Budget& budget, std::uint64_t seed,
                                   const RunOptions& options = {},
                                   const llm::TemplateSet& templates = llm::TemplateSet::defaults());

// Mean coverage rate at `round` across reports.
double mean_rate_at(const std::vector<TestReport>& reports, int round);

}  // namespace vui::runner

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace hoigs {

struct GradSuiteResult {
    std::string name;
    double max_rel_error = 0.0;
};

// Finite-difference verification of the differentiated pipelines. `which` is
// one of chs, lbs, hexplane, attention, or all.
std::vector<GradSuiteResult> run_grad_suites(const std::string& which,
                                             std::uint64_t seed = 0);

} // namespace hoigs

#pragma once

// The eleven acceptance criteria at desk scale.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace locmix {

struct AcceptanceOptions {
    /// Divides every numeric tolerance by 10.
    bool strict = false;
    std::uint64_t seed = 1;
    /// Criterion ids to run (1..11); empty means all.
    std::vector<int> only;
};

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
    double budget_seconds = 0.0;
};

using CriterionCallback = std::function<void(const CriterionResult&)>;

/// Runs the selected criteria in order; `on_result` sees each one as soon as
/// it finishes. A criterion that throws is reported as a failure.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options = {},
                                            const CriterionCallback& on_result = {});

std::string format_result(const CriterionResult& r);

}  // namespace locmix

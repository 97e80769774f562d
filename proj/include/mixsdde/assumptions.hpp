#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "mixsdde/coefficients.hpp"
#include "mixsdde/model.hpp"
#include "mixsdde/rng.hpp"

namespace mixsdde {

// Outcome of one randomized check. A pass means no violation was found within
// the sample budget.
struct AssumptionCheck {
    std::string name;          // "H1" ... "H5", "H2-crosscheck"
    bool applicable = true;
    bool passed = true;
    double bound = 0.0;        // constant the check was run against
    double worst_ratio = 0.0;  // max lhs / rhs over the samples
    std::size_t samples = 0;
    std::string witness;       // description of the worst sample when it failed
};

struct AssumptionReport {
    ClosedFormConstants implied;
    double growth_used = 0.0;     // K
    double lipschitz_used = 0.0;  // K_R
    double beta_used = 0.0;
    double theta_used = 0.0;
    std::vector<AssumptionCheck> checks;

    bool all_passed() const;
    const AssumptionCheck& check(const std::string& name) const;
};

struct AssumptionCheckOptions {
    std::size_t sample_budget = 1000;
    double horizon = 1.0;
    SeedSpec seed{};
    std::optional<InitialCondition> initial;  // H5 is skipped without one
};

AssumptionReport check_assumptions(const CoefficientSpec& spec, const HolderParams& params,
                                   const AssumptionCheckOptions& options);

}  // namespace mixsdde

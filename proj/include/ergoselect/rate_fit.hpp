#pragma once

// Log-log least-squares rate fit for convergence tables.

#include <utility>
#include <vector>

namespace ergoselect {

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;      // log of the constant
    double max_log_residual = 0.0;
    bool exact = false;          // all errors at the floor; slope meaningless
    bool floor_warning = false;  // smallest errors within 10x of the supplied floor
};

// Least squares on (log lambda, log e). Pairs with e <= 0 are skipped and,
// when a floor estimate is given, rows below 10x the floor raise the warning.
RateFit rate_fit(const std::vector<std::pair<double, double>>& pairs, double floor_estimate = 0.0);

}  // namespace ergoselect

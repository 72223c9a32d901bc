#include "ergoselect/rate_fit.hpp"

#include <cmath>
#include <stdexcept>

namespace ergoselect {

RateFit rate_fit(const std::vector<std::pair<double, double>>& pairs, double floor_estimate) {
    std::vector<std::pair<double, double>> logs;
    RateFit out;
    for (const auto& [x, e] : pairs) {
        if (!(e > 0.0)) continue;  // exact rows are excluded, reported via flags
        if (floor_estimate > 0.0 && e < 10.0 * floor_estimate) out.floor_warning = true;
        logs.emplace_back(std::log(x), std::log(e));
    }
    if (logs.size() < 3) {
        if (logs.size() < pairs.size()) {
            out.exact = true;  // degenerate fit: everything at or below the floor
            return out;
        }
        throw std::invalid_argument("rate_fit: need at least 3 positive pairs");
    }

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = double(logs.size());
    for (const auto& [lx, ly] : logs) {
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double denom = n * sxx - sx * sx;
    out.slope = (n * sxy - sx * sy) / denom;
    out.intercept = (sy - out.slope * sx) / n;
    for (const auto& [lx, ly] : logs)
        out.max_log_residual = std::max(out.max_log_residual,
                                        std::abs(ly - (out.intercept + out.slope * lx)));
    return out;
}

}  // namespace ergoselect

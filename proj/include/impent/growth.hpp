#pragma once

#include <cmath>
#include <span>
#include <utility>

#include "point.hpp"

namespace impent {

struct GrowthFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0; // RMS of log-count residuals over the fitted points
    std::size_t used = 0;
};

/*
 * Exponential growth rate of counts along a T-ladder: least-squares slope
 * of log(count) against T over the upper half of the ladder (the last
 * ceil(n/2) points, at least two). Stands in for limsup (1/T) log count.
 */
inline GrowthFit growth_rate(std::span<const std::pair<double, std::size_t>> counts) {
    if (counts.size() < 3) throw invalid_input("growth_rate: need at least 3 ladder points");
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (counts[i].second < 1) throw invalid_input("growth_rate: counts must be >= 1");
        if (i > 0 && !(counts[i].first > counts[i - 1].first)) throw invalid_input("growth_rate: T ladder must increase");
    }
    const std::size_t n = counts.size();
    const std::size_t used = std::max<std::size_t>(2, (n + 1) / 2);
    const auto fit = counts.subspan(n - used);

    double mt = 0.0, my = 0.0;
    for (auto [T, c] : fit) {
        mt += T;
        my += std::log(static_cast<double>(c));
    }
    mt /= static_cast<double>(used);
    my /= static_cast<double>(used);
    double sxy = 0.0, sxx = 0.0;
    for (auto [T, c] : fit) {
        sxy += (T - mt) * (std::log(static_cast<double>(c)) - my);
        sxx += (T - mt) * (T - mt);
    }
    GrowthFit g;
    g.used = used;
    g.slope = sxy / sxx;
    g.intercept = my - g.slope * mt;
    double ss = 0.0;
    for (auto [T, c] : fit) {
        const double r = std::log(static_cast<double>(c)) - (g.intercept + g.slope * T);
        ss += r * r;
    }
    g.residual = std::sqrt(ss / static_cast<double>(used));
    return g;
}

} // namespace impent

#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "semiflow.hpp"

namespace impent {

/// Finite partition used to code orbits into symbols.
struct Partition {
    enum class Kind { uniform_arcs, leading_symbol };
    Kind kind = Kind::uniform_arcs;
    std::size_t coord = 0;
    std::size_t cells = 2;

    static Partition uniform_arcs(std::size_t coord, std::size_t cells) {
        if (cells < 1) throw invalid_input("Partition: need at least one cell");
        return {Kind::uniform_arcs, coord, cells};
    }
    static Partition leading_symbol() { return {Kind::leading_symbol, 0, 2}; }

    std::size_t symbol(const Point& p) const {
        if (kind == Kind::leading_symbol) {
            const int s = p.word.symbol(0);
            return s < 0 ? 0 : static_cast<std::size_t>(s);
        }
        if (coord >= p.dim) throw invalid_input("Partition: coordinate out of range");
        const double c = p.coords[coord];
        const auto k = static_cast<std::size_t>(std::floor(c * static_cast<double>(cells)));
        return std::min(k, cells - 1);
    }

    std::string describe() const {
        if (kind == Kind::leading_symbol) return "leading_symbol";
        return "uniform_arcs(coord=" + std::to_string(coord) + ", cells=" + std::to_string(cells) + ")";
    }
};

struct MetricEntropyEstimate {
    double conditional = 0.0; // H_L - H_{L-1}
    double per_symbol = 0.0;  // H_L / L
    double H_L = 0.0;
    double H_Lm1 = 0.0;
    std::size_t distinct_blocks = 0;
    std::size_t min_block_count = 0;
    bool undersampled = false; // some observed L-block occurs fewer than 5 times
};

/// Shannon entropy (nats) of the empirical distribution of length-L blocks.
/// Returns the smallest nonzero block count through min_count.
inline double block_entropy(const std::vector<std::uint32_t>& symbols, std::size_t alphabet, std::size_t L,
                            std::size_t& distinct, std::size_t& min_count) {
    distinct = 0;
    min_count = 0;
    if (L == 0) return 0.0;
    if (symbols.size() < L) throw invalid_input("block_entropy: sequence shorter than the block length");
    const double bits_per = std::ceil(std::log2(static_cast<double>(std::max<std::size_t>(alphabet, 2))));
    if (bits_per * static_cast<double>(L) > 64.0) throw invalid_input("block_entropy: blocks do not fit in 64 bits");
    const auto shift = static_cast<unsigned>(bits_per);
    const std::uint64_t mask = bits_per * static_cast<double>(L) >= 64.0 ? ~std::uint64_t{0}
                                                                         : (std::uint64_t{1} << (shift * L)) - 1;
    std::unordered_map<std::uint64_t, std::size_t> counts;
    std::uint64_t key = 0;
    for (std::size_t i = 0; i < symbols.size(); ++i) {
        key = ((key << shift) | symbols[i]) & mask;
        if (i + 1 >= L) ++counts[key];
    }
    const double total = static_cast<double>(symbols.size() - L + 1);
    double h = 0.0;
    min_count = symbols.size();
    for (const auto& [k, c] : counts) {
        const double p = static_cast<double>(c) / total;
        h -= p * std::log(p);
        min_count = std::min(min_count, c);
    }
    distinct = counts.size();
    return h;
}

/*
 * Metric entropy of the time-1 map for the empirical measure of one orbit:
 * code φ_n(x0), burn_in <= n < burn_in + N, by the partition and take
 * H_L - H_{L-1}. The burn-in drops a transient before the orbit settles.
 */
inline MetricEntropyEstimate empirical_metric_entropy(const Semiflow& phi, const Point& x0, std::size_t N,
                                                      const Partition& partition, std::size_t L, std::size_t burn_in = 0) {
    if (L < 1) throw invalid_input("empirical_metric_entropy: block length must be >= 1");
    if (N < 2 * L) throw invalid_input("empirical_metric_entropy: orbit too short for the block length");
    const auto orbit = phi.orbit(x0, 1.0, N + burn_in);
    std::vector<std::uint32_t> sym(N);
    for (std::size_t i = 0; i < N; ++i) sym[i] = static_cast<std::uint32_t>(partition.symbol(orbit[burn_in + i]));

    MetricEntropyEstimate e;
    std::size_t d_prev = 0, m_prev = 0;
    e.H_L = block_entropy(sym, partition.cells, L, e.distinct_blocks, e.min_block_count);
    e.H_Lm1 = block_entropy(sym, partition.cells, L - 1, d_prev, m_prev);
    e.conditional = std::max(0.0, e.H_L - e.H_Lm1);
    e.per_symbol = e.H_L / static_cast<double>(L);
    e.undersampled = e.min_block_count < 5;
    return e;
}

} // namespace impent

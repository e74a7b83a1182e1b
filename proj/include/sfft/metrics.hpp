#pragma once

// Earth Mover's Distance between mode lists under the combined
// frequency/coefficient cost and the frequency-only cost, plus l2 error.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "sfft/errors.hpp"
#include "sfft/signal_model.hpp"

namespace sfft {

using ModeCost = std::function<double(const Mode&, const Mode&, std::int64_t)>;

/// |w_a - w_b| / n + |a_a - a_b|
inline double cost_d1(const Mode& a, const Mode& b, std::int64_t n) {
    if (n <= 0) throw InvalidInput("bandwidth must be positive");
    return std::abs(static_cast<double>(a.omega - b.omega)) / static_cast<double>(n) + std::abs(a.coeff - b.coeff);
}

/// |w_a - w_b| / n
inline double cost_domega(const Mode& a, const Mode& b, std::int64_t n) {
    if (n <= 0) throw InvalidInput("bandwidth must be positive");
    return std::abs(static_cast<double>(a.omega - b.omega)) / static_cast<double>(n);
}

/// Minimum-cost perfect matching on a square cost matrix (row-major),
/// Hungarian method with potentials, O(n^3). Returns column for each row.
inline std::vector<std::size_t> solve_assignment(std::span<const double> cost, std::size_t n) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
    const auto at = [&](std::size_t i, std::size_t j) { return cost[(i - 1) * n + (j - 1)]; };
    for (std::size_t i = 1; i <= n; ++i) {
        match[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = match[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = at(i0, j) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<std::size_t> row_to_col(n);
    for (std::size_t j = 1; j <= n; ++j) row_to_col[match[j] - 1] = j - 1;
    return row_to_col;
}

struct Transport {
    double cost = 0.0;
    std::vector<std::pair<std::size_t, std::size_t>> pairs; ///< (true index, estimate index)
};

/// EMD between two mode lists. The shorter list is padded with null modes;
/// a mode matched to a null mode costs its coefficient magnitude.
inline Transport emd(std::span<const Mode> truth, std::span<const Mode> est, std::int64_t n, const ModeCost& cost) {
    const std::size_t size = std::max(truth.size(), est.size());
    Transport out;
    if (size == 0) return out;
    std::vector<double> matrix(size * size, 0.0);
    for (std::size_t i = 0; i < size; ++i) {
        for (std::size_t j = 0; j < size; ++j) {
            double c = 0.0;
            if (i < truth.size() && j < est.size())
                c = cost(truth[i], est[j], n);
            else if (i < truth.size())
                c = std::abs(truth[i].coeff);
            else if (j < est.size())
                c = std::abs(est[j].coeff);
            matrix[i * size + j] = c;
        }
    }
    const auto assign = solve_assignment(matrix, size);
    for (std::size_t i = 0; i < size; ++i) {
        out.cost += matrix[i * size + assign[i]];
        if (i < truth.size() && assign[i] < est.size()) out.pairs.emplace_back(i, assign[i]);
    }
    return out;
}

/// Euclidean distance between coefficient vectors over the union of frequencies.
inline double l2_error(std::span<const Mode> truth, std::span<const Mode> est) {
    std::map<std::int64_t, cplx> diff;
    for (const auto& m : truth) diff[m.omega] += m.coeff;
    for (const auto& m : est) diff[m.omega] -= m.coeff;
    double acc = 0.0;
    for (const auto& [omega, d] : diff) acc += std::norm(d);
    return std::sqrt(acc);
}

struct EmdReport {
    double emd1 = 0.0;
    double emd_omega = 0.0;
    double l2 = 0.0;
    std::vector<std::pair<std::size_t, std::size_t>> matched_pairs; ///< from the EMD(1) matching
};

inline EmdReport compare_modes(std::span<const Mode> truth, std::span<const Mode> est, std::int64_t n) {
    EmdReport r;
    auto d1 = emd(truth, est, n, cost_d1);
    r.emd1 = d1.cost;
    r.matched_pairs = std::move(d1.pairs);
    r.emd_omega = emd(truth, est, n, cost_domega).cost;
    r.l2 = l2_error(truth, est);
    return r;
}

} // namespace sfft

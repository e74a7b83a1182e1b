#pragma once

// End-to-end sparse recovery by iterative peeling. Each peel draws an
// unshifted grid of prime length p and one or more shifted grids, identifies
// isolated frequencies from the phase of shifted-to-unshifted bin ratios,
// subtracts them analytically and repeats with a fresh prime.
//
//  * rounding:   one shift eps0; p is large enough that eps0-phase noise
//                stays below p/2 and rounding to the bin residue is exact.
//  * multiscale: shifts eps_j = beta^j eps0, j = 0..m; each level corrects
//                the previous estimate, so p only has to separate the modes.
//                Collisions are rejected by a vote over all m + 1 shifts.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numbers>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "sfft/errors.hpp"
#include "sfft/freq_estimate.hpp"
#include "sfft/signal_model.hpp"
#include "sfft/spectral.hpp"

namespace sfft {

enum class Algorithm { rounding, multiscale };

inline std::string_view to_string(Algorithm a) { return a == Algorithm::rounding ? "rounding" : "multiscale"; }

inline Algorithm parse_algorithm(std::string_view name) {
    if (name == "rounding") return Algorithm::rounding;
    if (name == "multiscale") return Algorithm::multiscale;
    throw InvalidInput("unknown algorithm '" + std::string(name) + "' (expected rounding or multiscale)");
}

struct RecoveryConfig {
    std::int64_t n = std::int64_t{1} << 20;
    std::int64_t k = 1;
    double sigma = 0.0;
    Algorithm algorithm = Algorithm::multiscale;
    double c1 = 2.0;      ///< sparsity multiplier in the lower bound on p
    double c2 = 4.0;      ///< noise multiplier in the rounding bound on p
    double c_sigma = 6.0; ///< noise constant for p, the collision threshold and the peak floor
    double beta = 2.5;    ///< shift ratio
    double eta = 0.25;    ///< tolerated fraction of failed collision tests
    double eps0 = 0.0;    ///< base shift; 0 selects 1/(2n)
    int max_peel_iters = 64;
    std::uint64_t seed = 0;

    [[nodiscard]] double base_shift() const { return eps0 > 0.0 ? eps0 : 0.5 / static_cast<double>(n); }

    void validate() const {
        if (n <= 0 || n % 2 != 0) throw InvalidLength("bandwidth must be a positive even integer");
        if (k <= 0 || k > n) throw InvalidSparsity("sparsity must satisfy 0 < k <= n");
        if (sigma < 0.0) throw InvalidInput("sigma must be nonnegative");
        if (!(beta > 1.0)) throw InvalidInput("beta must exceed 1");
        if (eta < 0.0 || eta > 1.0) throw InvalidInput("eta must lie in [0, 1]");
        if (c1 <= 0.0 || c2 < 0.0 || c_sigma < 0.0) throw InvalidInput("constants must be positive");
        if (eps0 < 0.0) throw InvalidInput("eps0 must be nonnegative");
        if (max_peel_iters < 1) throw InvalidInput("max_peel_iters must be at least 1");
    }
};

/// A tracked peak while its shifted readings are processed.
struct ModeEstimate {
    std::size_t h = 0;
    MultiscaleState state;
    int votes = 0;
    cplx coeff{};
};

/// One accepted frequency and where it came from.
struct Discovery {
    std::int64_t omega = 0;
    std::size_t h = 0;
    std::size_t p = 0;
    int votes = 0;
    int levels = 0; ///< m for this peel; m + 1 shifted grids
    int iteration = 0;
};

struct PeelLog {
    std::size_t p = 0;
    int levels = 0;
    std::size_t peaks = 0;
    std::size_t accepted = 0;
    std::uint64_t samples = 0;
};

struct RecoveryResult {
    std::vector<Mode> modes; ///< sorted by frequency
    int peel_iterations = 0;
    std::uint64_t samples_used = 0;
    int spurious_inserted = 0;
    int spurious_deleted = 0;
    std::chrono::nanoseconds runtime{0};
    bool complete = false; ///< false when max_peel_iters ran out with modes outstanding
    std::vector<Discovery> discoveries;
    std::vector<PeelLog> peels;
};

inline bool is_prime(std::uint64_t x) {
    if (x < 2) return false;
    if (x % 2 == 0) return x == 2;
    for (std::uint64_t d = 3; d * d <= x; d += 2)
        if (x % d == 0) return false;
    return true;
}

/// Smallest prime strictly greater than x.
inline std::uint64_t next_prime(double x) {
    if (x < 0.0) throw InvalidInput("next_prime needs x >= 0");
    auto c = static_cast<std::uint64_t>(std::floor(x)) + 1;
    while (!is_prime(c)) ++c;
    return c;
}

inline std::size_t choose_p_rounding(const RecoveryConfig& cfg, std::int64_t k_remaining) {
    if (k_remaining < 1) throw InvalidInput("k_remaining must be at least 1");
    const double sparse = cfg.c1 * static_cast<double>(k_remaining);
    const double noise = cfg.c2 * std::cbrt(std::pow(cfg.sigma / cfg.base_shift(), 2.0));
    return static_cast<std::size_t>(next_prime(std::max(sparse, noise)));
}

inline std::size_t choose_p_multiscale(const RecoveryConfig& cfg, std::int64_t k_remaining) {
    if (k_remaining < 1) throw InvalidInput("k_remaining must be at least 1");
    const double sparse = cfg.c1 * static_cast<double>(k_remaining);
    const double root = cfg.beta * (cfg.beta + 1.0) * cfg.c_sigma * cfg.sigma / std::numbers::pi;
    return static_cast<std::size_t>(next_prime(std::max(sparse, root * root)));
}

/// Number of refinement levels m such that the multiscale estimate lands
/// within p/2 of the true frequency; clamped at 0.
inline int num_shifts(std::size_t p, const RecoveryConfig& cfg) {
    if (p < 1) throw InvalidLength("p must be positive");
    const double eps0 = cfg.base_shift();
    const double delta = ShiftSchedule::admissible_delta(cfg.n, eps0, cfg.beta);
    return levels_for_resolution(delta, eps0, cfg.beta, static_cast<double>(p));
}

/// Threshold on | |S_eps[h]|/|S_p[h]| - 1 |. The absolute minimum keeps
/// noiseless runs from rejecting isolated modes on rounding error.
inline double collision_threshold(const RecoveryConfig& cfg, std::size_t p) {
    constexpr double kMinTolerance = 1e-6;
    return std::max(cfg.c_sigma * cfg.sigma / std::sqrt(static_cast<double>(p)), kMinTolerance);
}

namespace detail {

// Coefficient-scale floor: noise fluctuation c_sigma*sigma/sqrt(p), plus a
// tiny multiple of the signal scale that hides rounding residue when sigma=0.
inline double coeff_floor(const RecoveryConfig& cfg, std::size_t p, double scale) {
    constexpr double kRelativeFloor = 1e-9;
    return cfg.c_sigma * cfg.sigma / std::sqrt(static_cast<double>(p)) + kRelativeFloor * scale;
}

inline RecoveryResult run_peeling(const SignalSource& src, const RecoveryConfig& cfg) {
    cfg.validate();
    const auto t_start = std::chrono::steady_clock::now();
    const bool multiscale = cfg.algorithm == Algorithm::multiscale;
    const double eps0 = cfg.base_shift();
    const std::int64_t half_band = cfg.n / 2;

    Rng rng(cfg.seed);
    RecoveryResult res;
    std::map<std::int64_t, cplx> found;
    std::set<std::size_t> used_primes;
    double scale = -1.0;

    for (int iter = 0; iter < cfg.max_peel_iters; ++iter) {
        const std::int64_t missing = cfg.k - static_cast<std::int64_t>(found.size());
        const bool checking = missing <= 0;
        const std::int64_t sizing = std::max<std::int64_t>(missing, 1);

        std::size_t p = multiscale ? choose_p_multiscale(cfg, sizing) : choose_p_rounding(cfg, sizing);
        while (used_primes.count(p) != 0) p = static_cast<std::size_t>(next_prime(static_cast<double>(p)));
        used_primes.insert(p);
        const int levels = multiscale ? num_shifts(p, cfg) : 0;
        const int max_votes = multiscale ? static_cast<int>(std::floor(cfg.eta * (levels + 1))) : 0;
        const double tau = collision_threshold(cfg, p);

        std::vector<Mode> known;
        known.reserve(found.size());
        for (const auto& [omega, coeff] : found) known.push_back(Mode{omega, coeff});
        const SignalSource residual = residual_source(src, std::move(known));
        const NoiseSpec noise{cfg.sigma};
        const double pd = static_cast<double>(p);

        PeelLog log{p, levels, 0, 0, 0};
        ++res.peel_iterations;

        const Spectrum base = dft(sample_grid(residual, p, 0.0, noise, rng));
        log.samples += p;
        if (scale < 0.0) {
            for (const auto& c : base.coeffs) scale = std::max(scale, std::abs(c) / pd);
        }
        const double floor = coeff_floor(cfg, p, scale);
        const auto count = static_cast<std::size_t>(checking ? cfg.k : missing);
        const auto peaks = top_peaks(base, count, floor * pd);
        log.peaks = peaks.size();

        if (peaks.empty()) {
            res.samples_used += log.samples;
            res.peels.push_back(log);
            if (checking) {
                res.complete = true;
                break;
            }
            continue;
        }

        std::vector<ModeEstimate> tracked;
        tracked.reserve(peaks.size());
        for (auto h : peaks) tracked.push_back(ModeEstimate{h, {}, 0, estimate_coeff(base.coeffs[h], p)});

        for (int j = 0; j <= levels; ++j) {
            const double eps = eps0 * std::pow(cfg.beta, j);
            const Spectrum shifted = dft(sample_grid(residual, p, eps, noise, rng));
            log.samples += p;
            for (auto& est : tracked) {
                const cplx s0 = base.coeffs[est.h];
                const cplx se = shifted.coeffs[est.h];
                if (collision_ratio(s0, se) > tau) ++est.votes;
                est.state.absorb(phase_reading(s0, se, eps, est.h));
            }
        }

        for (const auto& est : tracked) {
            if (est.votes > max_votes) continue;
            const std::int64_t omega =
                round_to_residue(est.state.omega_tilde, static_cast<std::int64_t>(est.h), static_cast<std::int64_t>(p));
            if (omega < -half_band || omega >= half_band) continue;
            ++log.accepted;
            res.discoveries.push_back(Discovery{omega, est.h, p, est.votes, levels, iter});
            auto [it, inserted] = found.try_emplace(omega, est.coeff);
            if (!inserted) {
                it->second += est.coeff;
                if (std::abs(it->second) <= floor) {
                    found.erase(it);
                    ++res.spurious_inserted;
                    ++res.spurious_deleted;
                }
            }
        }
        res.samples_used += log.samples;
        res.peels.push_back(log);
    }

    // Hitting the iteration cap right after the last missing mode still counts as complete.
    if (static_cast<std::int64_t>(found.size()) >= cfg.k) res.complete = true;
    res.modes.reserve(found.size());
    for (const auto& [omega, coeff] : found) res.modes.push_back(Mode{omega, coeff});
    res.runtime = std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - t_start);
    return res;
}

} // namespace detail

inline RecoveryResult recover_multiscale(const SignalSource& src, const RecoveryConfig& cfg) {
    if (cfg.algorithm != Algorithm::multiscale) throw InvalidInput("config selects the rounding algorithm");
    return detail::run_peeling(src, cfg);
}

inline RecoveryResult recover_rounding(const SignalSource& src, const RecoveryConfig& cfg) {
    if (cfg.algorithm != Algorithm::rounding) throw InvalidInput("config selects the multiscale algorithm");
    return detail::run_peeling(src, cfg);
}

inline RecoveryResult recover(const SignalSource& src, const RecoveryConfig& cfg) { return detail::run_peeling(src, cfg); }

} // namespace sfft

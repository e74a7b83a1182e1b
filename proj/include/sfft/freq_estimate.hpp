#pragma once

// Phase arithmetic for frequency identification. Phases are kept in cycles,
// normalized to [-1/2, 1/2), never in radians.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>

#include "sfft/errors.hpp"
#include "sfft/spectral.hpp"

namespace sfft {

/// The representative of x mod 1 in [-1/2, 1/2).
inline double wrap_half(double x) {
    double y = x - std::floor(x + 0.5);
    if (y < -0.5) y += 1.0;
    if (y >= 0.5) y -= 1.0;
    return y;
}

/// Distance from x to the nearest integer.
inline double lee_norm(double x) { return std::abs(wrap_half(x)); }

/// Normalized phase of S_{p,eps}[h] / S_p[h].
struct PhaseReading {
    double b = 0.0; ///< in [-1/2, 1/2)
    double eps = 0.0;
    std::size_t h = 0;
};

inline PhaseReading phase_reading(cplx s0, cplx s_eps, double eps, std::size_t h) {
    if (s0 == cplx{}) throw DegenerateBin("phase reading against an empty bin");
    const double turns = std::arg(s_eps / s0) / (2.0 * std::numbers::pi);
    return PhaseReading{wrap_half(turns), eps, h};
}

/// | |s_eps| / |s0| - 1 |; zero for an isolated noiseless mode.
inline double collision_ratio(cplx s0, cplx s_eps) {
    if (s0 == cplx{}) throw DegenerateBin("collision ratio against an empty bin");
    return std::abs(std::abs(s_eps) / std::abs(s0) - 1.0);
}

/// b / eps, valid without wrap-around only while |eps * omega| < 1/2.
inline double estimate_direct(const PhaseReading& r) {
    if (!(r.eps > 0.0)) throw InvalidInput("estimate_direct needs a positive shift");
    return r.b / r.eps;
}

/// Nearest integer congruent to h mod p. Exact whenever |omega_tilde - omega| < p/2.
inline std::int64_t round_to_residue(double omega_tilde, std::int64_t h, std::int64_t p) {
    const double q = std::round((omega_tilde - static_cast<double>(h)) / static_cast<double>(p));
    return p * static_cast<std::int64_t>(q) + h;
}

inline cplx estimate_coeff(cplx s0, std::size_t p) { return s0 / static_cast<double>(p); }

/// One error-correction step: the reading at a larger shift resolves the
/// current estimate's error modulo 1/eps.
inline double multiscale_update(double omega_tilde, const PhaseReading& r) {
    if (!(r.eps > 0.0)) throw InvalidInput("multiscale_update needs a positive shift");
    return omega_tilde + wrap_half(r.b - r.eps * omega_tilde) / r.eps;
}

/// Geometric shift ladder eps_j = beta^j * eps0, j = 0..levels, with the
/// per-reading phase tolerance delta it is designed for.
struct ShiftSchedule {
    double eps0 = 0.0;
    double beta = 2.0;
    int levels = 0; ///< m; the ladder has m + 1 shifts
    double delta = 0.25;

    /// Largest delta compatible with bandwidth n, eps0 and beta.
    static double admissible_delta(std::int64_t n, double eps0, double beta) {
        return std::min((1.0 - eps0 * static_cast<double>(n)) / 2.0, 1.0 / (2.0 * beta + 2.0));
    }

    static ShiftSchedule admissible(std::int64_t n, double eps0, double beta, int levels) {
        if (!(beta > 1.0)) throw InvalidInput("shift ratio beta must exceed 1");
        if (!(eps0 > 0.0)) throw InvalidInput("base shift must be positive");
        return ShiftSchedule{eps0, beta, levels, admissible_delta(n, eps0, beta)};
    }

    [[nodiscard]] double shift(int j) const { return eps0 * std::pow(beta, j); }

    /// Worst-case final error for in-tolerance readings.
    [[nodiscard]] double error_bound() const { return delta / eps0 * std::pow(beta, -levels); }

    /// eps0 <= (1 - 2 delta)/N and beta <= (1 - 2 delta)/(2 delta), 0 < delta <= 1/4.
    [[nodiscard]] bool admits(std::int64_t n, double slack = 1e-12) const {
        return delta > 0.0 && delta <= 0.25 && eps0 <= (1.0 - 2.0 * delta) / static_cast<double>(n) * (1.0 + slack) &&
               beta <= (1.0 - 2.0 * delta) / (2.0 * delta) * (1.0 + slack);
    }
};

/// Smallest m >= 0 with (delta/eps0) * beta^-m < p/2.
inline int levels_for_resolution(double delta, double eps0, double beta, double p) {
    const double target = 2.0 * delta / (p * eps0);
    int m = target > 0.0 ? static_cast<int>(std::floor(std::log(target) / std::log(beta))) + 1 : 0;
    m = std::max(m, 0);
    while (delta / eps0 * std::pow(beta, -m) >= p / 2.0) ++m;
    while (m > 0 && delta / eps0 * std::pow(beta, -(m - 1)) < p / 2.0) --m;
    return m;
}

/// Running state of the multiscale recursion for one candidate frequency.
struct MultiscaleState {
    double omega_tilde = 0.0;
    int level = -1;

    void absorb(const PhaseReading& r) {
        omega_tilde = level < 0 ? estimate_direct(r) : multiscale_update(omega_tilde, r);
        ++level;
    }
};

/// Folds the recursion over readings taken at increasing shifts. For
/// readings within delta of eps_j * omega the result is within
/// sched.error_bound() of omega.
inline double multiscale_refine(std::span<const PhaseReading> readings, const ShiftSchedule& sched) {
    if (readings.empty()) throw InvalidInput("multiscale_refine needs at least one reading");
    constexpr double tol = 1e-9;
    if (std::abs(readings[0].eps - sched.eps0) > tol * sched.eps0)
        throw InvalidInput("first reading must be taken at the base shift");
    for (std::size_t j = 1; j < readings.size(); ++j) {
        if (std::abs(readings[j].eps / readings[j - 1].eps - sched.beta) > tol * sched.beta)
            throw InvalidInput("reading shifts must grow by the schedule ratio");
    }
    MultiscaleState state;
    for (const auto& r : readings) state.absorb(r);
    return state.omega_tilde;
}

} // namespace sfft

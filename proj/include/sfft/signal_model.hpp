#pragma once

// Sparse trigonometric signals, the additive complex Gaussian noise model, and
// sampling of signal sources on shifted uniform grids.

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "sfft/errors.hpp"
#include "sfft/spectral.hpp"

namespace sfft {

using Rng = std::mt19937_64;

/// One active frequency: integer omega (cycles per unit time) with complex amplitude.
struct Mode {
    std::int64_t omega = 0;
    cplx coeff{};

    friend bool operator==(const Mode&, const Mode&) = default;
};

struct NoiseSpec {
    double sigma = 0.0; ///< standard deviation of the complex noise (total variance sigma^2)
};

/// Fractional part of omega * t in [-1/2, 1/2), with the product's rounding
/// error recovered by an fma so that large omega keep full phase precision.
inline double phase_cycles(std::int64_t omega, double t) {
    const double w = static_cast<double>(omega);
    const double prod = w * t;
    const double err = std::fma(w, t, -prod);
    const double whole = std::round(prod);
    double frac = (prod - whole) + err;
    frac -= std::floor(frac + 0.5);
    return frac;
}

/// exp(2 pi i omega t)
inline cplx tone(std::int64_t omega, double t) {
    const double angle = 2.0 * std::numbers::pi * phase_cycles(omega, t);
    return {std::cos(angle), std::sin(angle)};
}

/// S(t) = sum a_w exp(2 pi i w t), direct summation.
inline cplx evaluate(std::span<const Mode> modes, double t) {
    cplx acc{};
    for (const auto& m : modes) acc += m.coeff * tone(m.omega, t);
    return acc;
}

/// Bandwidth-N signal with distinct integer frequencies in [-N/2, N/2).
class SparseSignal {
public:
    SparseSignal() = default;

    SparseSignal(std::int64_t n, std::vector<Mode> modes) : n_(n), modes_(std::move(modes)) {
        if (n <= 0 || n % 2 != 0) throw InvalidLength("bandwidth must be a positive even integer, got " + std::to_string(n));
        if (static_cast<std::int64_t>(modes_.size()) > n) throw InvalidSparsity("more modes than bandwidth");
        std::unordered_set<std::int64_t> seen;
        for (const auto& m : modes_) {
            if (m.omega < -n / 2 || m.omega >= n / 2)
                throw InvalidInput("frequency " + std::to_string(m.omega) + " outside [-N/2, N/2)");
            if (!seen.insert(m.omega).second) throw InvalidInput("duplicate frequency " + std::to_string(m.omega));
        }
    }

    [[nodiscard]] std::int64_t bandwidth() const noexcept { return n_; }
    [[nodiscard]] const std::vector<Mode>& modes() const noexcept { return modes_; }
    [[nodiscard]] std::size_t sparsity() const noexcept { return modes_.size(); }

private:
    std::int64_t n_ = 2;
    std::vector<Mode> modes_;
};

inline cplx evaluate(const SparseSignal& sig, double t) {
    return evaluate(std::span<const Mode>(sig.modes()), t);
}

/// Exact values of a mode list on the grid j/p + eps.
///
/// Few modes are summed directly against a table of p-th roots of unity.
/// Larger lists are binned by residue mod p, each bin carrying
/// a_w exp(2 pi i w eps), and synthesized with one inverse DFT; both paths
/// are exact up to rounding since exp(2 pi i w j/p) depends only on w mod p.
inline std::vector<cplx> synthesize_grid(std::span<const Mode> modes, std::size_t p, double eps) {
    if (p == 0) throw InvalidLength("grid length must be positive");
    std::vector<cplx> out(p);
    if (modes.empty()) return out;
    const auto up = static_cast<std::int64_t>(p);
    constexpr std::size_t kDirectLimit = 16;
    if (modes.size() <= kDirectLimit) {
        std::vector<cplx> roots(p);
        for (std::size_t r = 0; r < p; ++r) roots[r] = std::conj(detail::unit_root(r, p));
        for (const auto& m : modes) {
            const auto r = static_cast<std::uint64_t>(((m.omega % up) + up) % up);
            const cplx base = m.coeff * tone(m.omega, eps);
            std::uint64_t idx = 0;
            for (std::size_t j = 0; j < p; ++j) {
                out[j] += detail::mul(base, roots[idx]);
                idx += r;
                if (idx >= p) idx -= p;
            }
        }
        return out;
    }
    std::vector<cplx> bins(p);
    for (const auto& m : modes) {
        const auto r = static_cast<std::size_t>(((m.omega % up) + up) % up);
        bins[r] += m.coeff * tone(m.omega, eps);
    }
    return inverse_dft(bins);
}

/// Anything that can be evaluated at a time point, conceptually S(t) or a
/// residual of it. Sources are 1-periodic. Evaluation is deterministic; noise
/// is added by the sampler.
class SignalSource {
public:
    using PointFn = std::function<cplx(double)>;
    using GridFn = std::function<std::vector<cplx>(std::size_t, double)>;

    SignalSource() : SignalSource([](double) { return cplx{}; }) {}

    explicit SignalSource(PointFn point, GridFn grid = {}) : point_(std::move(point)), grid_(std::move(grid)) {}

    static SignalSource from_modes(std::vector<Mode> modes) {
        auto shared = std::make_shared<const std::vector<Mode>>(std::move(modes));
        return SignalSource([shared](double t) { return evaluate(std::span<const Mode>(*shared), t); },
                            [shared](std::size_t p, double eps) {
                                return synthesize_grid(std::span<const Mode>(*shared), p, eps);
                            });
    }

    static SignalSource from_signal(const SparseSignal& sig) { return from_modes(sig.modes()); }

    cplx operator()(double t) const { return point_(t); }

    /// Exact (noiseless) values at j/p + eps for j = 0..p-1.
    [[nodiscard]] std::vector<cplx> grid(std::size_t p, double eps) const {
        if (grid_) return grid_(p, eps);
        std::vector<cplx> out(p);
        for (std::size_t j = 0; j < p; ++j) out[j] = point_(static_cast<double>(j) / static_cast<double>(p) + eps);
        return out;
    }

private:
    PointFn point_;
    GridFn grid_;
};

/// k distinct frequencies uniform without replacement in [-n/2, n/2), with
/// coefficients uniform on the complex unit circle.
inline SparseSignal make_random_signal(std::int64_t n, std::int64_t k, Rng& rng) {
    if (n <= 0 || n % 2 != 0) throw InvalidLength("bandwidth must be a positive even integer");
    if (k <= 0 || k > n) throw InvalidSparsity("sparsity must satisfy 0 < k <= n (k=" + std::to_string(k) + ", n=" + std::to_string(n) + ")");

    // Floyd's sampling of k distinct values from [0, n).
    std::unordered_set<std::int64_t> chosen;
    std::vector<std::int64_t> order;
    order.reserve(static_cast<std::size_t>(k));
    for (std::int64_t j = n - k; j < n; ++j) {
        std::uniform_int_distribution<std::int64_t> pick(0, j);
        const std::int64_t t = pick(rng);
        const std::int64_t v = chosen.insert(t).second ? t : j;
        if (v == j) chosen.insert(j);
        order.push_back(v);
    }

    std::uniform_real_distribution<double> theta(0.0, 1.0);
    std::vector<Mode> modes;
    modes.reserve(order.size());
    for (auto v : order) {
        const double angle = 2.0 * std::numbers::pi * theta(rng);
        modes.push_back(Mode{v - n / 2, cplx{std::cos(angle), std::sin(angle)}});
    }
    return SparseSignal(n, std::move(modes));
}

/// src(j/p + eps) + n_j with n_j circular complex Gaussian of total variance
/// sigma^2. Fresh noise per call.
inline TimeSamples sample_grid(const SignalSource& src, std::size_t p, double eps, NoiseSpec noise, Rng& rng) {
    if (p == 0) throw InvalidLength("grid length must be positive");
    if (eps < 0.0) throw InvalidInput("shift must be nonnegative");
    if (noise.sigma < 0.0) throw InvalidInput("noise level must be nonnegative");
    TimeSamples out{src.grid(p, eps), eps, noise.sigma};
    if (noise.sigma > 0.0) {
        std::normal_distribution<double> component(0.0, noise.sigma / std::numbers::sqrt2);
        for (auto& v : out.values) {
            const double re = component(rng);
            const double im = component(rng);
            v += cplx{re, im};
        }
    }
    return out;
}

/// src minus the given modes, evaluated analytically on any grid.
inline SignalSource residual_source(const SignalSource& src, std::vector<Mode> found) {
    if (found.empty()) return src;
    auto shared = std::make_shared<const std::vector<Mode>>(std::move(found));
    return SignalSource([src, shared](double t) { return src(t) - evaluate(std::span<const Mode>(*shared), t); },
                        [src, shared](std::size_t p, double eps) {
                            auto base = src.grid(p, eps);
                            const auto sub = synthesize_grid(std::span<const Mode>(*shared), p, eps);
                            for (std::size_t j = 0; j < p; ++j) base[j] -= sub[j];
                            return base;
                        });
}

} // namespace sfft

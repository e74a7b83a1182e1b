#pragma once

// Length-generic discrete Fourier transforms, a quadratic reference transform
// and peak selection over spectra.
//
// Sign convention: X[h] = sum_j x[j] * exp(-2 pi i j h / p), unnormalized.

#include <algorithm>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <numbers>
#include <span>
#include <unordered_map>
#include <vector>

#include "sfft/errors.hpp"

namespace sfft {

using cplx = std::complex<double>;

/// Samples of a signal on the grid t_j = j/p + eps, j = 0..p-1.
struct TimeSamples {
    std::vector<cplx> values;
    double eps = 0.0;
    double sigma = 0.0;

    [[nodiscard]] std::size_t size() const noexcept { return values.size(); }
};

/// Length-p DFT of a TimeSamples grid; bin h holds frequencies congruent to h mod p.
struct Spectrum {
    std::vector<cplx> coeffs;
    double eps = 0.0;

    [[nodiscard]] std::size_t size() const noexcept { return coeffs.size(); }
};

namespace detail {

/// Plain complex product. std::complex's operator* carries an Annex G
/// infinity-recovery branch that blocks vectorization of the hot loops.
inline cplx mul(cplx a, cplx b) {
    return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

/// exp(-2 pi i num / den) with the argument reduced exactly in integers.
inline cplx unit_root(std::uint64_t num, std::uint64_t den) {
    const double angle = -2.0 * std::numbers::pi * static_cast<double>(num % den) / static_cast<double>(den);
    return {std::cos(angle), std::sin(angle)};
}

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline std::size_t next_pow2(std::size_t n) {
    std::size_t m = 1;
    while (m < n) m <<= 1;
    return m;
}

// Iterative in-place radix-2 Cooley-Tukey.
class Radix2Plan {
public:
    explicit Radix2Plan(std::size_t n) : n_(n), twiddles_(n / 2), bitrev_(n) {
        for (std::size_t k = 0; k < n / 2; ++k) twiddles_[k] = unit_root(k, n);
        std::size_t bits = 0;
        while ((std::size_t{1} << bits) < n) ++bits;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t r = 0;
            for (std::size_t b = 0; b < bits; ++b)
                if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (bits - 1 - b);
            bitrev_[i] = r;
        }
    }

    [[nodiscard]] std::size_t size() const noexcept { return n_; }

    void forward(std::span<cplx> a) const {
        for (std::size_t i = 0; i < n_; ++i)
            if (i < bitrev_[i]) std::swap(a[i], a[bitrev_[i]]);
        for (std::size_t len = 2; len <= n_; len <<= 1) {
            const std::size_t half = len / 2;
            const std::size_t step = n_ / len;
            for (std::size_t start = 0; start < n_; start += len) {
                for (std::size_t j = 0; j < half; ++j) {
                    const cplx v = mul(a[start + j + half], twiddles_[j * step]);
                    const cplx u = a[start + j];
                    a[start + j] = u + v;
                    a[start + j + half] = u - v;
                }
            }
        }
    }

private:
    std::size_t n_;
    std::vector<cplx> twiddles_;
    std::vector<std::size_t> bitrev_;
};

/// Per-thread cache of power-of-two plans, shared by chirp-z plans of equal padding.
inline std::shared_ptr<const Radix2Plan> radix2_plan(std::size_t n) {
    thread_local std::unordered_map<std::size_t, std::shared_ptr<const Radix2Plan>> cache;
    if (auto it = cache.find(n); it != cache.end()) return it->second;
    auto plan = std::make_shared<const Radix2Plan>(n);
    cache.emplace(n, plan);
    return plan;
}

// Chirp-z reindexing of an arbitrary-length DFT as a power-of-two circular
// convolution. The chirp exponent j^2 is reduced mod 2n in integers.
class BluesteinPlan {
public:
    explicit BluesteinPlan(std::size_t n) : n_(n), inner_(radix2_plan(next_pow2(2 * n - 1))), chirp_(n) {
        const std::size_t m = inner_->size();
        for (std::size_t j = 0; j < n; ++j) {
            const std::uint64_t jj = (static_cast<std::uint64_t>(j) * j) % (2 * n);
            chirp_[j] = unit_root(jj, 2 * n); // exp(-pi i j^2 / n)
        }
        kernel_.assign(m, cplx{});
        kernel_[0] = std::conj(chirp_[0]);
        for (std::size_t j = 1; j < n; ++j) {
            kernel_[j] = std::conj(chirp_[j]);
            kernel_[m - j] = std::conj(chirp_[j]);
        }
        inner_->forward(kernel_);
        const double scale = 1.0 / static_cast<double>(m);
        for (auto& v : kernel_) v *= scale;
    }

    void forward(std::span<const cplx> in, std::span<cplx> out) const {
        const std::size_t m = inner_->size();
        std::vector<cplx> work(m);
        for (std::size_t j = 0; j < n_; ++j) work[j] = mul(in[j], chirp_[j]);
        inner_->forward(work);
        // inverse transform through conjugation
        for (std::size_t i = 0; i < m; ++i) work[i] = std::conj(mul(work[i], kernel_[i]));
        inner_->forward(work);
        for (std::size_t k = 0; k < n_; ++k) out[k] = mul(std::conj(work[k]), chirp_[k]);
    }

private:
    std::size_t n_;
    std::shared_ptr<const Radix2Plan> inner_;
    std::vector<cplx> chirp_;
    std::vector<cplx> kernel_;
};

class DftPlan {
public:
    explicit DftPlan(std::size_t n) : n_(n) {
        if (is_pow2(n))
            radix2_ = radix2_plan(n);
        else
            bluestein_ = std::make_unique<BluesteinPlan>(n);
    }

    void forward(std::span<const cplx> in, std::span<cplx> out) const {
        if (radix2_) {
            std::copy(in.begin(), in.end(), out.begin());
            radix2_->forward(out);
        } else {
            bluestein_->forward(in, out);
        }
    }

    [[nodiscard]] std::size_t size() const noexcept { return n_; }

private:
    std::size_t n_;
    std::shared_ptr<const Radix2Plan> radix2_;
    std::unique_ptr<BluesteinPlan> bluestein_;
};

/// Per-thread plan cache; plans are never shared across threads.
inline const DftPlan& plan_for(std::size_t n) {
    thread_local std::unordered_map<std::size_t, std::shared_ptr<const DftPlan>> cache;
    if (auto it = cache.find(n); it != cache.end()) return *it->second;
    if (cache.size() >= 64) cache.clear();
    auto plan = std::make_shared<const DftPlan>(n);
    const DftPlan& ref = *plan;
    cache.emplace(n, std::move(plan));
    return ref;
}

} // namespace detail

/// Forward DFT of any length in O(p log p).
inline std::vector<cplx> dft(std::span<const cplx> values) {
    std::vector<cplx> out(values.size());
    if (values.empty()) return out;
    if (values.size() == 1) {
        out[0] = values[0];
        return out;
    }
    detail::plan_for(values.size()).forward(values, out);
    return out;
}

inline Spectrum dft(const TimeSamples& samples) {
    return Spectrum{dft(std::span<const cplx>(samples.values)), samples.eps};
}

/// Unnormalized inverse: x[j] = sum_h X[h] exp(+2 pi i j h / p).
inline std::vector<cplx> inverse_dft(std::span<const cplx> coeffs) {
    std::vector<cplx> tmp(coeffs.size());
    std::transform(coeffs.begin(), coeffs.end(), tmp.begin(), [](cplx c) { return std::conj(c); });
    auto out = dft(std::span<const cplx>(tmp));
    for (auto& v : out) v = std::conj(v);
    return out;
}

inline constexpr std::size_t kBruteDftMaxLength = std::size_t{1} << 16;

/// Direct O(p^2) evaluation, used as a reference for the fast transform.
inline Spectrum brute_dft(const TimeSamples& samples) {
    const std::size_t p = samples.size();
    if (p > kBruteDftMaxLength) throw OracleSize("brute_dft: length " + std::to_string(p) + " exceeds 2^16");
    Spectrum out{std::vector<cplx>(p), samples.eps};
    for (std::size_t h = 0; h < p; ++h) {
        cplx acc{};
        for (std::size_t j = 0; j < p; ++j)
            acc += samples.values[j] * detail::unit_root(static_cast<std::uint64_t>(j) * h, p);
        out.coeffs[h] = acc;
    }
    return out;
}

/// Single DFT bin in O(p).
inline cplx dft_bin(std::span<const cplx> values, std::size_t h) {
    const std::size_t p = values.size();
    cplx acc{};
    for (std::size_t j = 0; j < p; ++j) acc += values[j] * detail::unit_root(static_cast<std::uint64_t>(j) * h, p);
    return acc;
}

/// Indices of the `count` largest-magnitude bins strictly above `floor`,
/// largest first; equal magnitudes are ordered by smaller index.
inline std::vector<std::size_t> top_peaks(const Spectrum& spec, std::size_t count, double floor) {
    std::vector<std::pair<double, std::size_t>> cand;
    cand.reserve(spec.size());
    for (std::size_t h = 0; h < spec.size(); ++h) {
        const double mag = std::abs(spec.coeffs[h]);
        if (mag > floor) cand.emplace_back(mag, h);
    }
    const auto before = [](const auto& a, const auto& b) {
        return a.first > b.first || (a.first == b.first && a.second < b.second);
    };
    const std::size_t keep = std::min(count, cand.size());
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(keep), cand.end(), before);
    std::vector<std::size_t> out(keep);
    for (std::size_t i = 0; i < keep; ++i) out[i] = cand[i].second;
    return out;
}

} // namespace sfft

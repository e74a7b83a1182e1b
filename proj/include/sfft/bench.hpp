#pragma once

// Seeded Monte-Carlo experiment harness: random signals, recoveries, metrics,
// and CSV records. Trials are independent and may run on a worker pool.

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <mutex>
#include <ostream>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "sfft/errors.hpp"
#include "sfft/freq_estimate.hpp"
#include "sfft/metrics.hpp"
#include "sfft/recovery.hpp"
#include "sfft/signal_model.hpp"
#include "sfft/spectral.hpp"

namespace sfft {

struct ExperimentPlan {
    std::int64_t n = std::int64_t{1} << 20;
    std::vector<std::int64_t> k_values{16};
    std::vector<double> sigma_values{0.0};
    std::vector<Algorithm> algorithms{Algorithm::multiscale};
    int trials_per_cell = 100;
    std::uint64_t base_seed = 0;
    RecoveryConfig params; ///< c1, c2, c_sigma, beta, eta, eps0, max_peel_iters overrides
    bool baseline_dense = false;
    unsigned threads = 0; ///< 0 selects hardware concurrency

    void validate() const {
        if (trials_per_cell < 1) throw InvalidInput("trials per cell must be at least 1");
        if (k_values.empty() || sigma_values.empty() || algorithms.empty()) throw InvalidInput("sweep grids must be nonempty");
        for (auto k : k_values)
            if (k <= 0 || k > n) throw InvalidSparsity("sparsity " + std::to_string(k) + " outside (0, n]");
        for (auto s : sigma_values)
            if (s < 0.0) throw InvalidInput("noise levels must be nonnegative");
    }
};

struct TrialRecord {
    std::string algorithm;
    std::int64_t n = 0;
    std::int64_t k = 0;
    double sigma = 0.0;
    int trial = 0;
    std::uint64_t seed = 0;
    double emd1 = 0.0;
    double emd_omega = 0.0;
    double l2 = 0.0;
    std::int64_t runtime_ns = 0;
    std::uint64_t samples_used = 0;
    int peel_iterations = 0;
    int spurious_inserted = 0;
    int spurious_deleted = 0;
};

struct TrialOutcome {
    TrialRecord record;
    SparseSignal truth;
    std::vector<Mode> recovered;
    bool complete = true;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// base_seed + stable hash of (n, k, sigma, trial). The algorithm is left out
/// so every algorithm in a cell faces the same signals and noise streams.
inline std::uint64_t trial_seed(std::uint64_t base_seed, std::int64_t n, std::int64_t k, double sigma, int trial) {
    std::uint64_t h = splitmix64(static_cast<std::uint64_t>(n));
    h = splitmix64(h ^ static_cast<std::uint64_t>(k));
    h = splitmix64(h ^ std::bit_cast<std::uint64_t>(sigma));
    h = splitmix64(h ^ static_cast<std::uint64_t>(trial));
    return base_seed + h;
}

/// Full-length transform followed by top-k peak picking. A reference point
/// for runtime only; it is not a sublinear method.
inline RecoveryResult recover_dense(const SignalSource& src, const RecoveryConfig& cfg) {
    cfg.validate();
    Rng rng(cfg.seed);
    const auto n = static_cast<std::size_t>(cfg.n);
    const TimeSamples samples = sample_grid(src, n, 0.0, NoiseSpec{cfg.sigma}, rng);
    const auto t0 = std::chrono::steady_clock::now();
    const Spectrum spec = dft(samples);
    const auto peaks = top_peaks(spec, static_cast<std::size_t>(cfg.k), 0.0);
    RecoveryResult res;
    for (auto h : peaks) {
        auto omega = static_cast<std::int64_t>(h);
        if (omega >= cfg.n / 2) omega -= cfg.n;
        res.modes.push_back(Mode{omega, spec.coeffs[h] / static_cast<double>(n)});
    }
    std::sort(res.modes.begin(), res.modes.end(), [](const Mode& a, const Mode& b) { return a.omega < b.omega; });
    res.runtime = std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - t0);
    res.samples_used = n;
    res.peel_iterations = 1;
    res.complete = true;
    return res;
}

/// One seeded trial: signal from `seed`, noise stream from a derived seed.
inline TrialOutcome run_trial(std::string_view algorithm, std::int64_t n, std::int64_t k, double sigma, int trial,
                              std::uint64_t seed, const RecoveryConfig& params) {
    Rng rng(seed);
    TrialOutcome out;
    out.truth = make_random_signal(n, k, rng);
    RecoveryConfig cfg = params;
    cfg.n = n;
    cfg.k = k;
    cfg.sigma = sigma;
    cfg.seed = splitmix64(seed ^ 0x5eed5eed5eed5eedULL);
    const SignalSource src = SignalSource::from_signal(out.truth);
    RecoveryResult res;
    if (algorithm == "dense") {
        res = recover_dense(src, cfg);
    } else {
        cfg.algorithm = parse_algorithm(algorithm);
        res = recover(src, cfg);
    }
    const auto report = compare_modes(out.truth.modes(), res.modes, n);
    out.recovered = res.modes;
    out.complete = res.complete;
    out.record = TrialRecord{std::string(algorithm), n, k, sigma, trial, seed, report.emd1, report.emd_omega, report.l2,
                             static_cast<std::int64_t>(res.runtime.count()), res.samples_used, res.peel_iterations,
                             res.spurious_inserted, res.spurious_deleted};
    return out;
}

/// emd_omega == 0 must mean the recovered frequency set is exactly the truth.
inline bool audit_trial(const TrialOutcome& t) {
    if (t.record.emd_omega != 0.0) return true;
    std::set<std::int64_t> truth, got;
    for (const auto& m : t.truth.modes()) truth.insert(m.omega);
    for (const auto& m : t.recovered) got.insert(m.omega);
    return truth == got;
}

inline std::string csv_header() {
    return "algorithm,n,k,sigma,trial,seed,emd1,emd_omega,l2,runtime_ns,samples_used,peel_iterations,"
           "spurious_inserted,spurious_deleted";
}

inline std::string to_csv_row(const TrialRecord& r) {
    std::ostringstream os;
    os << std::setprecision(17);
    os << r.algorithm << ',' << r.n << ',' << r.k << ',' << r.sigma << ',' << r.trial << ',' << r.seed << ',' << r.emd1
       << ',' << r.emd_omega << ',' << r.l2 << ',' << r.runtime_ns << ',' << r.samples_used << ',' << r.peel_iterations
       << ',' << r.spurious_inserted << ',' << r.spurious_deleted;
    return os.str();
}

/// Serializes whole rows from concurrent workers.
class CsvSink {
public:
    explicit CsvSink(std::ostream& out) : out_(out) {}

    void header() {
        std::lock_guard lock(mu_);
        out_ << csv_header() << '\n';
    }

    void write(const TrialRecord& r) {
        const std::string row = to_csv_row(r);
        std::lock_guard lock(mu_);
        out_ << row << '\n';
    }

private:
    std::ostream& out_;
    std::mutex mu_;
};

struct BenchSummary {
    std::size_t trials = 0;
    std::size_t audit_failures = 0;
    std::size_t incomplete = 0;
};

/// Runs every (algorithm, k, sigma, trial) cell, streaming rows to `sink`.
inline BenchSummary run_plan(const ExperimentPlan& plan, CsvSink& sink, bool audit = false) {
    plan.validate();
    struct Job {
        std::string algorithm;
        std::int64_t k;
        double sigma;
        int trial;
    };
    std::vector<Job> jobs;
    std::vector<std::string> algos;
    for (auto a : plan.algorithms) algos.emplace_back(to_string(a));
    if (plan.baseline_dense) algos.emplace_back("dense");
    for (const auto& a : algos)
        for (auto k : plan.k_values)
            for (auto s : plan.sigma_values)
                for (int t = 0; t < plan.trials_per_cell; ++t) jobs.push_back(Job{a, k, s, t});

    sink.header();
    BenchSummary summary;
    std::mutex summary_mu;
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) {
            const Job& job = jobs[i];
            const auto seed = trial_seed(plan.base_seed, plan.n, job.k, job.sigma, job.trial);
            const auto outcome = run_trial(job.algorithm, plan.n, job.k, job.sigma, job.trial, seed, plan.params);
            sink.write(outcome.record);
            std::lock_guard lock(summary_mu);
            ++summary.trials;
            if (!outcome.complete) ++summary.incomplete;
            if (audit && !audit_trial(outcome)) ++summary.audit_failures;
        }
    };
    unsigned threads = plan.threads != 0 ? plan.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(jobs.size(), 1)));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    return summary;
}

// ---------------------------------------------------------------------------
// Single-tone phase-error sweep over (sigma, p).

struct PhaseSweepPlan {
    std::int64_t n = std::int64_t{1} << 20;
    std::vector<double> sigmas;
    std::vector<std::size_t> ps;
    int trials = 1000;
    std::uint64_t seed = 0;
    /// Draw and transform full noisy grids. Otherwise the noise in bin h is
    /// drawn directly: the DFT of p i.i.d. CN(0, sigma^2) samples at one bin is
    /// exactly CN(0, p sigma^2), so both modes sample the same distribution.
    bool full_sampling = false;
};

struct PhaseSweepCell {
    double sigma = 0.0;
    std::size_t p = 0;
    double boundary_p = 0.0; ///< (2 sigma / eps)^(2/3)
    double direct_mean_err = 0.0;
    double rounded_mean_err = 0.0;
    double rounded_exact_fraction = 0.0;
};

inline PhaseSweepCell run_phase_cell(std::int64_t n, double sigma, std::size_t p, int trials, std::uint64_t seed,
                                     bool full_sampling) {
    if (p == 0) throw InvalidLength("p must be positive");
    if (trials < 1) throw InvalidInput("trials must be at least 1");
    const double eps = 0.5 / static_cast<double>(n);
    const auto ip = static_cast<std::int64_t>(p);
    const double pd = static_cast<double>(p);
    Rng rng(seed);
    std::uniform_int_distribution<std::int64_t> pick(-n / 2, n / 2 - 1);
    std::normal_distribution<double> bin_noise(0.0, sigma * std::sqrt(pd / 2.0));

    PhaseSweepCell cell{sigma, p, std::cbrt(std::pow(2.0 * sigma / eps, 2.0)), 0.0, 0.0, 0.0};
    double direct_sum = 0.0, rounded_sum = 0.0;
    int exact = 0;
    for (int t = 0; t < trials; ++t) {
        const std::int64_t omega = pick(rng);
        const auto h = static_cast<std::size_t>(((omega % ip) + ip) % ip);
        cplx s0, se;
        if (full_sampling) {
            const SignalSource src = SignalSource::from_modes({Mode{omega, cplx{1.0, 0.0}}});
            s0 = dft_bin(sample_grid(src, p, 0.0, NoiseSpec{sigma}, rng).values, h);
            se = dft_bin(sample_grid(src, p, eps, NoiseSpec{sigma}, rng).values, h);
        } else {
            s0 = pd;
            se = pd * tone(omega, eps);
            if (sigma > 0.0) {
                s0 += cplx{bin_noise(rng), bin_noise(rng)};
                se += cplx{bin_noise(rng), bin_noise(rng)};
            }
        }
        if (s0 == cplx{}) s0 = cplx{std::numeric_limits<double>::min(), 0.0};
        const double direct = estimate_direct(phase_reading(s0, se, eps, h));
        const std::int64_t rounded = round_to_residue(direct, static_cast<std::int64_t>(h), ip);
        direct_sum += std::abs(direct - static_cast<double>(omega));
        const double rerr = std::abs(static_cast<double>(rounded - omega));
        rounded_sum += rerr;
        if (rerr == 0.0) ++exact;
    }
    cell.direct_mean_err = direct_sum / trials;
    cell.rounded_mean_err = rounded_sum / trials;
    cell.rounded_exact_fraction = static_cast<double>(exact) / trials;
    return cell;
}

inline std::vector<PhaseSweepCell> run_phase_sweep(const PhaseSweepPlan& plan) {
    if (plan.sigmas.empty() || plan.ps.empty()) throw InvalidInput("phase sweep grids must be nonempty");
    std::vector<PhaseSweepCell> cells;
    for (double s : plan.sigmas) {
        for (auto p : plan.ps) {
            const auto seed = trial_seed(plan.seed, plan.n, static_cast<std::int64_t>(p), s, 0);
            cells.push_back(run_phase_cell(plan.n, s, p, plan.trials, seed, plan.full_sampling));
        }
    }
    return cells;
}

inline std::string phase_csv_header() { return "sigma,p,boundary_p,direct_mean_err,rounded_mean_err,rounded_exact_fraction"; }

inline std::string to_csv_row(const PhaseSweepCell& c) {
    std::ostringstream os;
    os << std::setprecision(17) << c.sigma << ',' << c.p << ',' << c.boundary_p << ',' << c.direct_mean_err << ','
       << c.rounded_mean_err << ',' << c.rounded_exact_fraction;
    return os.str();
}

/// Default grids: sigma = 2.5e-5 * 2^i and p = 10 * 2^j, i, j = 0..14.
inline std::vector<double> default_phase_sigmas() {
    std::vector<double> out;
    for (int i = 0; i <= 14; ++i) out.push_back(2.5e-5 * std::ldexp(1.0, i));
    return out;
}

inline std::vector<std::size_t> default_phase_ps() {
    std::vector<std::size_t> out;
    for (int j = 0; j <= 14; ++j) out.push_back(std::size_t{10} << j);
    return out;
}

/// Least-squares slope of y on x.
inline double ols_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw InvalidInput("regression needs at least two paired points");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(y.size());
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

/// Least-squares fit z = a + bx*x + by*y; returns {bx, by}.
inline std::pair<double, double> ols_plane(std::span<const double> x, std::span<const double> y, std::span<const double> z) {
    const std::size_t n = x.size();
    if (y.size() != n || z.size() != n || n < 3) throw InvalidInput("plane fit needs at least three points");
    double mx = 0, my = 0, mz = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
        mz += z[i];
    }
    mx /= n;
    my /= n;
    mz /= n;
    double sxx = 0, syy = 0, sxy = 0, sxz = 0, syz = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx, dy = y[i] - my, dz = z[i] - mz;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
        sxz += dx * dz;
        syz += dy * dz;
    }
    const double det = sxx * syy - sxy * sxy;
    if (det == 0.0) throw InvalidInput("degenerate plane fit");
    return {(sxz * syy - syz * sxy) / det, (syz * sxx - sxz * sxy) / det};
}

} // namespace sfft

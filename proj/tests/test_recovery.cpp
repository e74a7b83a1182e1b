#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <set>
#include <vector>

#include "sfft/metrics.hpp"
#include "sfft/recovery.hpp"

using sfft::Algorithm;
using sfft::Mode;

namespace {

// Sieve-based primality, independent of sfft::is_prime.
std::uint64_t oracle_next_prime(double x) {
    const auto lo = static_cast<std::uint64_t>(std::floor(x)) + 1;
    const std::uint64_t hi = 2 * lo + 10;
    std::vector<bool> composite(hi + 1, false);
    composite[0] = composite[1] = true;
    for (std::uint64_t i = 2; i * i <= hi; ++i)
        if (!composite[i])
            for (std::uint64_t j = i * i; j <= hi; j += i) composite[j] = true;
    for (std::uint64_t c = lo; c <= hi; ++c)
        if (!composite[c]) return c;
    return 0;
}

sfft::RecoveryConfig config(Algorithm algo, std::int64_t n, std::int64_t k, double sigma, std::uint64_t seed) {
    sfft::RecoveryConfig cfg;
    cfg.algorithm = algo;
    cfg.n = n;
    cfg.k = k;
    cfg.sigma = sigma;
    cfg.seed = seed;
    return cfg;
}

std::vector<Mode> sorted_truth(const sfft::SparseSignal& sig) {
    auto m = sig.modes();
    std::sort(m.begin(), m.end(), [](const Mode& a, const Mode& b) { return a.omega < b.omega; });
    return m;
}

std::int64_t mod(std::int64_t a, std::int64_t p) { return ((a % p) + p) % p; }

} // namespace

TEST(NextPrime, Examples) {
    EXPECT_EQ(sfft::next_prime(20), 23u);
    EXPECT_EQ(sfft::next_prime(1), 2u);
    EXPECT_EQ(sfft::next_prime(512), oracle_next_prime(512));
    EXPECT_EQ(sfft::next_prime(512), 521u);
    EXPECT_EQ(sfft::next_prime(23), 29u); // strictly greater
    EXPECT_EQ(sfft::next_prime(0), 2u);
    EXPECT_THROW(sfft::next_prime(-1), sfft::InvalidInput);
    for (double x = 0; x < 5000; x += 7.3) EXPECT_EQ(sfft::next_prime(x), oracle_next_prime(x)) << x;
}

TEST(ChooseP, Rounding) {
    auto cfg = config(Algorithm::rounding, 1 << 22, 10, 0.0, 0);
    EXPECT_EQ(sfft::choose_p_rounding(cfg, 10), 23u);

    cfg.sigma = 0.512;
    cfg.eps0 = std::ldexp(1.0, -23);
    const double bound = 4.0 * std::pow(0.512 * std::ldexp(1.0, 23), 2.0 / 3.0);
    EXPECT_EQ(sfft::choose_p_rounding(cfg, 10), oracle_next_prime(bound));

    cfg.sigma = 1e-12;
    EXPECT_EQ(sfft::choose_p_rounding(cfg, 1), 3u);
    EXPECT_THROW(sfft::choose_p_rounding(cfg, 0), sfft::InvalidInput);
}

TEST(ChooseP, Multiscale) {
    auto cfg = config(Algorithm::multiscale, 1 << 20, 64, 0.0, 0);
    EXPECT_EQ(sfft::choose_p_multiscale(cfg, 64), oracle_next_prime(128));
    EXPECT_EQ(sfft::choose_p_multiscale(cfg, 256), 521u);

    cfg.sigma = 0.512;
    const double root = 2.5 * 3.5 * 6.0 * 0.512 / std::numbers::pi;
    EXPECT_EQ(sfft::choose_p_multiscale(cfg, 1), oracle_next_prime(root * root));
    cfg.sigma = 1e-6;
    EXPECT_EQ(sfft::choose_p_multiscale(cfg, 256), 521u);
}

TEST(NumShifts, Examples) {
    auto cfg = config(Algorithm::multiscale, std::int64_t{1} << 22, 1, 0.0, 0);
    cfg.eps0 = std::ldexp(1.0, -23);
    const double delta = 1.0 / 7.0;
    EXPECT_NEAR(sfft::ShiftSchedule::admissible_delta(cfg.n, cfg.eps0, cfg.beta), delta, 1e-15);
    const int m = sfft::num_shifts(521, cfg);
    const int formula = static_cast<int>(std::floor(std::log(2 * delta / (521 * cfg.eps0)) / std::log(2.5))) + 1;
    EXPECT_EQ(m, formula);
    EXPECT_EQ(m, 10);
    EXPECT_LT(delta / cfg.eps0 * std::pow(2.5, -m), 521 / 2.0);
    EXPECT_GE(delta / cfg.eps0 * std::pow(2.5, -(m - 1)), 521 / 2.0);

    // p * eps0 >= 2 delta: the base reading alone localizes within p/2
    auto small = config(Algorithm::multiscale, 1024, 1, 0.0, 0);
    EXPECT_EQ(sfft::num_shifts(1031, small), 0);
    EXPECT_EQ(sfft::num_shifts(100000, small), 0);
}

TEST(NumShifts, DoublingBandwidthAddsAtMostOneLevelPerLog2Beta) {
    const int cap = static_cast<int>(std::ceil(1.0 / std::log2(2.5)));
    for (std::size_t p : {3u, 131u, 521u, 4099u}) {
        int prev = -1;
        for (int e = 10; e <= 24; ++e) {
            const int m = sfft::num_shifts(p, config(Algorithm::multiscale, std::int64_t{1} << e, 1, 0.0, 0));
            if (prev >= 0) {
                EXPECT_GE(m, prev);
                EXPECT_LE(m - prev, cap);
            }
            prev = m;
        }
    }
}

TEST(Recover, NoiselessSixteenModes) {
    for (Algorithm algo : {Algorithm::multiscale, Algorithm::rounding}) {
        sfft::Rng rng(16);
        const auto sig = sfft::make_random_signal(1 << 20, 16, rng);
        const auto res = sfft::recover(sfft::SignalSource::from_signal(sig), config(algo, 1 << 20, 16, 0.0, 1));
        const auto truth = sorted_truth(sig);
        ASSERT_EQ(res.modes.size(), truth.size());
        for (std::size_t i = 0; i < truth.size(); ++i) {
            EXPECT_EQ(res.modes[i].omega, truth[i].omega);
            EXPECT_LT(std::abs(res.modes[i].coeff - truth[i].coeff), 1e-9);
        }
        EXPECT_TRUE(res.complete);
        EXPECT_EQ(res.spurious_inserted, 0);
    }
}

TEST(Recover, NoiselessCompleteness) {
    for (Algorithm algo : {Algorithm::multiscale, Algorithm::rounding}) {
        for (std::int64_t n : {std::int64_t{1} << 8, std::int64_t{1} << 14, std::int64_t{1} << 20}) {
            for (std::int64_t k : {1, 7, 33, 64}) {
                for (std::uint64_t seed = 0; seed < 100; ++seed) {
                    sfft::Rng rng(seed * 7919 + static_cast<std::uint64_t>(k));
                    const auto sig = sfft::make_random_signal(n, k, rng);
                    const auto res = sfft::recover(sfft::SignalSource::from_signal(sig), config(algo, n, k, 0.0, seed));
                    const auto truth = sorted_truth(sig);
                    ASSERT_EQ(res.modes.size(), truth.size()) << "n=" << n << " k=" << k << " seed=" << seed;
                    for (std::size_t i = 0; i < truth.size(); ++i) ASSERT_EQ(res.modes[i].omega, truth[i].omega);
                }
            }
        }
    }
}

TEST(Recover, ModerateNoiseSixtyFourModes) {
    int exact = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        sfft::Rng rng(seed);
        const auto sig = sfft::make_random_signal(1 << 20, 64, rng);
        const auto res = sfft::recover_multiscale(sfft::SignalSource::from_signal(sig),
                                                  config(Algorithm::multiscale, 1 << 20, 64, 0.1, seed + 500));
        if (sfft::compare_modes(sig.modes(), res.modes, 1 << 20).emd_omega == 0.0) ++exact;
    }
    EXPECT_GE(exact, 95);
}

TEST(Recover, SingleNoisyMode) {
    const double sigma = 0.01;
    int within = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        sfft::Rng rng(seed);
        const auto sig = sfft::make_random_signal(1 << 20, 1, rng);
        const auto res = sfft::recover(sfft::SignalSource::from_signal(sig), config(Algorithm::multiscale, 1 << 20, 1, sigma, seed));
        ASSERT_EQ(res.modes.size(), 1u);
        ASSERT_EQ(res.modes[0].omega, sig.modes()[0].omega);
        ASSERT_EQ(res.discoveries.size(), 1u);
        const double p = static_cast<double>(res.discoveries[0].p);
        if (std::abs(res.modes[0].coeff - sig.modes()[0].coeff) <= 4 * sigma / std::sqrt(p)) ++within;
    }
    EXPECT_GE(within, 190);
}

TEST(Recover, RoundingHighNoiseManyModes) {
    int exact = 0;
    const int trials = 40;
    for (int seed = 0; seed < trials; ++seed) {
        sfft::Rng rng(static_cast<std::uint64_t>(seed));
        const auto sig = sfft::make_random_signal(1 << 20, 256, rng);
        const auto res = sfft::recover_rounding(sfft::SignalSource::from_signal(sig),
                                                config(Algorithm::rounding, 1 << 20, 256, 0.512, static_cast<std::uint64_t>(seed)));
        if (sfft::compare_modes(sig.modes(), res.modes, 1 << 20).emd_omega == 0.0) ++exact;
    }
    EXPECT_GE(exact, static_cast<int>(std::ceil(0.95 * trials)));
}

TEST(Recover, DiscoveriesRespectVotesResiduesAndPrimes) {
    for (Algorithm algo : {Algorithm::multiscale, Algorithm::rounding}) {
        for (double sigma : {0.0, 0.064, 0.512}) {
            for (std::uint64_t seed = 0; seed < 10; ++seed) {
                sfft::Rng rng(seed);
                auto cfg = config(algo, 1 << 20, 128, sigma, seed);
                const auto sig = sfft::make_random_signal(cfg.n, cfg.k, rng);
                const auto res = sfft::recover(sfft::SignalSource::from_signal(sig), cfg);

                std::set<std::size_t> primes;
                for (const auto& peel : res.peels) {
                    EXPECT_TRUE(sfft::is_prime(peel.p));
                    EXPECT_TRUE(primes.insert(peel.p).second) << "prime reused: " << peel.p;
                }
                for (const auto& d : res.discoveries) {
                    EXPECT_LE(d.votes, static_cast<int>(std::floor(cfg.eta * (d.levels + 1))));
                    if (algo == Algorithm::rounding) {
                        EXPECT_EQ(d.votes, 0);
                    }
                    EXPECT_EQ(mod(d.omega, static_cast<std::int64_t>(d.p)), static_cast<std::int64_t>(d.h));
                }
                // every returned frequency traces back to some discovery
                for (const auto& m : res.modes)
                    EXPECT_TRUE(std::any_of(res.discoveries.begin(), res.discoveries.end(),
                                            [&](const sfft::Discovery& d) { return d.omega == m.omega; }));
                EXPECT_EQ(res.spurious_inserted, res.spurious_deleted);
                EXPECT_GE(res.spurious_deleted, 0);
            }
        }
    }
}

// Counts every sample the algorithm asks for through the source itself.
TEST(Recover, SampleAccountingIsExact) {
    for (Algorithm algo : {Algorithm::multiscale, Algorithm::rounding}) {
        for (double sigma : {0.0, 0.128}) {
            sfft::Rng rng(3);
            const auto sig = sfft::make_random_signal(1 << 20, 64, rng);
            const auto inner = sfft::SignalSource::from_signal(sig);
            auto drawn = std::make_shared<std::uint64_t>(0);
            const sfft::SignalSource counting([inner](double t) { return inner(t); },
                                              [inner, drawn](std::size_t p, double eps) {
                                                  *drawn += p;
                                                  return inner.grid(p, eps);
                                              });
            const auto res = sfft::recover(counting, config(algo, 1 << 20, 64, sigma, 9));
            EXPECT_EQ(res.samples_used, *drawn);

            std::uint64_t by_formula = 0;
            for (const auto& peel : res.peels) {
                const std::uint64_t grids = peel.peaks == 0 ? 1 : (algo == Algorithm::multiscale ? peel.levels + 2 : 2);
                if (peel.peaks > 0) {
                    EXPECT_EQ(peel.samples, grids * peel.p);
                }
                by_formula += grids * peel.p;
            }
            EXPECT_EQ(res.samples_used, by_formula);
        }
    }
}

TEST(Recover, PartialResultWhenIterationsRunOut) {
    sfft::Rng rng(4);
    const auto sig = sfft::make_random_signal(1 << 20, 64, rng);
    auto cfg = config(Algorithm::multiscale, 1 << 20, 64, 0.0, 1);
    cfg.max_peel_iters = 1;
    const auto res = sfft::recover(sfft::SignalSource::from_signal(sig), cfg);
    EXPECT_EQ(res.peel_iterations, 1);
    EXPECT_LT(res.modes.size(), 64u); // p = 131 for 64 modes: collisions are certain
    EXPECT_FALSE(res.complete);

    cfg.max_peel_iters = 64;
    EXPECT_TRUE(sfft::recover(sfft::SignalSource::from_signal(sig), cfg).complete);
}

// With the vote disabled, collided bins slip through as false modes; peeling
// must cancel them again and still land on the true mode set.
TEST(Recover, SpuriousModesAreCancelledByLaterPeels) {
    int inserted = 0, exact = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        sfft::Rng rng(seed);
        const auto sig = sfft::make_random_signal(1 << 20, 64, rng);
        auto cfg = config(Algorithm::multiscale, 1 << 20, 64, 0.0, seed);
        cfg.eta = 1.0;
        const auto res = sfft::recover(sfft::SignalSource::from_signal(sig), cfg);
        inserted += res.spurious_inserted;
        EXPECT_EQ(res.spurious_inserted, res.spurious_deleted);
        if (sfft::compare_modes(sig.modes(), res.modes, cfg.n).emd_omega == 0.0) ++exact;
    }
    EXPECT_GT(inserted, 0);
    EXPECT_GE(exact, 18);
}

// Rounds interleave all k so machine-wide slowdowns hit every k alike.
TEST(Recover, RuntimeScalesNearLinearlyInK) {
    const std::int64_t n = 1 << 20;
    const std::vector<std::int64_t> ks{16, 32, 64, 128, 256, 512};
    std::vector<std::vector<double>> times(ks.size());
    for (std::uint64_t round = 0; round < 15; ++round) {
        for (std::size_t i = 0; i < ks.size(); ++i) {
            sfft::Rng rng(round);
            const auto sig = sfft::make_random_signal(n, ks[i], rng);
            const auto res = sfft::recover(sfft::SignalSource::from_signal(sig), config(Algorithm::multiscale, n, ks[i], 0.01, round));
            times[i].push_back(static_cast<double>(res.runtime.count()));
        }
    }
    std::vector<double> medians;
    for (auto& t : times) {
        std::nth_element(t.begin(), t.begin() + 7, t.end());
        medians.push_back(t[7]);
    }
    for (std::size_t i = 1; i < ks.size(); ++i)
        EXPECT_LE(medians[i] / medians[i - 1], 2.6) << "k=" << ks[i] << " median " << medians[i] << " ns vs " << medians[i - 1] << " ns";
}

TEST(Recover, ConfigErrors) {
    const auto src = sfft::SignalSource::from_modes({{1, {1, 0}}});
    EXPECT_THROW(sfft::recover_rounding(src, config(Algorithm::multiscale, 1024, 1, 0.0, 0)), sfft::InvalidInput);
    EXPECT_THROW(sfft::recover_multiscale(src, config(Algorithm::rounding, 1024, 1, 0.0, 0)), sfft::InvalidInput);
    EXPECT_THROW(sfft::recover(src, config(Algorithm::multiscale, 1024, 2000, 0.0, 0)), sfft::InvalidSparsity);
    EXPECT_THROW(sfft::recover(src, config(Algorithm::multiscale, 1023, 1, 0.0, 0)), sfft::InvalidLength);
    auto bad = config(Algorithm::multiscale, 1024, 1, 0.0, 0);
    bad.beta = 1.0;
    EXPECT_THROW(sfft::recover(src, bad), sfft::InvalidInput);
    EXPECT_EQ(sfft::parse_algorithm("rounding"), Algorithm::rounding);
    EXPECT_THROW(sfft::parse_algorithm("fft"), sfft::InvalidInput);
}

TEST(Recover, DeterministicPerSeed) {
    sfft::Rng rng(5);
    const auto sig = sfft::make_random_signal(1 << 20, 32, rng);
    const auto cfg = config(Algorithm::multiscale, 1 << 20, 32, 0.2, 77);
    const auto a = sfft::recover(sfft::SignalSource::from_signal(sig), cfg);
    const auto b = sfft::recover(sfft::SignalSource::from_signal(sig), cfg);
    EXPECT_EQ(a.modes, b.modes);
    EXPECT_EQ(a.samples_used, b.samples_used);
}

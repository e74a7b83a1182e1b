// Command-line front end: signal generation, single recoveries, seeded
// benchmark sweeps and the single-tone phase-error sweep.

#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sfft/sfft.hpp"

namespace {

struct AlgoParams {
    double c1 = 2.0;
    double c2 = 4.0;
    double c_sigma = 6.0;
    double beta = 2.5;
    double eta = 0.25;
    double eps0 = 0.0;
    int max_peel_iters = 64;

    void apply(sfft::RecoveryConfig& cfg) const {
        cfg.c1 = c1;
        cfg.c2 = c2;
        cfg.c_sigma = c_sigma;
        cfg.beta = beta;
        cfg.eta = eta;
        cfg.eps0 = eps0;
        cfg.max_peel_iters = max_peel_iters;
    }
};

void add_param_flags(CLI::App* cmd, AlgoParams& p) {
    cmd->add_option("--c1", p.c1, "Sparsity multiplier in the lower bound on p")->capture_default_str();
    cmd->add_option("--c2", p.c2, "Noise multiplier for the rounding algorithm")->capture_default_str();
    cmd->add_option("--c-sigma", p.c_sigma, "Noise constant (p, collision threshold, peak floor)")->capture_default_str();
    cmd->add_option("--beta", p.beta, "Multiscale shift ratio")->capture_default_str();
    cmd->add_option("--eta", p.eta, "Tolerated fraction of failed collision tests")->capture_default_str();
    cmd->add_option("--eps0", p.eps0, "Base shift (0 selects 1/(2n))")->capture_default_str();
    cmd->add_option("--max-peel-iters", p.max_peel_iters, "Peeling iteration cap")->capture_default_str();
}

// Returns a stream for `path`, or stdout for "" / "-".
std::ostream& open_out(const std::string& path, std::unique_ptr<std::ofstream>& holder) {
    if (path.empty() || path == "-") return std::cout;
    holder = std::make_unique<std::ofstream>(path, std::ios::binary);
    if (!*holder) throw sfft::Error("cannot open '" + path + "' for writing");
    return *holder;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sparse Fourier recovery from noisy shifted samples"};
    app.require_subcommand(1);

    // gen
    std::int64_t gen_n = std::int64_t{1} << 20, gen_k = 16;
    std::uint64_t gen_seed = 0;
    std::string gen_out;
    auto* gen = app.add_subcommand("gen", "Write a random sparse signal as JSON");
    gen->add_option("--n", gen_n, "Bandwidth N (even)")->capture_default_str();
    gen->add_option("--k", gen_k, "Number of modes")->capture_default_str();
    gen->add_option("--seed", gen_seed, "RNG seed")->capture_default_str();
    gen->add_option("--out", gen_out, "Output path")->required();

    // recover
    std::string rec_signal, rec_algo = "multiscale";
    double rec_sigma = 0.0;
    std::uint64_t rec_seed = 0;
    bool rec_timing = false;
    AlgoParams rec_params;
    auto* rec = app.add_subcommand("recover", "Recover a signal file from noisy samples and report metrics as JSON");
    rec->add_option("signal", rec_signal, "Signal JSON file")->required();
    rec->add_option("--algo", rec_algo, "rounding | multiscale")
        ->check(CLI::IsMember({"rounding", "multiscale"}))
        ->capture_default_str();
    rec->add_option("--sigma", rec_sigma, "Noise standard deviation")->capture_default_str();
    rec->add_option("--seed", rec_seed, "Noise seed")->capture_default_str();
    rec->add_flag("--timing", rec_timing, "Include wall-clock runtime in the report");
    add_param_flags(rec, rec_params);

    // bench
    sfft::ExperimentPlan plan;
    std::vector<std::string> bench_algos{"multiscale"};
    std::string bench_out;
    bool bench_audit = false;
    AlgoParams bench_params;
    auto* bench = app.add_subcommand("bench", "Seeded (k, sigma) sweep; one CSV row per trial");
    bench->add_option("--n", plan.n, "Bandwidth N")->capture_default_str();
    bench->add_option("--k", plan.k_values, "Sparsity values")->delimiter(',')->capture_default_str();
    bench->add_option("--sigma", plan.sigma_values, "Noise levels")->delimiter(',')->capture_default_str();
    bench->add_option("--algo", bench_algos, "Algorithms")
        ->delimiter(',')
        ->check(CLI::IsMember({"rounding", "multiscale"}))
        ->capture_default_str();
    bench->add_option("--trials", plan.trials_per_cell, "Trials per cell")->capture_default_str();
    bench->add_option("--seed", plan.base_seed, "Base seed")->capture_default_str();
    bench->add_option("--threads", plan.threads, "Worker threads (0 = hardware)")->capture_default_str();
    bench->add_option("--out", bench_out, "CSV path (default stdout)");
    bench->add_flag("--baseline-dense", plan.baseline_dense,
                    "Also time a full-length transform with top-k picking (our own FFT; not comparable to vendor FFTs)");
    bench->add_flag("--audit", bench_audit, "Check that emd_omega = 0 rows recovered exactly the true frequency set");
    add_param_flags(bench, bench_params);

    // phase-sweep
    sfft::PhaseSweepPlan sweep;
    sweep.sigmas = sfft::default_phase_sigmas();
    sweep.ps = sfft::default_phase_ps();
    std::string sweep_out;
    auto* ps = app.add_subcommand("phase-sweep", "Single-tone direct vs rounded frequency error over a (sigma, p) grid");
    ps->add_option("--n", sweep.n, "Bandwidth N")->capture_default_str();
    ps->add_option("--sigma", sweep.sigmas, "Noise levels")->delimiter(',');
    ps->add_option("--p", sweep.ps, "Sample lengths")->delimiter(',');
    ps->add_option("--trials", sweep.trials, "Trials per cell")->capture_default_str();
    ps->add_option("--seed", sweep.seed, "Base seed")->capture_default_str();
    ps->add_option("--out", sweep_out, "CSV path (default stdout)");
    ps->add_flag("--full-sampling", sweep.full_sampling, "Draw and transform complete noisy grids");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            sfft::Rng rng(gen_seed);
            sfft::save_signal(sfft::make_random_signal(gen_n, gen_k, rng), gen_out);
        } else if (*rec) {
            const auto sig = sfft::load_signal(rec_signal);
            sfft::RecoveryConfig cfg;
            rec_params.apply(cfg);
            cfg.n = sig.bandwidth();
            cfg.k = static_cast<std::int64_t>(sig.sparsity());
            cfg.sigma = rec_sigma;
            cfg.seed = rec_seed;
            cfg.algorithm = sfft::parse_algorithm(rec_algo);
            const auto res = sfft::recover(sfft::SignalSource::from_signal(sig), cfg);
            const auto report = sfft::compare_modes(sig.modes(), res.modes, sig.bandwidth());
            nlohmann::json j{{"algorithm", rec_algo},
                             {"n", sig.bandwidth()},
                             {"k", cfg.k},
                             {"sigma", rec_sigma},
                             {"modes", sfft::modes_to_json(res.modes)},
                             {"emd1", report.emd1},
                             {"emd_omega", report.emd_omega},
                             {"l2", report.l2},
                             {"peel_iterations", res.peel_iterations},
                             {"samples_used", res.samples_used},
                             {"spurious_inserted", res.spurious_inserted},
                             {"spurious_deleted", res.spurious_deleted},
                             {"complete", res.complete}};
            if (rec_timing) j["runtime_ns"] = res.runtime.count();
            std::cout << j.dump(2) << '\n';
        } else if (*bench) {
            plan.algorithms.clear();
            for (const auto& a : bench_algos) plan.algorithms.push_back(sfft::parse_algorithm(a));
            bench_params.apply(plan.params);
            std::unique_ptr<std::ofstream> holder;
            std::ostream& out = open_out(bench_out, holder);
            sfft::CsvSink sink(out);
            const auto summary = sfft::run_plan(plan, sink, bench_audit);
            out.flush();
            if (summary.incomplete > 0)
                std::cerr << summary.incomplete << " of " << summary.trials << " trials hit the peeling cap\n";
            if (bench_audit) {
                std::cerr << "audit: " << summary.audit_failures << " inconsistent rows of " << summary.trials << '\n';
                if (summary.audit_failures > 0) return 3;
            }
        } else if (*ps) {
            std::unique_ptr<std::ofstream> holder;
            std::ostream& out = open_out(sweep_out, holder);
            out << sfft::phase_csv_header() << '\n';
            for (const auto& cell : sfft::run_phase_sweep(sweep)) out << sfft::to_csv_row(cell) << '\n';
        }
    } catch (const sfft::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}

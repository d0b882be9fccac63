// Command-line front end: computes Fisher-information reports, outcome
// tables, sampled event streams, and the reproducible studies, emitting
// ExperimentRecord rows as CSV or JSON lines.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "biphoton/biphoton.hpp"

namespace {

using namespace biphoton;
using experiments::ExperimentRecord;

constexpr const char* kColumnsNote =
    "All subcommands emit the same columns:\n"
    "  experiment,sigma,epsilon,d,n_pixels,nu,seed,statistic,value,std_error\n"
    "CSV metadata rows are prefixed with '#'. Floating-point values use the\n"
    "shortest decimal form that round-trips exactly.\n"
    "\n"
    "A config file (--config FILE) holds one 'key = value' per line with '#'\n"
    "comments; keys are the long flag names and command-line flags win.\n";

struct Cli {
    double sigma = 1.0;
    double epsilon = 1.0;
    double d = 0.0;
    bool d_given = false;
    std::vector<int> pixels;
    double extent = 10.0;
    std::int64_t nu = -1; // -1: use the subcommand default
    std::int64_t replications = -1;
    std::uint64_t seed = 0;
    bool seed_given = false;
    double snr_target = 1.0;
    std::string out_path;
    std::string format = "csv";
    numerics::QuadratureSpec quad;

    BiphotonModel model() const { return {sigma, epsilon, d}; }

    std::int64_t nu_or(std::int64_t fallback) const { return nu < 0 ? fallback : nu; }
    std::int64_t reps_or(std::int64_t fallback) const {
        return replications < 0 ? fallback : replications;
    }
};

std::vector<double> default_eps_grid(double sigma) {
    std::vector<double> grid(20);
    for (int k = 0; k < 20; ++k)
        grid[k] = sigma * std::pow(10.0, -2.0 + 2.0 * k / 19.0);
    grid.back() = sigma;
    return grid;
}

std::vector<std::int64_t> default_nu_grid() {
    return {10, 18, 32, 56, 100, 178, 316, 562, 1000, 1778, 3162, 5623,
            10000, 17783, 31623};
}

std::vector<double> default_weight_grid() {
    std::vector<double> grid;
    for (int k = 0; k <= 10; ++k) grid.push_back(0.1 * k);
    return grid;
}

void append_outcome_rows(std::vector<ExperimentRecord>& rows, const Cli& cli,
                         const OutcomeDistribution& dist, int n_pixels) {
    for (const Outcome& o : dist.outcomes)
        rows.push_back({"probabilities", cli.sigma, cli.epsilon, cli.d, n_pixels,
                        1, 0, "P[" + o.label + "]", o.probability, 0.0});
    for (const Outcome& o : dist.outcomes)
        rows.push_back({"probabilities", cli.sigma, cli.epsilon, cli.d, n_pixels,
                        1, 0, "dP[" + o.label + "]", o.d_derivative, 0.0});
}

ExperimentRecord fisher_row(const Cli& cli, const std::string& name, double value) {
    return {"fisher", cli.sigma, cli.epsilon, cli.d, 0, 1, 0, name, value, 0.0};
}

std::vector<ExperimentRecord> run_fisher(const Cli& cli) {
    const BiphotonModel m = cli.model();
    if (m.epsilon == 0.0)
        throw std::domain_error(
            "fisher: epsilon = 0 has unbounded information; see `probabilities` "
            "for the delta-limit outcome table");
    std::vector<ExperimentRecord> rows;
    rows.push_back(fisher_row(cli, "fisher_continuous", fisher_continuous(m).value));
    rows.push_back(fisher_row(cli, "fisher_marginal", fisher_marginal(m).value));
    rows.push_back(fisher_row(cli, "fisher_split", fisher_split(m).value));
    rows.push_back(fisher_row(cli, "fisher_split_exact_table",
                              fisher_discrete(split_probabilities_exact(m, cli.quad), 1).value));
    rows.push_back(fisher_row(cli, "qfi_numeric", qfi_numeric(m, cli.quad).value));
    rows.push_back(fisher_row(cli, "fisher_ratio_continuous",
                              fisher_ratio(m, Scheme::continuous)));
    rows.push_back(fisher_row(cli, "fisher_ratio_split", fisher_ratio(m, Scheme::split)));
    return rows;
}

std::vector<ExperimentRecord> run_probabilities(const Cli& cli) {
    const BiphotonModel m = cli.model();
    std::vector<ExperimentRecord> rows;
    if (!cli.pixels.empty()) {
        if (cli.pixels.size() != 1)
            throw std::invalid_argument("probabilities: pass a single --pixels value");
        const PixelDetector det{cli.pixels.front(), cli.extent};
        append_outcome_rows(rows, cli, pixel_probabilities(m, det, cli.quad),
                            det.n_pixels);
    } else if (m.epsilon == 0.0) {
        append_outcome_rows(rows, cli, split_probabilities_delta(m.sigma, m.d), 2);
    } else {
        append_outcome_rows(rows, cli, split_probabilities_exact(m, cli.quad), 2);
    }
    return rows;
}

std::vector<ExperimentRecord> run_sample(const Cli& cli) {
    const BiphotonModel m = cli.model();
    const std::int64_t n = cli.nu_or(10);
    RandomStream stream(cli.seed);
    std::vector<ExperimentRecord> rows;
    rows.reserve(2 * n);
    for (std::int64_t k = 1; k <= n; ++k) {
        const PhotonPair p = sample_pair(m, stream);
        rows.push_back({"sample", cli.sigma, cli.epsilon, cli.d, 0, k, cli.seed,
                        "x1", p.x1, 0.0});
        rows.push_back({"sample", cli.sigma, cli.epsilon, cli.d, 0, k, cli.seed,
                        "x2", p.x2, 0.0});
    }
    return rows;
}

std::vector<ExperimentRecord> run_walk(const Cli& cli) {
    const std::int64_t n = cli.nu_or(10000);
    const experiments::RandomWalkTrace trace =
        experiments::run_random_walk(cli.model(), n, cli.seed);
    std::vector<ExperimentRecord> rows;
    rows.reserve(trace.net.size());
    for (std::size_t k = 0; k < trace.net.size(); ++k)
        rows.push_back({"random-walk", cli.sigma, cli.epsilon, cli.d, 0,
                        static_cast<std::int64_t>(k + 1), cli.seed, "net_signal",
                        static_cast<double>(trace.net[k]), 0.0});
    return rows;
}

std::vector<ExperimentRecord> run_sweep(const Cli& cli) {
    const std::vector<int> pixels =
        cli.pixels.empty() ? std::vector<int>{2, 10, 50} : cli.pixels;
    const std::vector<double> grid = default_eps_grid(cli.sigma);
    return experiments::sweep_npixel_fisher(cli.sigma, cli.d, pixels, cli.extent,
                                            grid, cli.quad);
}

std::vector<ExperimentRecord> run_crossover(const Cli& cli) {
    const std::int64_t nu =
        experiments::crossover_events_for_snr(cli.model(), cli.d, cli.snr_target,
                                              cli.quad);
    return {{"crossover", cli.sigma, cli.epsilon, cli.d, 0, nu, 0,
             "events_for_snr", static_cast<double>(nu), 0.0}};
}

std::vector<ExperimentRecord> run_scaling(const Cli& cli) {
    return experiments::scaling_study(cli.model(), default_nu_grid(),
                                      cli.reps_or(200), cli.seed, 0, cli.quad);
}

std::vector<ExperimentRecord> run_appendix_a(const Cli& cli) {
    return experiments::appendix_a_study(cli.model(), cli.nu_or(10000),
                                         cli.reps_or(4000), default_weight_grid(),
                                         cli.seed, 0, cli.quad);
}

std::vector<ExperimentRecord> run_qfi_check(const Cli& cli) {
    const BiphotonModel models[] = {cli.model()};
    return experiments::qfi_vs_cfi_check(models, cli.quad);
}

void emit(const Cli& cli, const std::string& subcommand,
          const std::vector<ExperimentRecord>& rows) {
    std::map<std::string, std::string> meta{
        {"subcommand", subcommand},
        {"sigma", io::format_double(cli.sigma)},
        {"epsilon", io::format_double(cli.epsilon)},
        {"d", io::format_double(cli.d)},
        {"extent", io::format_double(cli.extent)},
        {"format", cli.format},
    };
    if (!cli.pixels.empty()) {
        std::string joined;
        for (int p : cli.pixels) {
            if (!joined.empty()) joined += ',';
            joined += std::to_string(p);
        }
        meta["pixels"] = joined;
    }
    if (cli.nu >= 0) meta["nu"] = std::to_string(cli.nu);
    if (cli.replications >= 0) meta["replications"] = std::to_string(cli.replications);
    if (cli.seed_given) meta["seed"] = std::to_string(cli.seed);
    if (subcommand == "crossover") meta["snr"] = io::format_double(cli.snr_target);

    const io::OutputFormat format = io::parse_format(cli.format);
    if (cli.out_path.empty()) {
        io::write_records(std::cout, rows, format, meta);
    } else {
        std::ofstream out(cli.out_path);
        if (!out)
            throw std::runtime_error("cannot open output file: " + cli.out_path);
        io::write_records(out, rows, format, meta);
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Biphoton displacement metrology: outcome probabilities, Fisher "
                 "information, estimators, and reproducible scaling studies."};
    app.footer(kColumnsNote);

    Cli cli;
    app.set_config("--config", "", "Read defaults from a key = value file");
    app.add_option("--sigma", cli.sigma, "Pump beam waist (length unit)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("--epsilon", cli.epsilon,
                   "Correlation parameter; 0 selects the delta-correlated limit")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    app.add_option("--d", cli.d, "True displacement")->capture_default_str();
    app.add_option("--pixels", cli.pixels,
                   "Pixel count (probabilities) or counts (npixel-sweep)")
        ->delimiter(',');
    app.add_option("--extent", cli.extent, "Detector width, centered on 0")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("--nu", cli.nu, "Event count (subcommand-specific default)");
    app.add_option("--replications", cli.replications, "Monte Carlo replications");
    app.add_option("--seed", cli.seed, "RNG seed (required for stochastic runs)");
    app.add_option("--snr", cli.snr_target, "Target signal-to-noise ratio")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("--out", cli.out_path, "Output file (default: stdout)");
    app.add_option("--format", cli.format, "Output format")
        ->check(CLI::IsMember({"csv", "json-lines"}))
        ->capture_default_str();

    struct Sub {
        const char* name;
        const char* help;
        std::vector<ExperimentRecord> (*run)(const Cli&);
        bool stochastic;
    };
    const Sub subs[] = {
        {"fisher", "Closed-form, exact-table and quantum information for one model",
         run_fisher, false},
        {"probabilities", "Split or N-pixel outcome table with d-derivatives",
         run_probabilities, false},
        {"sample", "Raw photon-pair stream", run_sample, true},
        {"random-walk", "Split-detection net-signal walk", run_walk, true},
        {"npixel-sweep", "Fisher information vs epsilon and pixel count",
         run_sweep, false},
        {"crossover", "Events needed to reach the target SNR at displacement d",
         run_crossover, false},
        {"scaling", "Monte Carlo resolution scaling vs event count", run_scaling, true},
        {"appendix-a", "Marginal-averaging estimator study", run_appendix_a, true},
        {"qfi-check", "Quantum vs classical information comparison", run_qfi_check,
         false},
    };
    for (const Sub& sub : subs) {
        CLI::App* cmd = app.add_subcommand(sub.name, sub.help);
        cmd->fallthrough();
    }
    app.require_subcommand(0, 1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e); // usage errors
    }
    cli.seed_given = app.count("--seed") > 0;
    cli.d_given = app.count("--d") > 0;

    const Sub* chosen = nullptr;
    for (const Sub& sub : subs)
        if (app.got_subcommand(sub.name)) chosen = &sub;
    if (chosen == nullptr) {
        std::cerr << "error: expected one subcommand; see --help\n";
        return 2;
    }
    // the net-signal walk defaults to a visible drift of 0.1 sigma
    if (std::string(chosen->name) == "random-walk" && !cli.d_given)
        cli.d = 0.1 * cli.sigma;

    try {
        if (chosen->stochastic && !cli.seed_given)
            throw std::invalid_argument(std::string(chosen->name) +
                                        ": --seed is required (no wall-clock default)");
        emit(cli, chosen->name, chosen->run(cli));
    } catch (const non_convergence_error& e) {
        std::cerr << "compute error: " << e.what() << '\n';
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}

// End-to-end checks of the command-line tool: flag handling, config files,
// output round-trips, and determinism of seeded runs.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "biphoton/record_io.hpp"

namespace fs = std::filesystem;
using biphoton::experiments::ExperimentRecord;

namespace {

struct RunResult {
    int exit_code;
    std::vector<ExperimentRecord> records;
    std::vector<std::string> metadata;
    std::string raw;
};

fs::path work_dir() {
    static const fs::path dir = [] {
        fs::path p = fs::temp_directory_path() / "biphoton_cli_test";
        fs::create_directories(p);
        return p;
    }();
    return dir;
}

RunResult run_cli(const std::string& args, const std::string& out_name,
                  bool parse_csv = true) {
    const fs::path out = work_dir() / out_name;
    std::error_code ec;
    fs::remove(out, ec);
    const std::string cmd = std::string(BIPHOTON_CLI_PATH) + " " + args + " --out " +
                            out.string() + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    RunResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    if (fs::exists(out)) {
        std::ifstream in(out);
        std::ostringstream all;
        all << in.rdbuf();
        result.raw = all.str();
        if (!parse_csv) return result;
        std::istringstream lines(result.raw);
        std::string line;
        bool past_header = false;
        while (std::getline(lines, line)) {
            if (line.empty()) continue;
            if (line[0] == '#') {
                result.metadata.push_back(line);
            } else if (!past_header) {
                past_header = true; // CSV header row
            } else {
                result.records.push_back(biphoton::io::parse_csv_row(line));
            }
        }
    }
    return result;
}

double value_of(const RunResult& r, const std::string& statistic) {
    for (const auto& rec : r.records)
        if (rec.statistic == statistic) return rec.value;
    ADD_FAILURE() << "missing statistic " << statistic;
    return 0.0;
}

} // namespace

TEST(Cli, FisherSubcommand) {
    const RunResult r = run_cli("fisher --sigma 1 --epsilon 0.5", "fisher.csv");
    ASSERT_EQ(r.exit_code, 0);
    EXPECT_EQ(value_of(r, "fisher_continuous"), 16.0);
    EXPECT_NEAR(value_of(r, "fisher_marginal"), 3.2, 1e-12);
    EXPECT_NEAR(value_of(r, "fisher_split"), 6.901793383333152, 1e-12);
    EXPECT_NEAR(value_of(r, "qfi_numeric"), 16.0, 16.0 * 1e-4);
}

TEST(Cli, ProbabilitiesSplit) {
    const RunResult r =
        run_cli("probabilities --sigma 1 --epsilon 1 --d 0", "probs.csv");
    ASSERT_EQ(r.exit_code, 0);
    EXPECT_NEAR(value_of(r, "P[-2]"), 0.25, 1e-9);
    EXPECT_NEAR(value_of(r, "P[0]"), 0.5, 1e-9);
    EXPECT_NEAR(value_of(r, "P[+2]"), 0.25, 1e-9);
}

TEST(Cli, ProbabilitiesPixelsAndDelta) {
    const RunResult pix = run_cli(
        "probabilities --sigma 1 --epsilon 0.5 --d 0.05 --pixels 4 --extent 10",
        "pix.csv");
    ASSERT_EQ(pix.exit_code, 0);
    double total = 0.0;
    for (const auto& rec : pix.records)
        if (rec.statistic.rfind("P[", 0) == 0) total += rec.value;
    EXPECT_NEAR(total, 1.0, 1e-9);

    const RunResult delta =
        run_cli("probabilities --sigma 1 --epsilon 0 --d 0", "delta.csv");
    ASSERT_EQ(delta.exit_code, 0);
    EXPECT_EQ(value_of(delta, "P[0]"), 1.0);
}

TEST(Cli, CrossoverExample) {
    const RunResult r =
        run_cli("crossover --sigma 1 --epsilon 0 --d 0.01 --snr 1", "cross.csv");
    ASSERT_EQ(r.exit_code, 0);
    EXPECT_EQ(value_of(r, "events_for_snr"), 63.0);
}

TEST(Cli, ConfigFileWithFlagOverride) {
    const fs::path cfg = work_dir() / "run.cfg";
    {
        std::ofstream out(cfg);
        out << "# defaults for the strong-correlation run\n"
            << "epsilon = 0.25\n"
            << "sigma = 1\n";
    }
    const RunResult from_file =
        run_cli("fisher --config " + cfg.string(), "cfg1.csv");
    ASSERT_EQ(from_file.exit_code, 0);
    EXPECT_EQ(value_of(from_file, "fisher_continuous"), 64.0);

    const RunResult overridden =
        run_cli("fisher --config " + cfg.string() + " --epsilon 0.5", "cfg2.csv");
    ASSERT_EQ(overridden.exit_code, 0);
    EXPECT_EQ(value_of(overridden, "fisher_continuous"), 16.0);
    // effective configuration echoed in metadata
    bool saw_eps = false;
    for (const auto& line : overridden.metadata)
        if (line == "# epsilon = 0.5") saw_eps = true;
    EXPECT_TRUE(saw_eps);
}

TEST(Cli, SeedRequiredForStochasticRuns) {
    EXPECT_NE(run_cli("sample --nu 3", "noseed.csv").exit_code, 0);
    EXPECT_NE(run_cli("random-walk --nu 10", "noseed2.csv").exit_code, 0);
    EXPECT_NE(run_cli("scaling", "noseed4.csv").exit_code, 0);

    const RunResult ok = run_cli("sample --nu 3 --seed 11", "seeded.csv");
    ASSERT_EQ(ok.exit_code, 0);
    ASSERT_EQ(ok.records.size(), 6u); // x1 and x2 per pair
    const RunResult again = run_cli("sample --nu 3 --seed 11", "seeded2.csv");
    EXPECT_EQ(ok.raw, again.raw);
}

TEST(Cli, UsageAndValidationErrors) {
    EXPECT_NE(run_cli("fisher --no-such-flag 1", "bad.csv").exit_code, 0);
    EXPECT_NE(run_cli("fisher --sigma -1", "bad2.csv").exit_code, 0);
    // epsilon = 0 asks for unbounded information
    EXPECT_EQ(run_cli("fisher --epsilon 0", "bad3.csv").exit_code, 2);
    // no subcommand
    EXPECT_NE(run_cli("--sigma 1", "bad4.csv").exit_code, 0);
}

TEST(Cli, CsvRoundTripAtFullPrecision) {
    const RunResult r = run_cli(
        "probabilities --sigma 1 --epsilon 0.37 --d 0.013", "roundtrip.csv");
    ASSERT_EQ(r.exit_code, 0);
    ASSERT_FALSE(r.records.empty());
    for (const auto& rec : r.records) {
        const ExperimentRecord back = biphoton::io::parse_csv_row(
            biphoton::io::to_csv_row(rec));
        EXPECT_EQ(back, rec);
    }
}

TEST(Cli, JsonLinesFormat) {
    const RunResult raw = run_cli(
        "random-walk --nu 5 --seed 3 --format json-lines", "walk.jsonl",
        /*parse_csv=*/false);
    ASSERT_EQ(raw.exit_code, 0);
    std::istringstream lines(raw.raw);
    std::string line;
    std::size_t n_records = 0;
    bool saw_meta = false;
    while (std::getline(lines, line)) {
        const auto j = nlohmann::json::parse(line);
        if (j.contains("meta")) {
            saw_meta = true;
            EXPECT_EQ(j.at("meta").at("seed"), "3");
        } else {
            const ExperimentRecord rec = biphoton::io::from_json(j);
            EXPECT_EQ(rec.statistic, "net_signal");
            ++n_records;
        }
    }
    EXPECT_TRUE(saw_meta);
    EXPECT_EQ(n_records, 5u);
}

#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "biphoton/record_io.hpp"

using namespace biphoton;
using experiments::ExperimentRecord;

namespace {

std::vector<ExperimentRecord> sample_records() {
    return {
        {"fisher", 1.0, 0.5, 0.0, 0, 1, 0, "fisher_continuous", 16.0, 0.0},
        {"scaling", 1.0, 0.01, 0.0, 0, 316, 99, "d_min_mc",
         0.0012345678901234567, 6.25e-6},
        {"probabilities", 2.0, 0.25, -0.05, 10, 1, 0, "P[3:7]", 1.0 / 3.0, 0.0},
        {"appendix-a", 1.0, 0.5, 0.01, 0, 10000, 7, "variance_empirical[w1=0.5]",
         -1.4489e-5, 1e-300},
    };
}

} // namespace

TEST(FormatDouble, ShortestRoundTrip) {
    for (double x : {0.1, 1.0 / 3.0, -0.0, 1e-300, 6.02214076e23,
                     0.0012345678901234567, -123456.789}) {
        const std::string s = io::format_double(x);
        EXPECT_EQ(io::parse_double(s), x) << s;
    }
    EXPECT_EQ(io::format_double(16.0), "16");
    EXPECT_EQ(io::format_double(0.1), "0.1");
}

TEST(CsvRoundTrip, BitExact) {
    for (const ExperimentRecord& r : sample_records()) {
        const ExperimentRecord back = io::parse_csv_row(io::to_csv_row(r));
        EXPECT_EQ(back, r);
    }
}

TEST(JsonRoundTrip, BitExact) {
    for (const ExperimentRecord& r : sample_records()) {
        const auto line = io::to_json(r).dump();
        EXPECT_EQ(io::from_json(nlohmann::json::parse(line)), r);
    }
}

TEST(ParseCsvRow, RejectsMalformedRows) {
    EXPECT_THROW(io::parse_csv_row("a,b,c"), std::invalid_argument);
    EXPECT_THROW(io::parse_csv_row("e,x,1,0,0,1,0,s,1,0"), std::invalid_argument);
}

TEST(ParseFormat, Names) {
    EXPECT_EQ(io::parse_format("csv"), io::OutputFormat::csv);
    EXPECT_EQ(io::parse_format("json-lines"), io::OutputFormat::json_lines);
    EXPECT_THROW(io::parse_format("yaml"), std::invalid_argument);
}

TEST(WriteRecords, CsvLayout) {
    std::ostringstream out;
    io::write_records(out, sample_records(), io::OutputFormat::csv,
                      {{"subcommand", "fisher"}, {"sigma", "1"}});
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "# sigma = 1");
    std::getline(in, line);
    EXPECT_EQ(line, "# subcommand = fisher");
    std::getline(in, line);
    EXPECT_EQ(line, std::string(io::csv_header));
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        EXPECT_EQ(io::parse_csv_row(line), sample_records()[rows]);
        ++rows;
    }
    EXPECT_EQ(rows, sample_records().size());
}

TEST(WriteRecords, JsonLinesLayout) {
    std::ostringstream out;
    io::write_records(out, sample_records(), io::OutputFormat::json_lines,
                      {{"seed", "7"}});
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    const auto meta = nlohmann::json::parse(line);
    EXPECT_EQ(meta.at("meta").at("seed"), "7");
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        EXPECT_EQ(io::from_json(nlohmann::json::parse(line)), sample_records()[rows]);
        ++rows;
    }
    EXPECT_EQ(rows, sample_records().size());
}

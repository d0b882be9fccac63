#pragma once

#include <charconv>
#include <cstdint>
#include <map>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "biphoton/experiments.hpp"

namespace biphoton::io {

enum class OutputFormat { csv, json_lines };

inline OutputFormat parse_format(std::string_view name) {
    if (name == "csv") return OutputFormat::csv;
    if (name == "json-lines" || name == "jsonl") return OutputFormat::json_lines;
    throw std::invalid_argument("unknown output format: " + std::string(name));
}

/// Shortest decimal form that round-trips to the same double.
inline std::string format_double(double x) {
    char buf[32];
    const std::to_chars_result r = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, r.ptr);
}

inline double parse_double(std::string_view s) {
    double x = 0.0;
    const std::from_chars_result r = std::from_chars(s.data(), s.data() + s.size(), x);
    if (r.ec != std::errc{} || r.ptr != s.data() + s.size())
        throw std::invalid_argument("bad double field: " + std::string(s));
    return x;
}

inline constexpr std::string_view csv_header =
    "experiment,sigma,epsilon,d,n_pixels,nu,seed,statistic,value,std_error";

inline std::string to_csv_row(const experiments::ExperimentRecord& r) {
    std::string row;
    row.reserve(96);
    row += r.experiment;
    row += ',';
    row += format_double(r.sigma);
    row += ',';
    row += format_double(r.epsilon);
    row += ',';
    row += format_double(r.d);
    row += ',';
    row += std::to_string(r.n_pixels);
    row += ',';
    row += std::to_string(r.nu);
    row += ',';
    row += std::to_string(r.seed);
    row += ',';
    row += r.statistic;
    row += ',';
    row += format_double(r.value);
    row += ',';
    row += format_double(r.std_error);
    return row;
}

inline experiments::ExperimentRecord parse_csv_row(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (std::size_t pos = 0; pos <= line.size(); ++pos) {
        if (pos == line.size() || line[pos] == ',') {
            fields.push_back(line.substr(start, pos - start));
            start = pos + 1;
        }
    }
    if (fields.size() != 10)
        throw std::invalid_argument("CSV row must have 10 fields: " + std::string(line));
    experiments::ExperimentRecord r;
    r.experiment = std::string(fields[0]);
    r.sigma = parse_double(fields[1]);
    r.epsilon = parse_double(fields[2]);
    r.d = parse_double(fields[3]);
    r.n_pixels = static_cast<int>(std::stol(std::string(fields[4])));
    r.nu = std::stoll(std::string(fields[5]));
    r.seed = std::stoull(std::string(fields[6]));
    r.statistic = std::string(fields[7]);
    r.value = parse_double(fields[8]);
    r.std_error = parse_double(fields[9]);
    return r;
}

inline nlohmann::json to_json(const experiments::ExperimentRecord& r) {
    return nlohmann::json{{"experiment", r.experiment}, {"sigma", r.sigma},
                          {"epsilon", r.epsilon},       {"d", r.d},
                          {"n_pixels", r.n_pixels},     {"nu", r.nu},
                          {"seed", r.seed},             {"statistic", r.statistic},
                          {"value", r.value},           {"std_error", r.std_error}};
}

inline experiments::ExperimentRecord from_json(const nlohmann::json& j) {
    experiments::ExperimentRecord r;
    r.experiment = j.at("experiment").get<std::string>();
    r.sigma = j.at("sigma").get<double>();
    r.epsilon = j.at("epsilon").get<double>();
    r.d = j.at("d").get<double>();
    r.n_pixels = j.at("n_pixels").get<int>();
    r.nu = j.at("nu").get<std::int64_t>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.statistic = j.at("statistic").get<std::string>();
    r.value = j.at("value").get<double>();
    r.std_error = j.at("std_error").get<double>();
    return r;
}

/// Writes metadata (CSV: '#'-prefixed rows; JSON lines: one meta object),
/// then a header for CSV, then one record per line.
inline void write_records(std::ostream& out,
                          std::span<const experiments::ExperimentRecord> records,
                          OutputFormat format,
                          const std::map<std::string, std::string>& metadata = {}) {
    if (format == OutputFormat::csv) {
        for (const auto& [key, value] : metadata)
            out << "# " << key << " = " << value << '\n';
        out << csv_header << '\n';
        for (const auto& r : records) out << to_csv_row(r) << '\n';
    } else {
        if (!metadata.empty()) {
            nlohmann::json meta;
            for (const auto& [key, value] : metadata) meta[key] = value;
            out << nlohmann::json{{"meta", meta}}.dump() << '\n';
        }
        for (const auto& r : records) out << to_json(r).dump() << '\n';
    }
}

} // namespace biphoton::io

#pragma once
// Experiment results as a flat cell table plus serialization to CSV and JSON.
//
// Reports must be reproducible byte for byte from (config, seed, build), so
// the wall-clock measurement lives only in the in-memory struct and on the
// log stream, never in the emitted artifacts.  CSV numbers carry 17
// significant digits so every double round-trips exactly.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mtb {

inline constexpr const char* kBuildVersion = "mtb 0.1.0";
inline constexpr int kReportSchemaVersion = 1;

// one result cell; absent fields stay empty in CSV and null in JSON
struct ReportCell {
    std::string experiment;
    std::string model;
    std::optional<long> n;
    std::optional<double> alpha;
    std::optional<double> p;
    std::optional<double> delta;
    std::optional<double> x;
    std::string statistic;   // empty when no simulation backs the cell
    std::string bound_name;
    std::optional<double> bound_value;
    std::string bound_branch;
    std::optional<double> p_hat;
    std::optional<double> ci_low;
    std::optional<double> ci_high;
    std::string verdict;     // PASS | WEAK-PASS | FAIL | N/A
    std::uint64_t seed = 0;
};

struct Report {
    std::string experiment;
    std::vector<std::pair<std::string, std::string>> config_echo;
    std::vector<ReportCell> cells;
    std::string overall; // worst cell verdict, N/A when nothing was checked
    std::uint64_t seed = 0;
    std::string version = kBuildVersion;
    double wall_seconds = 0.0; // informational only, not serialized
};

// worst-of aggregation: FAIL > WEAK-PASS > PASS > N/A
std::string overall_verdict(const std::vector<ReportCell>& cells);

// fixed 16-column layout; header row always present
std::string to_csv(const Report& report);

std::string to_json(const Report& report);
Report report_from_json(const std::string& text);

// %.17g rendering used by the CSV emitter
std::string csv_number(double v);

} // namespace mtb

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "imb/bench.hpp"

namespace imb {

// One line of the result matrix. Metrics a run could not measure stay
// disengaged and serialize as empty CSV cells / absent JSON keys.
struct ReportRow {
    std::string index;
    std::string pattern;
    std::uint64_t scale = 0;  // loaded population
    std::string mix;

    std::optional<double> avg_exec_time_us;
    std::optional<double> instr_per_request;
    std::optional<double> cpi;
    std::optional<std::uint64_t> footprint_bytes;

    std::optional<double> retiring;
    std::optional<double> bad_speculation;
    std::optional<double> frontend_bound;
    std::optional<double> backend_bound;

    std::optional<double> core_bound;
    std::optional<double> memory_bound;

    std::optional<double> l1_bound;
    std::optional<double> l2_bound;
    std::optional<double> l3_bound;
    std::optional<double> dram_bound;
    std::optional<double> store_bound;

    bool operator==(const ReportRow&) const = default;
};

// "read_only" etc. for the four built-in mixes, otherwise a compact
// r/u/i/d fraction string.
std::string mix_label(const MixSpec& mix);

ReportRow make_report_row(const RunReport& report);

// Column order is fixed; downstream tooling may rely on it.
const std::string& csv_header();
std::string to_csv(const std::vector<ReportRow>& rows);
std::vector<ReportRow> rows_from_csv(const std::string& text);

nlohmann::json to_json(const ReportRow& row);
ReportRow row_from_json(const nlohmann::json& j);
nlohmann::json rows_to_json(const std::vector<ReportRow>& rows);
std::vector<ReportRow> rows_from_json(const nlohmann::json& j);

// Full single-run detail, including phase timings, outcome tallies and the
// raw counter values behind the attribution.
nlohmann::json to_json(const RunReport& report);

// Fixed-width human view of the headline metrics.
std::string to_table(const std::vector<ReportRow>& rows);

}  // namespace imb

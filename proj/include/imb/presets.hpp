#pragma once

#include <functional>
#include <string>
#include <vector>

#include "imb/bench.hpp"
#include "imb/report.hpp"

namespace imb {

// 160000 -> "160k", 1600000 -> "1.6M".
std::string human_count(std::uint64_t n);

// One key set of a matrix; the request mix is filled in per run.
struct PresetSet {
    std::string label;
    WorkloadConfig workload;

    bool operator==(const PresetSet&) const = default;
};

// A full measurement matrix: every key set crossed with every request mix
// and every index.
struct Preset {
    std::string name;
    std::vector<PresetSet> sets;
    std::vector<std::string> mixes;
    std::vector<std::string> indexes;
    std::uint64_t warmup_reads = 100'000;

    bool operator==(const Preset&) const = default;
};

// Built-in matrices sized for a workstation: three key sets (a small and a
// large consecutive one, and a large sparse random one) by the four
// built-in mixes by the three indexes.
Preset desk_small();
Preset desk_large();
Preset preset_by_name(const std::string& name);  // throws on unknown names

// Same structure as the shipped configs/*.conf files.
Preset parse_preset(const std::string& text);
Preset load_preset(const std::string& path);

struct MatrixOptions {
    bool collect_counters = true;
    std::string event_map_path;
    std::function<void(const std::string&)> progress;  // one line per finished run
};

struct MatrixResult {
    std::vector<RunReport> reports;
    std::vector<ReportRow> rows;
    std::vector<std::string> failures;  // "<index> <set> <mix>: reason"

    bool complete() const { return failures.empty(); }
};

// Runs every cell, collecting failures instead of stopping at the first.
MatrixResult run_matrix(const Preset& preset, const MatrixOptions& options = {});

}  // namespace imb

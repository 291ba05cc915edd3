#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "imb/index.hpp"
#include "imb/perf_counters.hpp"
#include "imb/tmam.hpp"
#include "imb/workload.hpp"

namespace imb {

// "alex", "art", "btree", plus "oracle" and "noop" for harness checks.
std::unique_ptr<Index> make_index(const std::string& name);

// Wall-clock seconds for one phase.
double time_phase(const std::function<void()>& fn);

struct ExperimentConfig {
    std::string index_name = "btree";
    WorkloadConfig workload;
    std::uint64_t warmup_reads = 100'000;
    bool collect_counters = true;
    std::string event_map_path;  // empty: built-in map for the detected cpu
    std::string rss_csv_path;    // non-empty: sample resident set into this file
    std::uint64_t rss_interval_ms = 1000;
};

struct OutcomeTally {
    std::uint64_t ok = 0;
    std::uint64_t already_exists = 0;
    std::uint64_t not_found = 0;

    std::uint64_t total() const { return ok + already_exists + not_found; }
};

struct RunReport {
    std::string index_name;
    Pattern pattern = Pattern::Consecutive;
    std::uint64_t population = 0;
    std::uint64_t request_count = 0;
    MixSpec mix;
    std::uint64_t seed = 0;

    double populate_seconds = 0.0;
    double warmup_seconds = 0.0;
    double run_seconds = 0.0;
    double avg_op_micros = 0.0;

    // Surprising statuses (a read that misses, an insert that collides) are
    // tallied here rather than treated as errors; repeated deletes of the
    // same key are a normal part of generated request streams.
    OutcomeTally outcomes;
    std::uint64_t checksum = 0;  // folded read results, also defeats dead-code elimination

    bool footprint_valid = false;          // heap accounting shim present
    std::uint64_t footprint_bytes = 0;     // live-heap growth from loading the index
    std::uint64_t peak_rss_bytes = 0;      // 0 when rss sampling is off

    bool counters_available = false;       // at least one counter delivered data
    std::vector<std::string> counter_problems;
    CounterSample sample;                  // request phase only
    TmamBreakdown tmam;
    double instr_per_request = 0.0;        // 0 when instructions were not counted
};

// Generates the workload, loads the index, warms it up, then executes the
// request stream with counters (and optional rss sampling) around just
// that phase.
RunReport run_experiment(const ExperimentConfig& cfg);

// Live-heap cost of an index holding the configured population.
std::uint64_t measure_memory_footprint(const std::string& index_name,
                                       const WorkloadConfig& workload);

}  // namespace imb

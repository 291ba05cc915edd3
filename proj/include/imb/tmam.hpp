#pragma once

#include "imb/perf_counters.hpp"

namespace imb {

// Pipeline-slot attribution. One slot is one issue opportunity, so a phase
// has issue_width * cycles of them; the four level-1 shares say what
// happened to each slot and sum to 1 when the inputs are consistent.
struct TmamLevel1 {
    double retiring = 0.0;
    double bad_speculation = 0.0;
    double frontend_bound = 0.0;
    double backend_bound = 0.0;

    double sum() const { return retiring + bad_speculation + frontend_bound + backend_bound; }
};

// Split of backend_bound into waiting-on-execution vs waiting-on-data.
// core_bound + memory_bound equals the backend share exactly.
struct BackendSplit {
    double core_bound = 0.0;
    double memory_bound = 0.0;
};

// Where the data waits happen. Raw values are stall-cycle fractions of
// total cycles; normalized values are rescaled so they sum to the
// memory_bound share and stay comparable with the other levels.
struct MemoryBreakdown {
    double l1_bound = 0.0;
    double l2_bound = 0.0;
    double l3_bound = 0.0;
    double dram_bound = 0.0;
    double store_bound = 0.0;

    double sum() const { return l1_bound + l2_bound + l3_bound + dram_bound + store_bound; }
};

struct TmamBreakdown {
    double cpi = 0.0;
    bool cpi_valid = false;

    TmamLevel1 level1;
    bool level1_valid = false;

    BackendSplit backend;
    bool backend_valid = false;

    MemoryBreakdown memory_raw;
    MemoryBreakdown memory;  // normalized
    bool memory_valid = false;
};

// Each compute_* function reads only the counters it documents and throws
// std::invalid_argument when a required denominator is zero. compute_tmam
// checks availability first and fills the validity flags instead of
// throwing.
double compute_cpi(const CounterSample& s);  // cycles, instructions
// cycles, slots_retired, slots_issued, recovery_cycles, fe_undelivered
TmamLevel1 compute_level1(const CounterSample& s);
// stalls_total, stalls_mem_any, bound_on_stores
BackendSplit compute_backend_split(const CounterSample& s, double backend_bound);
// cycles, stalls_mem_any, stalls_l1d_miss, stalls_l2_miss, stalls_l3_miss,
// bound_on_stores
MemoryBreakdown compute_memory_raw(const CounterSample& s);
MemoryBreakdown normalize_memory_breakdown(const MemoryBreakdown& raw, double memory_bound);

TmamBreakdown compute_tmam(const CounterSample& s);

}  // namespace imb

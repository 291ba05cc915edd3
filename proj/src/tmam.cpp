#include "imb/tmam.hpp"

#include <algorithm>
#include <stdexcept>

namespace imb {
namespace {

double positive_or_zero(double x) { return x > 0.0 ? x : 0.0; }

bool has_all(const CounterSample& s, std::initializer_list<const char*> names) {
    for (const char* name : names) {
        if (!s.has(name)) return false;
    }
    return true;
}

}  // namespace

double compute_cpi(const CounterSample& s) {
    double instructions = static_cast<double>(s.get("instructions"));
    if (instructions <= 0.0) throw std::invalid_argument("cpi: no instructions recorded");
    return static_cast<double>(s.get("cycles")) / instructions;
}

TmamLevel1 compute_level1(const CounterSample& s) {
    double slots = static_cast<double>(s.slots());
    if (slots <= 0.0) throw std::invalid_argument("level1: zero slots");
    double width = static_cast<double>(s.issue_width);

    TmamLevel1 out;
    out.retiring = static_cast<double>(s.get("slots_retired")) / slots;
    // Slots issued but not retired were flushed; each recovery cycle also
    // blocks a full issue group.
    double wasted = static_cast<double>(s.get("slots_issued")) -
                    static_cast<double>(s.get("slots_retired")) +
                    width * static_cast<double>(s.get("recovery_cycles"));
    out.bad_speculation = positive_or_zero(wasted / slots);
    out.frontend_bound = static_cast<double>(s.get("fe_undelivered")) / slots;
    out.backend_bound =
        positive_or_zero(1.0 - out.retiring - out.bad_speculation - out.frontend_bound);
    return out;
}

BackendSplit compute_backend_split(const CounterSample& s, double backend_bound) {
    double mem_stalls = static_cast<double>(s.get("stalls_mem_any")) +
                        static_cast<double>(s.get("bound_on_stores"));
    double core_stalls = positive_or_zero(static_cast<double>(s.get("stalls_total")) -
                                          static_cast<double>(s.get("stalls_mem_any")));
    BackendSplit out;
    double total = mem_stalls + core_stalls;
    if (total <= 0.0) {
        out.core_bound = backend_bound;
        out.memory_bound = 0.0;
        return out;
    }
    out.memory_bound = backend_bound * (mem_stalls / total);
    out.core_bound = backend_bound - out.memory_bound;
    return out;
}

MemoryBreakdown compute_memory_raw(const CounterSample& s) {
    double cycles = static_cast<double>(s.get("cycles"));
    if (cycles <= 0.0) throw std::invalid_argument("memory breakdown: zero cycles");

    double mem_any = static_cast<double>(s.get("stalls_mem_any"));
    double l1d_miss = static_cast<double>(s.get("stalls_l1d_miss"));
    double l2_miss = static_cast<double>(s.get("stalls_l2_miss"));
    double l3_miss = static_cast<double>(s.get("stalls_l3_miss"));

    // Stall cycles with an outstanding miss at level N include the cycles
    // of deeper misses, so each tier is a difference of adjacent counters.
    MemoryBreakdown out;
    out.l1_bound = positive_or_zero(mem_any - l1d_miss) / cycles;
    out.l2_bound = positive_or_zero(l1d_miss - l2_miss) / cycles;
    out.l3_bound = positive_or_zero(l2_miss - l3_miss) / cycles;
    out.dram_bound = l3_miss / cycles;
    out.store_bound = static_cast<double>(s.get("bound_on_stores")) / cycles;
    return out;
}

MemoryBreakdown normalize_memory_breakdown(const MemoryBreakdown& raw, double memory_bound) {
    MemoryBreakdown out;
    double total = raw.sum();
    if (total <= 0.0) return out;
    double factor = memory_bound / total;
    out.l1_bound = raw.l1_bound * factor;
    out.l2_bound = raw.l2_bound * factor;
    out.l3_bound = raw.l3_bound * factor;
    out.dram_bound = raw.dram_bound * factor;
    out.store_bound = raw.store_bound * factor;
    return out;
}

TmamBreakdown compute_tmam(const CounterSample& s) {
    TmamBreakdown out;

    if (s.has("cycles") && s.has("instructions") && s.get("instructions") > 0) {
        out.cpi = compute_cpi(s);
        out.cpi_valid = true;
    }

    bool level1_ready = s.get("cycles") > 0 &&
                        has_all(s, {"slots_retired", "slots_issued", "recovery_cycles",
                                    "fe_undelivered"});
    if (!level1_ready) return out;
    out.level1 = compute_level1(s);
    out.level1_valid = true;

    if (!has_all(s, {"stalls_total", "stalls_mem_any", "bound_on_stores"})) return out;
    out.backend = compute_backend_split(s, out.level1.backend_bound);
    out.backend_valid = true;

    if (!has_all(s, {"stalls_l1d_miss", "stalls_l2_miss", "stalls_l3_miss"})) return out;
    out.memory_raw = compute_memory_raw(s);
    out.memory = normalize_memory_breakdown(out.memory_raw, out.backend.memory_bound);
    out.memory_valid = true;

    return out;
}

}  // namespace imb

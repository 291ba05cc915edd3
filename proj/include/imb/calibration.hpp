#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "imb/event_map.hpp"
#include "imb/tmam.hpp"

namespace imb {

// Small kernels with known pipeline signatures, used to sanity-check the
// counter plumbing on a new machine before trusting index measurements.
// Each returns a checksum so the work cannot be optimized away.

// Walks a random single-cycle permutation over bytes of memory for the
// given number of hops. Every hop is a dependent cache/DRAM load.
std::uint64_t chase_pointers(std::size_t bytes, std::uint64_t hops, std::uint64_t seed = 1);

// One serial multiply-add chain; latency bound, far from peak issue width.
std::uint64_t dependent_adds(std::uint64_t iters);

// Eight independent accumulators; should approach the issue width.
std::uint64_t independent_adds(std::uint64_t iters);

struct CalibrationRow {
    std::string kernel;
    double seconds = 0.0;
    CounterSample sample;
    TmamBreakdown tmam;
};

// scale shrinks or grows the per-kernel work; 1.0 runs a few seconds total.
std::vector<CalibrationRow> run_calibration(const EventMap& map, double scale = 1.0);

}  // namespace imb

#pragma once

#include <cstdint>

// Heap accounting backed by a replacement operator new/delete that is
// linked into executables only (see src/alloc_shim.cpp). In binaries
// without the shim, shim_active() is false and the byte counters read 0.
namespace imb::alloc_stats {

bool shim_active();
std::uint64_t live_bytes();
std::uint64_t peak_bytes();
std::uint64_t total_allocations();
void reset_peak();

}  // namespace imb::alloc_stats

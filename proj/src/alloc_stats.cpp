#include "imb/alloc_stats.hpp"

// Weak references: resolved when the shim object is linked in, null
// otherwise, which is how shim_active() tells the two cases apart.
extern "C" {
std::uint64_t imb_alloc_live_bytes() __attribute__((weak));
std::uint64_t imb_alloc_peak_bytes() __attribute__((weak));
std::uint64_t imb_alloc_total_allocations() __attribute__((weak));
void imb_alloc_reset_peak() __attribute__((weak));
}

namespace imb::alloc_stats {

bool shim_active() { return imb_alloc_live_bytes != nullptr; }

std::uint64_t live_bytes() { return imb_alloc_live_bytes ? imb_alloc_live_bytes() : 0; }

std::uint64_t peak_bytes() { return imb_alloc_peak_bytes ? imb_alloc_peak_bytes() : 0; }

std::uint64_t total_allocations() {
    return imb_alloc_total_allocations ? imb_alloc_total_allocations() : 0;
}

void reset_peak() {
    if (imb_alloc_reset_peak) imb_alloc_reset_peak();
}

}  // namespace imb::alloc_stats

// Global operator new/delete replacement that tracks live heap bytes.
// Byte sizes come from malloc_usable_size so frees can be accounted
// without a size header of our own.

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <new>

#include <malloc.h>

namespace {

constinit std::atomic<std::uint64_t> g_live{0};
constinit std::atomic<std::uint64_t> g_peak{0};
constinit std::atomic<std::uint64_t> g_allocations{0};

void account_alloc(void* p) {
    if (!p) return;
    const std::uint64_t sz = malloc_usable_size(p);
    g_allocations.fetch_add(1, std::memory_order_relaxed);
    const std::uint64_t now = g_live.fetch_add(sz, std::memory_order_relaxed) + sz;
    std::uint64_t peak = g_peak.load(std::memory_order_relaxed);
    while (now > peak &&
           !g_peak.compare_exchange_weak(peak, now, std::memory_order_relaxed)) {
    }
}

void account_free(void* p) {
    if (!p) return;
    g_live.fetch_sub(malloc_usable_size(p), std::memory_order_relaxed);
}

void* alloc_or_throw(std::size_t n) {
    void* p = std::malloc(n ? n : 1);
    if (!p) throw std::bad_alloc();
    account_alloc(p);
    return p;
}

void* aligned_alloc_or_throw(std::size_t n, std::size_t align) {
    void* p = nullptr;
    if (posix_memalign(&p, align < sizeof(void*) ? sizeof(void*) : align, n ? n : 1) != 0)
        throw std::bad_alloc();
    account_alloc(p);
    return p;
}

}  // namespace

extern "C" {

std::uint64_t imb_alloc_live_bytes() { return g_live.load(std::memory_order_relaxed); }
std::uint64_t imb_alloc_peak_bytes() { return g_peak.load(std::memory_order_relaxed); }
std::uint64_t imb_alloc_total_allocations() {
    return g_allocations.load(std::memory_order_relaxed);
}
void imb_alloc_reset_peak() {
    g_peak.store(g_live.load(std::memory_order_relaxed), std::memory_order_relaxed);
}

}  // extern "C"

void* operator new(std::size_t n) { return alloc_or_throw(n); }
void* operator new[](std::size_t n) { return alloc_or_throw(n); }

void* operator new(std::size_t n, const std::nothrow_t&) noexcept {
    void* p = std::malloc(n ? n : 1);
    account_alloc(p);
    return p;
}
void* operator new[](std::size_t n, const std::nothrow_t&) noexcept {
    void* p = std::malloc(n ? n : 1);
    account_alloc(p);
    return p;
}

void* operator new(std::size_t n, std::align_val_t align) {
    return aligned_alloc_or_throw(n, static_cast<std::size_t>(align));
}
void* operator new[](std::size_t n, std::align_val_t align) {
    return aligned_alloc_or_throw(n, static_cast<std::size_t>(align));
}

void operator delete(void* p) noexcept {
    account_free(p);
    std::free(p);
}
void operator delete[](void* p) noexcept {
    account_free(p);
    std::free(p);
}
void operator delete(void* p, std::size_t) noexcept {
    account_free(p);
    std::free(p);
}
void operator delete[](void* p, std::size_t) noexcept {
    account_free(p);
    std::free(p);
}
void operator delete(void* p, const std::nothrow_t&) noexcept {
    account_free(p);
    std::free(p);
}
void operator delete[](void* p, const std::nothrow_t&) noexcept {
    account_free(p);
    std::free(p);
}
void operator delete(void* p, std::align_val_t) noexcept {
    account_free(p);
    std::free(p);
}
void operator delete[](void* p, std::align_val_t) noexcept {
    account_free(p);
    std::free(p);
}
void operator delete(void* p, std::size_t, std::align_val_t) noexcept {
    account_free(p);
    std::free(p);
}
void operator delete[](void* p, std::size_t, std::align_val_t) noexcept {
    account_free(p);
    std::free(p);
}

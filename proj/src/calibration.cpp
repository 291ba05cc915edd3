#include "imb/calibration.hpp"

#include <chrono>
#include <functional>
#include <vector>

#include "imb/workload.hpp"

namespace imb {

std::uint64_t chase_pointers(std::size_t bytes, std::uint64_t hops, std::uint64_t seed) {
    std::size_t entries = bytes / sizeof(std::uint64_t);
    if (entries < 2) entries = 2;

    // Sattolo's shuffle builds one cycle visiting every entry, so the walk
    // cannot settle into a short hot loop.
    std::vector<std::uint64_t> next(entries);
    for (std::size_t i = 0; i < entries; ++i) next[i] = i;
    Rng rng(seed);
    for (std::size_t i = entries - 1; i > 0; --i) {
        std::size_t j = static_cast<std::size_t>(rng.uniform(i));
        std::swap(next[i], next[j]);
    }

    std::uint64_t pos = 0;
    std::uint64_t sum = 0;
    for (std::uint64_t h = 0; h < hops; ++h) {
        pos = next[pos];
        sum += pos;
    }
    return sum;
}

std::uint64_t dependent_adds(std::uint64_t iters) {
    std::uint64_t acc = 0x9E3779B97F4A7C15ULL;
    for (std::uint64_t i = 0; i < iters; ++i) {
        acc = acc * 6364136223846793005ULL + 1442695040888963407ULL;
    }
    return acc;
}

std::uint64_t independent_adds(std::uint64_t iters) {
    std::uint64_t a0 = 1, a1 = 2, a2 = 3, a3 = 4, a4 = 5, a5 = 6, a6 = 7, a7 = 8;
    for (std::uint64_t i = 0; i < iters; ++i) {
        a0 += 1;
        a1 += 3;
        a2 += 5;
        a3 += 7;
        a4 += 11;
        a5 += 13;
        a6 += 17;
        a7 += 19;
    }
    return a0 ^ a1 ^ a2 ^ a3 ^ a4 ^ a5 ^ a6 ^ a7;
}

std::vector<CalibrationRow> run_calibration(const EventMap& map, double scale) {
    auto scaled = [scale](std::uint64_t base) {
        double want = static_cast<double>(base) * scale;
        return want < 1.0 ? std::uint64_t{1} : static_cast<std::uint64_t>(want);
    };
    struct Kernel {
        const char* name;
        std::function<std::uint64_t()> run;
    };
    const Kernel kernels[] = {
        {"pointer_chase",
         [&] { return chase_pointers(scaled(64u << 20), scaled(10'000'000)); }},
        {"dependent_adds", [&] { return dependent_adds(scaled(200'000'000)); }},
        {"independent_adds", [&] { return independent_adds(scaled(50'000'000)); }},
    };

    std::vector<CalibrationRow> rows;
    volatile std::uint64_t sink = 0;
    for (const auto& kernel : kernels) {
        CalibrationRow row;
        row.kernel = kernel.name;

        PerfSession session(map);
        auto t0 = std::chrono::steady_clock::now();
        session.start();
        sink = kernel.run();
        row.sample = session.stop();
        auto t1 = std::chrono::steady_clock::now();

        row.seconds = std::chrono::duration<double>(t1 - t0).count();
        row.tmam = compute_tmam(row.sample);
        rows.push_back(std::move(row));
    }
    (void)sink;
    return rows;
}

}  // namespace imb

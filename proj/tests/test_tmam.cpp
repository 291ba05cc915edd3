#include <doctest.h>

#include <chrono>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "imb/calibration.hpp"
#include "imb/event_map.hpp"
#include "imb/perf_counters.hpp"
#include "imb/tmam.hpp"
#include "imb/workload.hpp"

using namespace imb;

namespace {

const CpuId kSkylakeServer{"intel", 6, 85};

CounterSample full_sample() {
    CounterSample s;
    s.issue_width = 4;
    s.counts = {
        {"cycles", 1000},          {"instructions", 2000},  {"slots_retired", 2000},
        {"slots_issued", 2300},    {"recovery_cycles", 50}, {"fe_undelivered", 500},
        {"stalls_total", 800},     {"stalls_mem_any", 600}, {"stalls_l1d_miss", 500},
        {"stalls_l2_miss", 300},   {"stalls_l3_miss", 100}, {"bound_on_stores", 200},
    };
    return s;
}

void spin_for(std::chrono::microseconds budget) {
    auto until = std::chrono::steady_clock::now() + budget;
    volatile std::uint64_t sink = 0;
    while (std::chrono::steady_clock::now() < until) sink = sink + 1;
    (void)sink;
}

}  // namespace

TEST_CASE("event map selects the most specific section and layers it over generic") {
    const std::string text =
        "# comment\n"
        "[generic]\n"
        "issue_width = 4\n"
        "cycles = hw:cycles\n"
        "instructions = hw:instructions\n"
        "[intel:6:*]\n"
        "issue_width = 6\n"
        "cycles = hw:ref-cycles\n"
        "[intel:6:85]\n"
        "stalls_total = raw:0x040004a3\n";

    auto exact = parse_event_map(text, kSkylakeServer);
    CHECK(exact.matched_section == "intel:6:85");
    CHECK(exact.issue_width == 4);  // the exact section does not override it
    CHECK(exact.events.at("cycles") == EventSpec{0 /*hardware*/, 0 /*cpu cycles*/});
    CHECK(exact.events.at("instructions").type == 0);
    CHECK(exact.events.at("stalls_total") == EventSpec{4 /*raw*/, 0x040004a3});

    auto wildcard = parse_event_map(text, CpuId{"intel", 6, 42});
    CHECK(wildcard.matched_section == "intel:6:*");
    CHECK(wildcard.issue_width == 6);
    CHECK(wildcard.events.count("stalls_total") == 0);
    CHECK(wildcard.events.at("cycles").config != 0);  // overridden to ref-cycles

    auto generic = parse_event_map(text, CpuId{"amd", 25, 1});
    CHECK(generic.matched_section == "generic");
    CHECK(generic.events.size() == 2);
    CHECK(generic.issue_width == 4);
}

TEST_CASE("event map rejects malformed input with the offending line") {
    CpuId id{"intel", 6, 85};
    CHECK_THROWS_AS(parse_event_map("[generic\ncycles = hw:cycles\n", id), std::runtime_error);
    CHECK_THROWS_AS(parse_event_map("cycles = hw:cycles\n", id), std::runtime_error);
    CHECK_THROWS_AS(parse_event_map("[generic]\ncycles hw:cycles\n", id), std::runtime_error);
    CHECK_THROWS_AS(parse_event_map("[generic]\ncycles = hw:nope\n", id), std::runtime_error);
    CHECK_THROWS_AS(parse_event_map("[generic]\ncycles = foo:1\n", id), std::runtime_error);
    CHECK_THROWS_AS(parse_event_map("[generic]\nx = raw:0xZZ\n", id), std::runtime_error);
    CHECK_THROWS_AS(parse_event_map("[generic]\nissue_width = 0\n", id), std::runtime_error);
}

TEST_CASE("built-in event map covers the full counter set for Skylake server cores") {
    auto map = parse_event_map(default_event_map_text(), kSkylakeServer);
    CHECK(map.matched_section == "intel:6:85");
    CHECK(map.issue_width == 4);
    for (const auto& name : known_event_names()) {
        CAPTURE(name);
        CHECK(map.events.count(name) == 1);
    }
    CHECK(map.events.at("stalls_mem_any") == EventSpec{4, 0x140014a3});
    CHECK(map.events.at("stalls_l1d_miss") == EventSpec{4, 0x0c000ca3});
    CHECK(map.events.at("bound_on_stores") == EventSpec{4, 0x000040a6});
    CHECK(map.events.at("slots_retired") == EventSpec{4, 0x000002c2});

    auto fallback = parse_event_map(default_event_map_text(), CpuId{"amd", 25, 97});
    CHECK(fallback.matched_section == "generic");
    CHECK(fallback.events.size() == 2);
}

TEST_CASE("shipped event map file matches the built-in copy") {
    std::ifstream in(IMB_SOURCE_DIR "/data/eventmaps/default.eventmap", std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    CHECK(buf.str() == default_event_map_text());
}

TEST_CASE("cpu detection reads an identity from this machine") {
    auto id = detect_cpu();
    if (!id.vendor.empty()) CHECK(id.family > 0);
}

TEST_CASE("counter sample arithmetic") {
    CounterSample s;
    s.issue_width = 4;
    s.counts["cycles"] = 100;
    CHECK(s.slots() == 400);
    CHECK(s.get("instructions") == 0);
    CHECK_FALSE(s.has("instructions"));
    CHECK(s.has("cycles"));
}

TEST_CASE("level-1 attribution matches hand-computed shares") {
    auto s = full_sample();
    // 4000 slots: 2000 retired, 2300 issued with 50 recovery cycles, 500
    // undelivered by the frontend.
    auto l1 = compute_level1(s);
    CHECK(l1.retiring == 0.5);
    CHECK(l1.bad_speculation == 0.125);
    CHECK(l1.frontend_bound == 0.125);
    CHECK(l1.backend_bound == 0.25);
    CHECK(l1.sum() == 1.0);

    CHECK(compute_cpi(s) == 0.5);
}

TEST_CASE("backend split divides the backend share by stall provenance") {
    auto s = full_sample();
    // memory stalls 600 + 200 stores vs 200 core-only stalls
    auto split = compute_backend_split(s, 0.25);
    CHECK(split.memory_bound == doctest::Approx(0.20).epsilon(1e-12));
    CHECK(split.core_bound == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(split.core_bound + split.memory_bound == doctest::Approx(0.25).epsilon(1e-15));

    SUBCASE("no recorded stalls leaves everything on the core side") {
        CounterSample quiet;
        quiet.counts["cycles"] = 100;
        auto q = compute_backend_split(quiet, 0.1);
        CHECK(q.core_bound == 0.1);
        CHECK(q.memory_bound == 0.0);
    }
}

TEST_CASE("memory tiers come from differences of inclusive stall counters") {
    auto s = full_sample();
    auto raw = compute_memory_raw(s);
    CHECK(raw.l1_bound == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(raw.l2_bound == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(raw.l3_bound == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(raw.dram_bound == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(raw.store_bound == doctest::Approx(0.2).epsilon(1e-12));

    auto norm = normalize_memory_breakdown(raw, 0.2);
    CHECK(norm.sum() == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(norm.l2_bound == doctest::Approx(0.05).epsilon(1e-12));
}

TEST_CASE("normalization rescales tier weights onto the memory share") {
    MemoryBreakdown raw;
    raw.l1_bound = 10;
    raw.l2_bound = 10;
    raw.l3_bound = 20;
    raw.dram_bound = 50;
    raw.store_bound = 10;

    auto norm = normalize_memory_breakdown(raw, 0.40);
    CHECK(norm.l1_bound == doctest::Approx(0.04).epsilon(1e-15));
    CHECK(norm.l2_bound == doctest::Approx(0.04).epsilon(1e-15));
    CHECK(norm.l3_bound == doctest::Approx(0.08).epsilon(1e-15));
    CHECK(norm.dram_bound == doctest::Approx(0.20).epsilon(1e-15));
    CHECK(norm.store_bound == doctest::Approx(0.04).epsilon(1e-15));

    auto zero = normalize_memory_breakdown(MemoryBreakdown{}, 0.40);
    CHECK(zero.sum() == 0.0);
}

TEST_CASE("full pipeline attribution fills every level from a complete sample") {
    auto t = compute_tmam(full_sample());
    CHECK(t.cpi_valid);
    CHECK(t.level1_valid);
    CHECK(t.backend_valid);
    CHECK(t.memory_valid);
    CHECK(t.cpi == 0.5);
    CHECK(t.level1.backend_bound == 0.25);
    CHECK(t.backend.memory_bound == doctest::Approx(0.20).epsilon(1e-12));
    CHECK(t.memory.sum() == doctest::Approx(t.backend.memory_bound).epsilon(1e-12));
    CHECK(t.memory_raw.sum() == doctest::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("attribution shares stay consistent across random consistent samples") {
    Rng rng(20260815);
    for (int rep = 0; rep < 10'000; ++rep) {
        CounterSample s;
        s.issue_width = 4;
        std::uint64_t cycles = 1000 + rng.uniform(1'000'000);
        std::uint64_t slots = 4 * cycles;
        std::uint64_t retired = rng.uniform(slots / 2 + 1);
        std::uint64_t wasted = rng.uniform(slots / 8 + 1);
        std::uint64_t recovery = rng.uniform(wasted / 4 + 1);
        std::uint64_t stalls_total = rng.uniform(cycles + 1);
        std::uint64_t mem_any = rng.uniform(stalls_total + 1);
        std::uint64_t l1d_miss = rng.uniform(mem_any + 1);
        std::uint64_t l2_miss = rng.uniform(l1d_miss + 1);
        std::uint64_t l3_miss = rng.uniform(l2_miss + 1);
        s.counts = {
            {"cycles", cycles},
            {"instructions", 1 + rng.uniform(3 * cycles)},
            {"slots_retired", retired},
            {"slots_issued", retired + wasted - 4 * recovery},
            {"recovery_cycles", recovery},
            {"fe_undelivered", rng.uniform(slots / 8 + 1)},
            {"stalls_total", stalls_total},
            {"stalls_mem_any", mem_any},
            {"stalls_l1d_miss", l1d_miss},
            {"stalls_l2_miss", l2_miss},
            {"stalls_l3_miss", l3_miss},
            {"bound_on_stores", rng.uniform(cycles + 1)},
        };

        auto t = compute_tmam(s);
        REQUIRE(t.level1_valid);
        REQUIRE(t.backend_valid);
        REQUIRE(t.memory_valid);

        REQUIRE(t.level1.retiring >= 0.0);
        REQUIRE(t.level1.bad_speculation >= 0.0);
        REQUIRE(t.level1.frontend_bound >= 0.0);
        REQUIRE(t.level1.backend_bound >= 0.0);
        REQUIRE(t.level1.sum() == doctest::Approx(1.0).epsilon(1e-12));

        REQUIRE(t.backend.core_bound >= 0.0);
        REQUIRE(t.backend.memory_bound >= 0.0);
        REQUIRE(t.backend.core_bound + t.backend.memory_bound ==
                doctest::Approx(t.level1.backend_bound).epsilon(1e-12));

        if (t.memory_raw.sum() > 0.0) {
            REQUIRE(t.memory.sum() ==
                    doctest::Approx(t.backend.memory_bound).epsilon(1e-12));
        } else {
            REQUIRE(t.memory.sum() == 0.0);
        }
        REQUIRE(t.memory.l1_bound >= 0.0);
        REQUIRE(t.memory.dram_bound >= 0.0);
        REQUIRE(t.memory.store_bound >= 0.0);
    }
}

TEST_CASE("overcounted inputs clamp instead of going negative") {
    auto s = full_sample();
    s.counts["slots_retired"] = 9000;  // more than the 4000 slots
    auto l1 = compute_level1(s);
    CHECK(l1.backend_bound == 0.0);
    CHECK(l1.bad_speculation >= 0.0);

    s = full_sample();
    s.counts["slots_issued"] = 0;  // issued < retired and no recovery
    s.counts["recovery_cycles"] = 0;
    CHECK(compute_level1(s).bad_speculation == 0.0);
}

TEST_CASE("attribution degrades level by level as counters disappear") {
    auto s = full_sample();
    s.counts.erase("stalls_l1d_miss");
    auto t = compute_tmam(s);
    CHECK(t.backend_valid);
    CHECK_FALSE(t.memory_valid);

    s = full_sample();
    s.counts.erase("stalls_total");
    t = compute_tmam(s);
    CHECK(t.level1_valid);
    CHECK_FALSE(t.backend_valid);
    CHECK_FALSE(t.memory_valid);

    s = full_sample();
    s.counts.erase("recovery_cycles");
    t = compute_tmam(s);
    CHECK(t.cpi_valid);
    CHECK_FALSE(t.level1_valid);

    t = compute_tmam(CounterSample{});
    CHECK_FALSE(t.cpi_valid);
    CHECK_FALSE(t.level1_valid);
    CHECK_FALSE(t.backend_valid);
    CHECK_FALSE(t.memory_valid);
}

TEST_CASE("low-level computations refuse zero denominators") {
    CounterSample empty;
    CHECK_THROWS_AS(compute_cpi(empty), std::invalid_argument);
    CHECK_THROWS_AS(compute_level1(empty), std::invalid_argument);
    CHECK_THROWS_AS(compute_memory_raw(empty), std::invalid_argument);
}

TEST_CASE("software clock counter reads when the kernel allows it") {
    auto map = parse_event_map("[generic]\ntask_clock = sw:task-clock\n", detect_cpu());
    REQUIRE(map.events.size() == 1);

    PerfSession session(map);
    if (session.available()) {
        session.start();
        spin_for(std::chrono::microseconds(2000));
        auto s = session.stop();
        CHECK(s.get("task_clock") > 0);  // nanoseconds of cpu time
        CHECK(s.multiplex_ratio.at("task_clock") == doctest::Approx(1.0));
    } else {
        CHECK(session.problems().size() == 1);
    }
}

TEST_CASE("a session without usable counters degrades instead of failing") {
    auto map = parse_event_map(default_event_map_text(), kSkylakeServer);
    PerfSession session(map);
    session.start();
    spin_for(std::chrono::microseconds(500));
    auto sample = session.stop();
    auto t = compute_tmam(sample);

    if (session.available()) {
        CHECK_FALSE(sample.counts.empty());
    } else {
        CHECK(sample.counts.empty());
        CHECK(session.problems().size() == map.events.size());
        CHECK_FALSE(t.cpi_valid);
        CHECK_FALSE(t.level1_valid);
        CHECK_FALSE(t.backend_valid);
        CHECK_FALSE(t.memory_valid);
    }
}

TEST_CASE("pointer chase walks a full cycle deterministically") {
    // 16 entries walked 16 hops visit every slot once: sum 0..15.
    CHECK(chase_pointers(128, 16, 3) == 120);
    CHECK(chase_pointers(128, 16, 99) == 120);
    CHECK(chase_pointers(4096, 500, 7) == chase_pointers(4096, 500, 7));
}

TEST_CASE("arithmetic kernels compute known checksums") {
    std::uint64_t acc = 0x9E3779B97F4A7C15ULL;
    for (int i = 0; i < 10; ++i) acc = acc * 6364136223846793005ULL + 1442695040888963407ULL;
    CHECK(dependent_adds(10) == acc);
    CHECK(dependent_adds(0) == 0x9E3779B97F4A7C15ULL);

    CHECK(independent_adds(1000) ==
          (1001ULL ^ 3002 ^ 5003 ^ 7004 ^ 11005 ^ 13006 ^ 17007 ^ 19008));
}

TEST_CASE("calibration produces one row per kernel whatever the counter situation") {
    auto map = parse_event_map(default_event_map_text(), detect_cpu());
    auto rows = run_calibration(map, 1e-5);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].kernel == "pointer_chase");
    CHECK(rows[1].kernel == "dependent_adds");
    CHECK(rows[2].kernel == "independent_adds");
    for (const auto& row : rows) {
        CHECK(row.seconds > 0.0);
        if (row.sample.counts.empty()) {
            CHECK_FALSE(row.tmam.cpi_valid);
        }
    }
}

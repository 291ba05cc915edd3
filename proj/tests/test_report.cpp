#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <string>

#include "imb/chart.hpp"
#include "imb/presets.hpp"
#include "imb/report.hpp"
#include "imb/tmam.hpp"

using namespace imb;

namespace {

CounterSample attribution_sample() {
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

RunReport measured_report() {
    RunReport r;
    r.index_name = "alex";
    r.pattern = Pattern::Random;
    r.population = 160'000;
    r.request_count = 100'000;
    r.mix = builtin_mix("read_heavy");
    r.seed = 7;
    r.populate_seconds = 0.5;
    r.warmup_seconds = 0.1;
    r.run_seconds = 2.0;
    r.avg_op_micros = 20.0;
    r.outcomes = {99'000, 0, 1000};
    r.checksum = 0xDEADBEEF;
    r.footprint_valid = true;
    r.footprint_bytes = 12'345'678;
    r.counters_available = true;
    r.sample = attribution_sample();
    r.tmam = compute_tmam(r.sample);
    r.instr_per_request = 150.0;
    return r;
}

RunReport degraded_report() {
    RunReport r = measured_report();
    r.index_name = "btree";
    r.counters_available = false;
    r.sample = CounterSample{};
    r.tmam = compute_tmam(r.sample);
    r.instr_per_request = 0.0;
    r.counter_problems = {"cycles: unsupported"};
    return r;
}

Preset tiny_preset() {
    Preset p;
    p.name = "tiny";
    PresetSet set;
    set.label = "consecutive_500";
    set.workload.pattern = Pattern::Consecutive;
    set.workload.population = 500;
    set.workload.domain_lo = 0;
    set.workload.domain_hi = 10'000;
    set.workload.request_count = 2000;
    set.workload.seed = 5;
    p.sets = {set};
    p.mixes = {"read_heavy", "insert_only"};
    p.indexes = {"btree", "art"};
    p.warmup_reads = 100;
    return p;
}

}  // namespace

TEST_CASE("mix labels name the built-ins and spell out custom blends") {
    CHECK(mix_label(builtin_mix("read_only")) == "read_only");
    CHECK(mix_label(builtin_mix("write_heavy")) == "write_heavy");
    CHECK(mix_label(MixSpec{0.5, 0.5, 0.0, 0.0}) == "r0.5_u0.5_i0_d0");
}

TEST_CASE("report rows engage exactly the metrics a run produced") {
    auto row = make_report_row(measured_report());
    CHECK(row.index == "alex");
    CHECK(row.pattern == "random");
    CHECK(row.scale == 160'000);
    CHECK(row.mix == "read_heavy");
    CHECK(row.avg_exec_time_us == 20.0);
    CHECK(row.instr_per_request == 150.0);
    CHECK(row.cpi == 0.5);
    CHECK(row.footprint_bytes == 12'345'678);
    CHECK(row.retiring == 0.5);
    CHECK(row.backend_bound == 0.25);
    REQUIRE(row.memory_bound.has_value());
    CHECK(*row.memory_bound == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(row.dram_bound.has_value());

    auto bare = make_report_row(degraded_report());
    CHECK(bare.avg_exec_time_us == 20.0);
    CHECK(bare.footprint_bytes.has_value());
    CHECK_FALSE(bare.cpi.has_value());
    CHECK_FALSE(bare.instr_per_request.has_value());
    CHECK_FALSE(bare.retiring.has_value());
    CHECK_FALSE(bare.memory_bound.has_value());
    CHECK_FALSE(bare.l1_bound.has_value());
}

TEST_CASE("csv serialization keeps the pinned column order and empty cells") {
    std::vector<ReportRow> rows = {make_report_row(measured_report()),
                                   make_report_row(degraded_report())};
    std::string csv = to_csv(rows);

    auto first_newline = csv.find('\n');
    CHECK(csv.substr(0, first_newline) == csv_header());
    CHECK(csv_header().substr(0, 26) == "index,pattern,scale,mix,av");

    // The degraded row has empty attribution cells but keeps its place.
    auto parsed = rows_from_csv(csv);
    REQUIRE(parsed.size() == 2);
    CHECK(parsed[1].index == "btree");
    CHECK_FALSE(parsed[1].cpi.has_value());
    CHECK(parsed[0].cpi == 0.5);
    CHECK(parsed[0].footprint_bytes == 12'345'678);
    CHECK(*parsed[0].memory_bound == doctest::Approx(0.2).epsilon(1e-6));

    // Serialization of a parsed file reproduces it byte for byte.
    CHECK(to_csv(parsed) == csv);
}

TEST_CASE("csv parsing rejects foreign input") {
    CHECK_THROWS_AS(rows_from_csv("a,b,c\n1,2,3\n"), std::runtime_error);
    CHECK_THROWS_AS(rows_from_csv(csv_header() + "\nonly,three,cells\n"), std::runtime_error);
    CHECK_THROWS_AS(rows_from_csv(csv_header() +
                                  "\nalex,random,10,read_only,abc,,,,,,,,,,,,,,\n"),
                    std::runtime_error);
}

TEST_CASE("rows survive a json round trip unchanged") {
    std::vector<ReportRow> rows = {make_report_row(measured_report()),
                                   make_report_row(degraded_report())};
    auto j = rows_to_json(rows);
    CHECK(rows_from_json(j) == rows);

    auto dumped = nlohmann::json::parse(j.dump(2));
    CHECK(rows_from_json(dumped) == rows);

    CHECK_FALSE(j[1].contains("cpi"));
    CHECK(j[0]["cpi"] == 0.5);
}

TEST_CASE("full run detail serializes with attribution only when valid") {
    auto j = to_json(measured_report());
    CHECK(j["index"] == "alex");
    CHECK(j["outcomes"]["ok"] == 99'000);
    CHECK(j["checksum"] == 0xDEADBEEF);
    CHECK(j["mix"]["label"] == "read_heavy");
    CHECK(j["phases"]["run_seconds"] == 2.0);
    CHECK(j["counters"]["available"] == true);
    CHECK(j["counters"]["counts"]["cycles"] == 1000);
    CHECK(j["attribution"]["cpi"] == 0.5);
    CHECK(j["attribution"]["level1"]["retiring"] == 0.5);
    CHECK(j["attribution"].contains("memory_tiers_raw"));

    auto d = to_json(degraded_report());
    CHECK(d["counters"]["available"] == false);
    CHECK_FALSE(d["attribution"].contains("cpi"));
    CHECK_FALSE(d["attribution"].contains("level1"));
    CHECK(d["counters"]["problems"].size() == 1);
}

TEST_CASE("table view prints one aligned line per row with dashes for gaps") {
    std::vector<ReportRow> rows = {make_report_row(measured_report()),
                                   make_report_row(degraded_report())};
    std::string table = to_table(rows);
    CHECK(std::count(table.begin(), table.end(), '\n') == 3);
    CHECK(table.find("index") != std::string::npos);
    CHECK(table.find("alex") != std::string::npos);
    CHECK(table.find(" - ") != std::string::npos);
    CHECK(table.find("read_heavy") != std::string::npos);
}

TEST_CASE("grouped chart models pivot rows into one series per index") {
    std::vector<ReportRow> rows;
    for (const char* index : {"alex", "art", "btree"}) {
        auto r = make_report_row(measured_report());
        r.index = index;
        rows.push_back(r);
        r.pattern = "consecutive";
        r.avg_exec_time_us = std::nullopt;
        rows.push_back(r);
    }
    auto m = build_chart_model(ChartKind::ExecTime, rows);
    CHECK_FALSE(m.stacked);
    REQUIRE(m.groups.size() == 2);
    REQUIRE(m.series.size() == 3);
    CHECK(m.series[0].label == "alex");
    CHECK(m.groups[0] == "random/160k read_heavy");
    CHECK(m.series[2].values[0] == 20.0);
    CHECK(std::isnan(m.series[2].values[1]));
}

TEST_CASE("stacked chart models carry one bar per run") {
    std::vector<ReportRow> rows = {make_report_row(measured_report()),
                                   make_report_row(degraded_report())};
    auto m = build_chart_model(ChartKind::Level1, rows);
    CHECK(m.stacked);
    REQUIRE(m.groups.size() == 2);
    REQUIRE(m.series.size() == 4);
    CHECK(m.series[0].label == "retiring");
    CHECK(m.series[0].values[0] == 0.5);
    CHECK(std::isnan(m.series[0].values[1]));

    auto mem = build_chart_model(ChartKind::Memory, rows);
    CHECK(mem.series.size() == 5);
    auto be = build_chart_model(ChartKind::Backend, rows);
    CHECK(be.series.size() == 2);
}

TEST_CASE("chart kinds parse and print symmetrically") {
    for (ChartKind kind : all_chart_kinds()) {
        CHECK(chart_kind_from_string(to_string(kind)) == kind);
    }
    CHECK_THROWS_AS(chart_kind_from_string("pie"), std::invalid_argument);
    CHECK(all_chart_kinds().size() == 6);
}

TEST_CASE("svg rendering emits a complete standalone drawing") {
    std::vector<ReportRow> rows = {make_report_row(measured_report()),
                                   make_report_row(degraded_report())};
    auto svg = render_svg(build_chart_model(ChartKind::Cpi, rows));
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(svg.find("Cycles per instruction") != std::string::npos);
    CHECK(svg.find("<rect") != std::string::npos);
    CHECK(svg.find("read_heavy") != std::string::npos);

    auto stacked = render_svg(build_chart_model(ChartKind::Level1, rows));
    CHECK(stacked.find("retiring") != std::string::npos);
    // one background + four legend swatches + four segments of the first bar
    CHECK(std::count(stacked.begin(), stacked.end(), '<') > 10);
}

TEST_CASE("scale names read like a person would write them") {
    CHECK(human_count(160'000) == "160k");
    CHECK(human_count(1'600'000) == "1.6M");
    CHECK(human_count(16'000'000) == "16M");
    CHECK(human_count(100'000) == "100k");
    CHECK(human_count(2500) == "2.5k");
    CHECK(human_count(999) == "999");
}

TEST_CASE("built-in matrices enumerate the documented cells") {
    auto small = desk_small();
    CHECK(small.name == "desk-small");
    REQUIRE(small.sets.size() == 3);
    CHECK(small.sets[0].label == "consecutive_160k");
    CHECK(small.sets[1].label == "consecutive_1.6M");
    CHECK(small.sets[2].label == "random_1.6M");
    CHECK(small.sets[2].workload.pattern == Pattern::Random);
    for (const auto& set : small.sets) {
        CHECK(set.workload.domain_hi == 2 * set.workload.population);
        CHECK(set.workload.request_count == 100'000);
    }
    CHECK(small.mixes.size() == 4);
    CHECK(small.indexes.size() == 3);
    CHECK(small.warmup_reads == 100'000);

    auto large = desk_large();
    CHECK(large.sets[0].workload.population == 1'600'000);
    CHECK(large.sets[1].workload.population == 16'000'000);
    CHECK(large.sets[2].workload.population == 16'000'000);
    for (const auto& set : large.sets) CHECK(set.workload.request_count == 1'000'000);

    CHECK(preset_by_name("desk-small") == small);
    CHECK_THROWS_AS(preset_by_name("galaxy"), std::invalid_argument);
}

TEST_CASE("shipped matrix configs parse back to the built-in definitions") {
    CHECK(load_preset(IMB_SOURCE_DIR "/configs/desk-small.conf") == desk_small());
    CHECK(load_preset(IMB_SOURCE_DIR "/configs/desk-large.conf") == desk_large());
}

TEST_CASE("preset parsing reports broken definitions") {
    CHECK_THROWS_AS(parse_preset("name = x\n"), std::runtime_error);  // no sets
    CHECK_THROWS_AS(parse_preset("[set a]\npopulation = 5\n"), std::runtime_error);  // no name
    CHECK_THROWS_AS(parse_preset("name = x\nbogus = 1\n"), std::runtime_error);
    CHECK_THROWS_AS(parse_preset("name = x\n[set a]\npattern = spiral\n"), std::runtime_error);
    CHECK_THROWS_AS(parse_preset("name = x\n[set a\npopulation = 5\n"), std::runtime_error);
    CHECK_THROWS_AS(parse_preset("name = x\nmixes = nonsense\n[set a]\npopulation = 5\n"
                                 "domain_hi = 10\nrequests = 1\n"),
                    std::runtime_error);
}

TEST_CASE("matrix execution fills every cell and keeps going after failures") {
    int calls = 0;
    MatrixOptions options;
    options.collect_counters = false;
    options.progress = [&](const std::string& line) {
        ++calls;
        if (calls == 1) CHECK(line.rfind("[1/4] ", 0) == 0);
    };
    auto result = run_matrix(tiny_preset(), options);
    CHECK(result.complete());
    REQUIRE(result.rows.size() == 4);
    REQUIRE(result.reports.size() == 4);
    CHECK(calls == 4);
    CHECK(result.rows[0].index == "btree");
    CHECK(result.rows[1].index == "art");
    CHECK(result.rows[0].mix == "read_heavy");
    CHECK(result.rows[3].mix == "insert_only");
    for (const auto& row : result.rows) CHECK(row.avg_exec_time_us.has_value());

    auto broken = tiny_preset();
    broken.indexes = {"btree", "flying_carpet"};
    auto partial = run_matrix(broken, MatrixOptions{.collect_counters = false});
    CHECK_FALSE(partial.complete());
    CHECK(partial.failures.size() == 2);  // one per mix
    CHECK(partial.rows.size() == 2);
    CHECK(partial.failures[0].find("flying_carpet") != std::string::npos);
}

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>

#include "imb/bench.hpp"
#include "imb/calibration.hpp"
#include "imb/chart.hpp"
#include "imb/presets.hpp"
#include "imb/report.hpp"

namespace {

using namespace imb;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitPartial = 2;
constexpr int kExitUsage = 3;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
    auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

// Accepts a built-in mix name or four comma-separated fractions in
// read,update,insert,delete order.
MixSpec parse_mix_option(const std::string& text) {
    try {
        return builtin_mix(text);
    } catch (const std::invalid_argument&) {
    }
    MixSpec mix;
    double* fields[4] = {&mix.read, &mix.update, &mix.insert, &mix.del};
    std::istringstream in(text);
    std::string part;
    int i = 0;
    while (std::getline(in, part, ',')) {
        if (i == 4) throw std::invalid_argument("mix has more than four fractions: " + text);
        std::size_t used = 0;
        *fields[i++] = std::stod(part, &used);
        if (used != part.size()) throw std::invalid_argument("bad mix fraction: " + part);
    }
    if (i != 4) throw std::invalid_argument("mix needs a name or four fractions: " + text);
    return mix;
}

std::string mib(std::uint64_t bytes) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f MiB", static_cast<double>(bytes) / (1024.0 * 1024.0));
    return buf;
}

void print_attribution(std::ostream& out, const TmamBreakdown& t, double instr_per_request) {
    char buf[256];
    if (t.cpi_valid) {
        if (instr_per_request > 0) {
            std::snprintf(buf, sizeof(buf), "cpi:         %.3f (%.1f instructions/request)\n",
                          t.cpi, instr_per_request);
        } else {
            std::snprintf(buf, sizeof(buf), "cpi:         %.3f\n", t.cpi);
        }
        out << buf;
    }
    if (t.level1_valid) {
        std::snprintf(buf, sizeof(buf),
                      "slots:       retiring %.3f, bad_speculation %.3f, frontend %.3f, "
                      "backend %.3f\n",
                      t.level1.retiring, t.level1.bad_speculation, t.level1.frontend_bound,
                      t.level1.backend_bound);
        out << buf;
    }
    if (t.backend_valid) {
        std::snprintf(buf, sizeof(buf), "backend:     core %.3f, memory %.3f\n",
                      t.backend.core_bound, t.backend.memory_bound);
        out << buf;
    }
    if (t.memory_valid) {
        std::snprintf(buf, sizeof(buf),
                      "memory:      l1 %.3f, l2 %.3f, l3 %.3f, dram %.3f, store %.3f\n",
                      t.memory.l1_bound, t.memory.l2_bound, t.memory.l3_bound,
                      t.memory.dram_bound, t.memory.store_bound);
        out << buf;
    }
}

void print_run_summary(std::ostream& out, const RunReport& r) {
    char buf[256];
    out << "index:       " << r.index_name << "\n";
    out << "pattern:     " << to_string(r.pattern) << "\n";
    out << "population:  " << r.population << " keys\n";
    std::snprintf(buf, sizeof(buf), "requests:    %llu (%s)\n",
                  static_cast<unsigned long long>(r.request_count),
                  mix_label(r.mix).c_str());
    out << buf;
    std::snprintf(buf, sizeof(buf), "phases:      populate %.3fs, warmup %.3fs, run %.3fs\n",
                  r.populate_seconds, r.warmup_seconds, r.run_seconds);
    out << buf;
    std::snprintf(buf, sizeof(buf), "latency:     %.3f us/request\n", r.avg_op_micros);
    out << buf;
    std::snprintf(buf, sizeof(buf), "outcomes:    ok %llu, already_exists %llu, not_found %llu\n",
                  static_cast<unsigned long long>(r.outcomes.ok),
                  static_cast<unsigned long long>(r.outcomes.already_exists),
                  static_cast<unsigned long long>(r.outcomes.not_found));
    out << buf;
    if (r.footprint_valid) {
        out << "footprint:   " << mib(r.footprint_bytes) << " live heap";
        if (r.peak_rss_bytes > 0) out << " (peak rss " << mib(r.peak_rss_bytes) << ")";
        out << "\n";
    }
    if (r.counters_available) {
        print_attribution(out, r.tmam, r.instr_per_request);
        if (!r.counter_problems.empty()) {
            out << "counters:    " << r.counter_problems.size() << " of the events failed: "
                << r.counter_problems.front() << "\n";
        }
    } else if (!r.counter_problems.empty()) {
        out << "counters:    unavailable (" << r.counter_problems.front();
        if (r.counter_problems.size() > 1)
            out << "; +" << r.counter_problems.size() - 1 << " more";
        out << ")\n";
    } else {
        out << "counters:    disabled\n";
    }
}

void emit_charts(const std::vector<ReportRow>& rows, const std::string& dir) {
    std::filesystem::create_directories(dir);
    for (ChartKind kind : all_chart_kinds()) {
        auto svg = render_svg(build_chart_model(kind, rows));
        write_file(dir + "/" + to_string(kind) + ".svg", svg);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"key-value index benchmark with pipeline-level cycle attribution"};
    app.require_subcommand(1);
    std::function<int()> action;

    // run
    auto* run = app.add_subcommand("run", "run one experiment");
    struct {
        std::string index;
        std::string pattern = "consecutive";
        std::uint64_t population = 160'000;
        std::uint64_t domain_lo = 0;
        std::uint64_t domain_hi = 0;
        std::uint64_t requests = 100'000;
        std::string mix = "read_only";
        std::uint64_t seed = 1;
        std::uint64_t warmup = 100'000;
        bool no_counters = false;
        std::string event_map;
        std::string rss_csv;
        std::uint64_t rss_interval_ms = 1000;
        std::string json_out;
        std::string csv_out;
        bool quiet = false;
    } ro;
    run->add_option("--index", ro.index, "alex, art, btree, oracle or noop")->required();
    run->add_option("--pattern", ro.pattern, "consecutive or random");
    run->add_option("--population", ro.population, "keys loaded before the request stream");
    run->add_option("--domain-lo", ro.domain_lo, "lowest key of the domain");
    run->add_option("--domain-hi", ro.domain_hi,
                    "one past the highest key; 0 sizes the domain automatically");
    run->add_option("--requests", ro.requests, "request stream length");
    run->add_option("--mix", ro.mix, "built-in mix name or read,update,insert,delete fractions");
    run->add_option("--seed", ro.seed, "workload generator seed");
    run->add_option("--warmup", ro.warmup, "untimed reads before the measured phase");
    run->add_flag("--no-counters", ro.no_counters, "skip hardware counters entirely");
    run->add_option("--event-map", ro.event_map, "counter encoding file (default: built-in)");
    run->add_option("--rss-csv", ro.rss_csv, "sample resident set size into this csv");
    run->add_option("--rss-interval-ms", ro.rss_interval_ms, "rss sampling period");
    run->add_option("--json", ro.json_out, "write the full run detail as json");
    run->add_option("--csv", ro.csv_out, "write the run as a one-row csv");
    run->add_flag("--quiet", ro.quiet, "suppress the human-readable summary");
    run->set_config("--config");
    run->callback([&] {
        action = [&]() {
            ExperimentConfig cfg;
            cfg.index_name = ro.index;
            cfg.workload.pattern = pattern_from_string(ro.pattern);
            cfg.workload.population = ro.population;
            cfg.workload.domain_lo = ro.domain_lo;
            cfg.workload.domain_hi =
                ro.domain_hi != 0 ? ro.domain_hi
                                  : ro.domain_lo + 2 * (ro.population + ro.requests);
            cfg.workload.request_count = ro.requests;
            cfg.workload.mix = parse_mix_option(ro.mix);
            cfg.workload.seed = ro.seed;
            cfg.warmup_reads = ro.warmup;
            cfg.collect_counters = !ro.no_counters;
            cfg.event_map_path = ro.event_map;
            cfg.rss_csv_path = ro.rss_csv;
            cfg.rss_interval_ms = ro.rss_interval_ms;

            RunReport report = run_experiment(cfg);
            if (!ro.json_out.empty()) write_file(ro.json_out, to_json(report).dump(2) + "\n");
            if (!ro.csv_out.empty()) write_file(ro.csv_out, to_csv({make_report_row(report)}));
            if (!ro.quiet) print_run_summary(std::cout, report);
            return kExitOk;
        };
    });

    // matrix
    auto* matrix = app.add_subcommand("matrix", "run a full measurement matrix");
    struct {
        std::string preset = "desk-small";
        std::string config;
        std::string csv_out;
        std::string json_out;
        std::string charts_dir;
        bool no_counters = false;
        std::string event_map;
        bool quiet = false;
    } mo;
    auto* preset_opt = matrix->add_option("--preset", mo.preset, "desk-small or desk-large");
    matrix->add_option("--config", mo.config, "matrix definition file")->excludes(preset_opt);
    matrix->add_option("--csv", mo.csv_out, "write all rows as csv");
    matrix->add_option("--json", mo.json_out, "write rows, full reports and failures as json");
    matrix->add_option("--charts", mo.charts_dir, "emit every chart kind into this directory");
    matrix->add_flag("--no-counters", mo.no_counters, "skip hardware counters entirely");
    matrix->add_option("--event-map", mo.event_map, "counter encoding file (default: built-in)");
    matrix->add_flag("--quiet", mo.quiet, "suppress per-run progress lines");
    matrix->callback([&] {
        action = [&]() {
            Preset preset =
                mo.config.empty() ? preset_by_name(mo.preset) : load_preset(mo.config);
            MatrixOptions options;
            options.collect_counters = !mo.no_counters;
            options.event_map_path = mo.event_map;
            if (!mo.quiet) {
                options.progress = [](const std::string& line) {
                    std::cerr << line << "\n";
                };
            }

            MatrixResult result = run_matrix(preset, options);
            if (!mo.csv_out.empty()) write_file(mo.csv_out, to_csv(result.rows));
            if (!mo.json_out.empty()) {
                nlohmann::json j;
                j["preset"] = preset.name;
                j["rows"] = rows_to_json(result.rows);
                j["reports"] = nlohmann::json::array();
                for (const auto& report : result.reports) j["reports"].push_back(to_json(report));
                j["failures"] = result.failures;
                write_file(mo.json_out, j.dump(2) + "\n");
            }
            if (!mo.charts_dir.empty() && !result.rows.empty())
                emit_charts(result.rows, mo.charts_dir);

            std::cout << to_table(result.rows);
            for (const auto& failure : result.failures)
                std::cout << "FAILED: " << failure << "\n";
            if (result.rows.empty() && !result.failures.empty()) return kExitError;
            return result.complete() ? kExitOk : kExitPartial;
        };
    });

    // chart
    auto* chart = app.add_subcommand("chart", "render charts from a result csv");
    struct {
        std::string input;
        std::string out_dir = ".";
        std::vector<std::string> kinds;
    } co;
    chart->add_option("--input", co.input, "csv produced by run or matrix")->required();
    chart->add_option("--out-dir", co.out_dir, "directory for the svg files");
    chart->add_option("--kind", co.kinds,
                      "exec_time, instr, cpi, level1, backend, memory (default: all)");
    chart->callback([&] {
        action = [&]() {
            auto rows = rows_from_csv(read_file(co.input));
            if (rows.empty()) throw std::runtime_error("no rows in " + co.input);
            std::vector<ChartKind> kinds;
            for (const auto& name : co.kinds) kinds.push_back(chart_kind_from_string(name));
            if (kinds.empty()) kinds = all_chart_kinds();
            std::filesystem::create_directories(co.out_dir);
            for (ChartKind kind : kinds) {
                auto path = co.out_dir + "/" + to_string(kind) + ".svg";
                write_file(path, render_svg(build_chart_model(kind, rows)));
                std::cout << path << "\n";
            }
            return kExitOk;
        };
    });

    // calibrate
    auto* calibrate = app.add_subcommand("calibrate",
                                         "run fixed kernels to sanity-check the counters");
    struct {
        double scale = 1.0;
        std::string event_map;
    } lo;
    calibrate->add_option("--scale", lo.scale, "work multiplier per kernel");
    calibrate->add_option("--event-map", lo.event_map, "counter encoding file (default: built-in)");
    calibrate->callback([&] {
        action = [&]() {
            auto id = detect_cpu();
            EventMap map = lo.event_map.empty()
                               ? parse_event_map(default_event_map_text(), id)
                               : load_event_map(lo.event_map, id);
            std::cout << "cpu:         " << id.vendor << ":" << id.family << ":" << id.model
                      << " (events: " << map.matched_section << ")\n";
            {
                PerfSession probe(map);
                if (!probe.available()) {
                    auto problems = probe.problems();
                    std::cout << "counters:    unavailable (" << problems.front();
                    if (problems.size() > 1) std::cout << "; +" << problems.size() - 1 << " more";
                    std::cout << ")\n";
                }
            }
            for (const auto& row : run_calibration(map, lo.scale)) {
                char buf[128];
                std::snprintf(buf, sizeof(buf), "%-17s %8.3fs\n", row.kernel.c_str(),
                              row.seconds);
                std::cout << buf;
                print_attribution(std::cout, row.tmam,
                                  0.0);  // per-request rates are meaningless here
            }
            return kExitOk;
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        return action();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
}

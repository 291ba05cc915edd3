#include "imb/presets.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace imb {
namespace {

PresetSet make_set(Pattern pattern, std::uint64_t population, std::uint64_t requests,
                   std::uint64_t seed) {
    PresetSet set;
    set.label = std::string(to_string(pattern)) + "_" + human_count(population);
    set.workload.pattern = pattern;
    set.workload.population = population;
    set.workload.domain_lo = 0;
    // Twice the population leaves room for insert-only request streams
    // while keeping random key sets at half density.
    set.workload.domain_hi = 2 * population;
    set.workload.request_count = requests;
    set.workload.seed = seed;
    return set;
}

const std::vector<std::string>& default_mixes() {
    static const std::vector<std::string> mixes = {"read_only", "read_heavy", "write_heavy",
                                                   "insert_only"};
    return mixes;
}

const std::vector<std::string>& default_indexes() {
    static const std::vector<std::string> indexes = {"alex", "art", "btree"};
    return indexes;
}

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> words(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> out;
    std::string w;
    while (in >> w) out.push_back(w);
    return out;
}

[[noreturn]] void fail(std::size_t line_no, const std::string& what) {
    throw std::runtime_error("preset line " + std::to_string(line_no) + ": " + what);
}

std::uint64_t parse_count(const std::string& s, std::size_t line_no) {
    try {
        std::size_t used = 0;
        std::uint64_t v = std::stoull(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        fail(line_no, "bad count '" + s + "'");
    }
}

}  // namespace

std::string human_count(std::uint64_t n) {
    char buf[32];
    if (n >= 1'000'000 && n % 100'000 == 0) {
        std::snprintf(buf, sizeof(buf), "%.4gM", static_cast<double>(n) / 1e6);
    } else if (n >= 1000 && n % 100 == 0) {
        std::snprintf(buf, sizeof(buf), "%.4gk", static_cast<double>(n) / 1e3);
    } else {
        std::snprintf(buf, sizeof(buf), "%llu", static_cast<unsigned long long>(n));
    }
    return buf;
}

Preset desk_small() {
    Preset p;
    p.name = "desk-small";
    p.sets = {make_set(Pattern::Consecutive, 160'000, 100'000, 1),
              make_set(Pattern::Consecutive, 1'600'000, 100'000, 2),
              make_set(Pattern::Random, 1'600'000, 100'000, 3)};
    p.mixes = default_mixes();
    p.indexes = default_indexes();
    return p;
}

Preset desk_large() {
    Preset p;
    p.name = "desk-large";
    p.sets = {make_set(Pattern::Consecutive, 1'600'000, 1'000'000, 1),
              make_set(Pattern::Consecutive, 16'000'000, 1'000'000, 2),
              make_set(Pattern::Random, 16'000'000, 1'000'000, 3)};
    p.mixes = default_mixes();
    p.indexes = default_indexes();
    return p;
}

Preset preset_by_name(const std::string& name) {
    if (name == "desk-small") return desk_small();
    if (name == "desk-large") return desk_large();
    throw std::invalid_argument("unknown preset: " + name);
}

Preset parse_preset(const std::string& text) {
    Preset p;
    p.mixes = default_mixes();
    p.indexes = default_indexes();

    PresetSet* current = nullptr;
    std::istringstream in(text);
    std::string raw_line;
    std::size_t line_no = 0;
    while (std::getline(in, raw_line)) {
        ++line_no;
        auto hash = raw_line.find('#');
        if (hash != std::string::npos) raw_line.erase(hash);
        std::string line = trim(raw_line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') fail(line_no, "unterminated section header");
            auto header = words(line.substr(1, line.size() - 2));
            if (header.size() != 2 || header[0] != "set") fail(line_no, "expected [set <label>]");
            p.sets.emplace_back();
            current = &p.sets.back();
            current->label = header[1];
            continue;
        }

        auto eq = line.find('=');
        if (eq == std::string::npos) fail(line_no, "expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));

        if (current == nullptr) {
            if (key == "name") p.name = value;
            else if (key == "warmup_reads") p.warmup_reads = parse_count(value, line_no);
            else if (key == "indexes") p.indexes = words(value);
            else if (key == "mixes") p.mixes = words(value);
            else fail(line_no, "unknown key '" + key + "'");
        } else {
            auto& wl = current->workload;
            if (key == "pattern") {
                try {
                    wl.pattern = pattern_from_string(value);
                } catch (const std::exception& e) {
                    fail(line_no, e.what());
                }
            } else if (key == "population") wl.population = parse_count(value, line_no);
            else if (key == "domain_lo") wl.domain_lo = parse_count(value, line_no);
            else if (key == "domain_hi") wl.domain_hi = parse_count(value, line_no);
            else if (key == "requests") wl.request_count = parse_count(value, line_no);
            else if (key == "seed") wl.seed = parse_count(value, line_no);
            else fail(line_no, "unknown key '" + key + "'");
        }
    }

    if (p.name.empty()) throw std::runtime_error("preset has no name");
    if (p.sets.empty()) throw std::runtime_error("preset has no key sets");

    // Surface bad cell definitions at load time rather than mid-matrix.
    try {
        for (const auto& index : p.indexes) (void)make_index(index);
        for (const auto& set : p.sets) {
            for (const auto& mix_name : p.mixes) {
                WorkloadConfig wl = set.workload;
                wl.mix = builtin_mix(mix_name);
                validate_config(wl);
            }
        }
    } catch (const std::invalid_argument& e) {
        throw std::runtime_error(std::string("preset: ") + e.what());
    }
    return p;
}

Preset load_preset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open preset: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_preset(buf.str());
}

MatrixResult run_matrix(const Preset& preset, const MatrixOptions& options) {
    MatrixResult result;
    const std::size_t total = preset.sets.size() * preset.mixes.size() * preset.indexes.size();
    std::size_t done = 0;

    for (const auto& set : preset.sets) {
        for (const auto& mix_name : preset.mixes) {
            for (const auto& index : preset.indexes) {
                ++done;
                std::string id = index + " " + set.label + " " + mix_name;
                char prefix[32];
                std::snprintf(prefix, sizeof(prefix), "[%zu/%zu] ", done, total);
                try {
                    ExperimentConfig cfg;
                    cfg.index_name = index;
                    cfg.workload = set.workload;
                    cfg.workload.mix = builtin_mix(mix_name);
                    cfg.warmup_reads = preset.warmup_reads;
                    cfg.collect_counters = options.collect_counters;
                    cfg.event_map_path = options.event_map_path;

                    RunReport report = run_experiment(cfg);
                    result.rows.push_back(make_report_row(report));
                    if (options.progress) {
                        char line[160];
                        std::snprintf(line, sizeof(line), "%s%s: %.2fs run, %.3f us/op",
                                      prefix, id.c_str(), report.run_seconds,
                                      report.avg_op_micros);
                        options.progress(line);
                    }
                    result.reports.push_back(std::move(report));
                } catch (const std::exception& e) {
                    result.failures.push_back(id + ": " + e.what());
                    if (options.progress) options.progress(prefix + id + ": FAILED: " + e.what());
                }
            }
        }
    }
    return result;
}

}  // namespace imb

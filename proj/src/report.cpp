#include "imb/report.hpp"

#include <cinttypes>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace imb {
namespace {

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string cell(const std::optional<double>& v) { return v ? fmt_double(*v) : ""; }

std::string cell(const std::optional<std::uint64_t>& v) {
    return v ? std::to_string(*v) : "";
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(sep, start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

std::optional<double> parse_double_cell(const std::string& s, std::size_t line_no) {
    if (s.empty()) return std::nullopt;
    try {
        std::size_t used = 0;
        double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("csv line " + std::to_string(line_no) + ": bad number '" + s + "'");
    }
}

std::optional<std::uint64_t> parse_u64_cell(const std::string& s, std::size_t line_no) {
    if (s.empty()) return std::nullopt;
    try {
        std::size_t used = 0;
        std::uint64_t v = std::stoull(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("csv line " + std::to_string(line_no) + ": bad count '" + s + "'");
    }
}

void put_optional(nlohmann::json& j, const char* key, const std::optional<double>& v) {
    if (v) j[key] = *v;
}

}  // namespace

std::string mix_label(const MixSpec& mix) {
    for (const char* name : {"read_only", "read_heavy", "write_heavy", "insert_only"}) {
        MixSpec b = builtin_mix(name);
        if (b.read == mix.read && b.update == mix.update && b.insert == mix.insert &&
            b.del == mix.del) {
            return name;
        }
    }
    char buf[96];
    std::snprintf(buf, sizeof(buf), "r%.3g_u%.3g_i%.3g_d%.3g", mix.read, mix.update, mix.insert,
                  mix.del);
    return buf;
}

ReportRow make_report_row(const RunReport& report) {
    ReportRow row;
    row.index = report.index_name;
    row.pattern = to_string(report.pattern);
    row.scale = report.population;
    row.mix = mix_label(report.mix);

    if (report.request_count > 0) row.avg_exec_time_us = report.avg_op_micros;
    if (report.instr_per_request > 0) row.instr_per_request = report.instr_per_request;
    if (report.footprint_valid) row.footprint_bytes = report.footprint_bytes;

    const auto& t = report.tmam;
    if (t.cpi_valid) row.cpi = t.cpi;
    if (t.level1_valid) {
        row.retiring = t.level1.retiring;
        row.bad_speculation = t.level1.bad_speculation;
        row.frontend_bound = t.level1.frontend_bound;
        row.backend_bound = t.level1.backend_bound;
    }
    if (t.backend_valid) {
        row.core_bound = t.backend.core_bound;
        row.memory_bound = t.backend.memory_bound;
    }
    if (t.memory_valid) {
        row.l1_bound = t.memory.l1_bound;
        row.l2_bound = t.memory.l2_bound;
        row.l3_bound = t.memory.l3_bound;
        row.dram_bound = t.memory.dram_bound;
        row.store_bound = t.memory.store_bound;
    }
    return row;
}

const std::string& csv_header() {
    static const std::string header =
        "index,pattern,scale,mix,avg_exec_time_us,instr_per_request,cpi,footprint_bytes,"
        "retiring,bad_speculation,frontend_bound,backend_bound,core_bound,memory_bound,"
        "l1_bound,l2_bound,l3_bound,dram_bound,store_bound";
    return header;
}

std::string to_csv(const std::vector<ReportRow>& rows) {
    std::ostringstream out;
    out << csv_header() << '\n';
    for (const auto& r : rows) {
        out << r.index << ',' << r.pattern << ',' << r.scale << ',' << r.mix << ','
            << cell(r.avg_exec_time_us) << ',' << cell(r.instr_per_request) << ',' << cell(r.cpi)
            << ',' << cell(r.footprint_bytes) << ',' << cell(r.retiring) << ','
            << cell(r.bad_speculation) << ',' << cell(r.frontend_bound) << ','
            << cell(r.backend_bound) << ',' << cell(r.core_bound) << ',' << cell(r.memory_bound)
            << ',' << cell(r.l1_bound) << ',' << cell(r.l2_bound) << ',' << cell(r.l3_bound) << ','
            << cell(r.dram_bound) << ',' << cell(r.store_bound) << '\n';
    }
    return out.str();
}

std::vector<ReportRow> rows_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    std::vector<ReportRow> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line_no == 1) {
            if (line != csv_header()) throw std::runtime_error("unrecognized csv header");
            continue;
        }
        if (line.empty()) continue;
        auto cells = split(line, ',');
        if (cells.size() != 19) {
            throw std::runtime_error("csv line " + std::to_string(line_no) + ": expected 19 cells, got " +
                                     std::to_string(cells.size()));
        }
        ReportRow r;
        r.index = cells[0];
        r.pattern = cells[1];
        r.scale = parse_u64_cell(cells[2], line_no).value_or(0);
        r.mix = cells[3];
        r.avg_exec_time_us = parse_double_cell(cells[4], line_no);
        r.instr_per_request = parse_double_cell(cells[5], line_no);
        r.cpi = parse_double_cell(cells[6], line_no);
        r.footprint_bytes = parse_u64_cell(cells[7], line_no);
        r.retiring = parse_double_cell(cells[8], line_no);
        r.bad_speculation = parse_double_cell(cells[9], line_no);
        r.frontend_bound = parse_double_cell(cells[10], line_no);
        r.backend_bound = parse_double_cell(cells[11], line_no);
        r.core_bound = parse_double_cell(cells[12], line_no);
        r.memory_bound = parse_double_cell(cells[13], line_no);
        r.l1_bound = parse_double_cell(cells[14], line_no);
        r.l2_bound = parse_double_cell(cells[15], line_no);
        r.l3_bound = parse_double_cell(cells[16], line_no);
        r.dram_bound = parse_double_cell(cells[17], line_no);
        r.store_bound = parse_double_cell(cells[18], line_no);
        rows.push_back(std::move(r));
    }
    return rows;
}

nlohmann::json to_json(const ReportRow& row) {
    nlohmann::json j;
    j["index"] = row.index;
    j["pattern"] = row.pattern;
    j["scale"] = row.scale;
    j["mix"] = row.mix;
    put_optional(j, "avg_exec_time_us", row.avg_exec_time_us);
    put_optional(j, "instr_per_request", row.instr_per_request);
    put_optional(j, "cpi", row.cpi);
    if (row.footprint_bytes) j["footprint_bytes"] = *row.footprint_bytes;
    put_optional(j, "retiring", row.retiring);
    put_optional(j, "bad_speculation", row.bad_speculation);
    put_optional(j, "frontend_bound", row.frontend_bound);
    put_optional(j, "backend_bound", row.backend_bound);
    put_optional(j, "core_bound", row.core_bound);
    put_optional(j, "memory_bound", row.memory_bound);
    put_optional(j, "l1_bound", row.l1_bound);
    put_optional(j, "l2_bound", row.l2_bound);
    put_optional(j, "l3_bound", row.l3_bound);
    put_optional(j, "dram_bound", row.dram_bound);
    put_optional(j, "store_bound", row.store_bound);
    return j;
}

ReportRow row_from_json(const nlohmann::json& j) {
    ReportRow r;
    r.index = j.at("index").get<std::string>();
    r.pattern = j.at("pattern").get<std::string>();
    r.scale = j.at("scale").get<std::uint64_t>();
    r.mix = j.at("mix").get<std::string>();
    auto opt_double = [&](const char* key) -> std::optional<double> {
        if (!j.contains(key)) return std::nullopt;
        return j.at(key).get<double>();
    };
    r.avg_exec_time_us = opt_double("avg_exec_time_us");
    r.instr_per_request = opt_double("instr_per_request");
    r.cpi = opt_double("cpi");
    if (j.contains("footprint_bytes")) r.footprint_bytes = j.at("footprint_bytes").get<std::uint64_t>();
    r.retiring = opt_double("retiring");
    r.bad_speculation = opt_double("bad_speculation");
    r.frontend_bound = opt_double("frontend_bound");
    r.backend_bound = opt_double("backend_bound");
    r.core_bound = opt_double("core_bound");
    r.memory_bound = opt_double("memory_bound");
    r.l1_bound = opt_double("l1_bound");
    r.l2_bound = opt_double("l2_bound");
    r.l3_bound = opt_double("l3_bound");
    r.dram_bound = opt_double("dram_bound");
    r.store_bound = opt_double("store_bound");
    return r;
}

nlohmann::json rows_to_json(const std::vector<ReportRow>& rows) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rows) arr.push_back(to_json(r));
    return arr;
}

std::vector<ReportRow> rows_from_json(const nlohmann::json& j) {
    std::vector<ReportRow> rows;
    for (const auto& item : j) rows.push_back(row_from_json(item));
    return rows;
}

nlohmann::json to_json(const RunReport& report) {
    nlohmann::json j;
    j["index"] = report.index_name;
    j["pattern"] = to_string(report.pattern);
    j["population"] = report.population;
    j["request_count"] = report.request_count;
    j["mix"] = {{"read", report.mix.read},
                {"update", report.mix.update},
                {"insert", report.mix.insert},
                {"delete", report.mix.del},
                {"label", mix_label(report.mix)}};
    j["seed"] = report.seed;
    j["phases"] = {{"populate_seconds", report.populate_seconds},
                   {"warmup_seconds", report.warmup_seconds},
                   {"run_seconds", report.run_seconds}};
    if (report.request_count > 0) j["avg_exec_time_us"] = report.avg_op_micros;
    j["outcomes"] = {{"ok", report.outcomes.ok},
                     {"already_exists", report.outcomes.already_exists},
                     {"not_found", report.outcomes.not_found}};
    j["checksum"] = report.checksum;
    j["memory"] = {{"footprint_valid", report.footprint_valid},
                   {"footprint_bytes", report.footprint_bytes},
                   {"peak_rss_bytes", report.peak_rss_bytes}};

    nlohmann::json counters;
    counters["available"] = report.counters_available;
    counters["problems"] = report.counter_problems;
    counters["counts"] = nlohmann::json::object();
    counters["multiplex_ratio"] = nlohmann::json::object();
    for (const auto& [name, value] : report.sample.counts) counters["counts"][name] = value;
    for (const auto& [name, ratio] : report.sample.multiplex_ratio)
        counters["multiplex_ratio"][name] = ratio;
    j["counters"] = std::move(counters);

    nlohmann::json attribution = nlohmann::json::object();
    const auto& t = report.tmam;
    if (t.cpi_valid) attribution["cpi"] = t.cpi;
    if (report.instr_per_request > 0) j["instr_per_request"] = report.instr_per_request;
    if (t.level1_valid) {
        attribution["level1"] = {{"retiring", t.level1.retiring},
                                 {"bad_speculation", t.level1.bad_speculation},
                                 {"frontend_bound", t.level1.frontend_bound},
                                 {"backend_bound", t.level1.backend_bound}};
    }
    if (t.backend_valid) {
        attribution["backend"] = {{"core_bound", t.backend.core_bound},
                                  {"memory_bound", t.backend.memory_bound}};
    }
    if (t.memory_valid) {
        attribution["memory_tiers"] = {{"l1_bound", t.memory.l1_bound},
                                       {"l2_bound", t.memory.l2_bound},
                                       {"l3_bound", t.memory.l3_bound},
                                       {"dram_bound", t.memory.dram_bound},
                                       {"store_bound", t.memory.store_bound}};
        attribution["memory_tiers_raw"] = {{"l1_bound", t.memory_raw.l1_bound},
                                           {"l2_bound", t.memory_raw.l2_bound},
                                           {"l3_bound", t.memory_raw.l3_bound},
                                           {"dram_bound", t.memory_raw.dram_bound},
                                           {"store_bound", t.memory_raw.store_bound}};
    }
    j["attribution"] = std::move(attribution);
    return j;
}

std::string to_table(const std::vector<ReportRow>& rows) {
    std::ostringstream out;
    char buf[640];
    std::snprintf(buf, sizeof(buf), "%-6s %-11s %10s %-11s %12s %11s %7s %10s %6s %6s %6s %6s %6s\n",
                  "index", "pattern", "scale", "mix", "time_us/op", "instr/op", "cpi",
                  "foot_mib", "ret", "bad", "fe", "be", "mem");
    out << buf;

    auto num = [](char* dst, std::size_t n, const std::optional<double>& v, const char* fmt) {
        if (v) std::snprintf(dst, n, fmt, *v);
        else std::snprintf(dst, n, "-");
    };
    for (const auto& r : rows) {
        char time_s[32], instr_s[32], cpi_s[32], foot_s[32], ret_s[32], bad_s[32], fe_s[32],
            be_s[32], mem_s[32];
        num(time_s, sizeof(time_s), r.avg_exec_time_us, "%.3f");
        num(instr_s, sizeof(instr_s), r.instr_per_request, "%.1f");
        num(cpi_s, sizeof(cpi_s), r.cpi, "%.3f");
        if (r.footprint_bytes)
            std::snprintf(foot_s, sizeof(foot_s), "%.1f",
                          static_cast<double>(*r.footprint_bytes) / (1024.0 * 1024.0));
        else
            std::snprintf(foot_s, sizeof(foot_s), "-");
        num(ret_s, sizeof(ret_s), r.retiring, "%.3f");
        num(bad_s, sizeof(bad_s), r.bad_speculation, "%.3f");
        num(fe_s, sizeof(fe_s), r.frontend_bound, "%.3f");
        num(be_s, sizeof(be_s), r.backend_bound, "%.3f");
        num(mem_s, sizeof(mem_s), r.memory_bound, "%.3f");

        std::snprintf(buf, sizeof(buf),
                      "%-6s %-11s %10" PRIu64 " %-11s %12s %11s %7s %10s %6s %6s %6s %6s %6s\n",
                      r.index.c_str(), r.pattern.c_str(), r.scale, r.mix.c_str(), time_s, instr_s,
                      cpi_s, foot_s, ret_s, bad_s, fe_s, be_s, mem_s);
        out << buf;
    }
    return out.str();
}

}  // namespace imb

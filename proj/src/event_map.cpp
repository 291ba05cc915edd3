#include "imb/event_map.hpp"

#include <linux/perf_event.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace imb {
namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

[[noreturn]] void fail(std::size_t line_no, const std::string& what) {
    throw std::runtime_error("event map line " + std::to_string(line_no) + ": " + what);
}

EventSpec parse_value(const std::string& value, std::size_t line_no) {
    static const std::map<std::string, std::uint64_t> hw = {
        {"cycles", PERF_COUNT_HW_CPU_CYCLES},
        {"instructions", PERF_COUNT_HW_INSTRUCTIONS},
        {"cache-references", PERF_COUNT_HW_CACHE_REFERENCES},
        {"cache-misses", PERF_COUNT_HW_CACHE_MISSES},
        {"branches", PERF_COUNT_HW_BRANCH_INSTRUCTIONS},
        {"branch-misses", PERF_COUNT_HW_BRANCH_MISSES},
        {"ref-cycles", PERF_COUNT_HW_REF_CPU_CYCLES},
    };
    static const std::map<std::string, std::uint64_t> sw = {
        {"cpu-clock", PERF_COUNT_SW_CPU_CLOCK},
        {"task-clock", PERF_COUNT_SW_TASK_CLOCK},
        {"page-faults", PERF_COUNT_SW_PAGE_FAULTS},
        {"context-switches", PERF_COUNT_SW_CONTEXT_SWITCHES},
        {"cpu-migrations", PERF_COUNT_SW_CPU_MIGRATIONS},
    };

    auto colon = value.find(':');
    if (colon == std::string::npos) fail(line_no, "expected <kind>:<event>, got '" + value + "'");
    std::string kind = value.substr(0, colon);
    std::string rest = value.substr(colon + 1);
    if (rest.empty()) fail(line_no, "empty event in '" + value + "'");

    if (kind == "hw" || kind == "sw") {
        const auto& table = kind == "hw" ? hw : sw;
        auto it = table.find(rest);
        if (it == table.end()) fail(line_no, "unknown " + kind + " event '" + rest + "'");
        return {kind == "hw" ? PERF_TYPE_HARDWARE : PERF_TYPE_SOFTWARE, it->second};
    }
    if (kind == "raw") {
        std::size_t used = 0;
        std::uint64_t config = 0;
        try {
            config = std::stoull(rest, &used, 0);
        } catch (const std::exception&) {
            fail(line_no, "bad raw encoding '" + rest + "'");
        }
        if (used != rest.size()) fail(line_no, "bad raw encoding '" + rest + "'");
        return {PERF_TYPE_RAW, config};
    }
    fail(line_no, "unknown event kind '" + kind + "'");
}

// 0 = no match, higher is more specific.
int section_score(const std::string& header, const CpuId& id) {
    if (header == "generic") return 1;
    auto c1 = header.find(':');
    auto c2 = header.rfind(':');
    if (c1 == std::string::npos || c2 == c1) return 0;
    std::string vendor = header.substr(0, c1);
    std::string family = header.substr(c1 + 1, c2 - c1 - 1);
    std::string model = header.substr(c2 + 1);
    if (vendor != id.vendor || family != std::to_string(id.family)) return 0;
    if (model == "*") return 2;
    if (model == std::to_string(id.model)) return 3;
    return 0;
}

struct Section {
    std::string header;
    std::map<std::string, EventSpec> events;
    std::uint64_t issue_width = 0;  // 0 = not set
};

}  // namespace

CpuId detect_cpu() {
    CpuId id;
    std::ifstream in("/proc/cpuinfo");
    std::string line;
    while (std::getline(in, line)) {
        auto colon = line.find(':');
        if (colon == std::string::npos) continue;
        std::string key = trim(line.substr(0, colon));
        std::string value = trim(line.substr(colon + 1));
        if (key == "vendor_id" && id.vendor.empty()) {
            if (value == "GenuineIntel") id.vendor = "intel";
            else if (value == "AuthenticAMD") id.vendor = "amd";
            else {
                std::transform(value.begin(), value.end(), value.begin(),
                               [](unsigned char c) { return std::tolower(c); });
                id.vendor = value;
            }
        } else if (key == "cpu family" && id.family == 0) {
            id.family = std::atoi(value.c_str());
        } else if (key == "model" && id.model == 0) {
            id.model = std::atoi(value.c_str());
        } else if (!id.vendor.empty() && id.family != 0 && id.model != 0) {
            break;
        }
    }
    return id;
}

EventMap parse_event_map(const std::string& text, const CpuId& id) {
    std::vector<Section> sections;
    Section* current = nullptr;

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
            sections.push_back({trim(line.substr(1, line.size() - 2)), {}, 0});
            current = &sections.back();
            continue;
        }

        auto eq = line.find('=');
        if (eq == std::string::npos) fail(line_no, "expected name = value");
        if (current == nullptr) fail(line_no, "entry before any section header");
        std::string name = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (name.empty()) fail(line_no, "empty event name");

        if (name == "issue_width") {
            int width = std::atoi(value.c_str());
            if (width <= 0) fail(line_no, "bad issue_width '" + value + "'");
            current->issue_width = static_cast<std::uint64_t>(width);
        } else {
            current->events[name] = parse_value(value, line_no);
        }
    }

    // Layer the best-matching section over the generic one.
    const Section* generic = nullptr;
    const Section* best = nullptr;
    int best_score = 0;
    for (const auto& s : sections) {
        int score = section_score(s.header, id);
        if (s.header == "generic") generic = &s;
        if (score > best_score) {
            best_score = score;
            best = &s;
        }
    }

    EventMap out;
    if (generic != nullptr) {
        out.events = generic->events;
        if (generic->issue_width != 0) out.issue_width = generic->issue_width;
        out.matched_section = generic->header;
    }
    if (best != nullptr && best != generic) {
        for (const auto& [name, spec] : best->events) out.events[name] = spec;
        if (best->issue_width != 0) out.issue_width = best->issue_width;
        out.matched_section = best->header;
    }
    return out;
}

EventMap load_event_map(const std::string& path, const CpuId& id) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open event map: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_event_map(buf.str(), id);
}

const char* default_event_map_text() {
    return R"(# Counter encodings for the pipeline stall accounting, keyed by CPU
# identity. Section headers are [vendor:family:model]; the model may be *
# and [generic] applies everywhere. The most specific section wins and is
# layered over generic entries.
#
# Values are symbolic perf events (hw:..., sw:...) or raw PMU encodings
# (raw:0x...), where config packs event | umask<<8 | cmask<<24.

[generic]
issue_width = 4
cycles = hw:cycles
instructions = hw:instructions

# Skylake-SP and Cascade Lake server cores.
[intel:6:85]
issue_width = 4
cycles = hw:cycles
instructions = hw:instructions
slots_retired = raw:0x000002c2
slots_issued = raw:0x0000010e
recovery_cycles = raw:0x0000010d
fe_undelivered = raw:0x0000019c
stalls_total = raw:0x040004a3
stalls_mem_any = raw:0x140014a3
stalls_l1d_miss = raw:0x0c000ca3
stalls_l2_miss = raw:0x050005a3
stalls_l3_miss = raw:0x060006a3
bound_on_stores = raw:0x000040a6
)";
}

const std::vector<std::string>& known_event_names() {
    static const std::vector<std::string> names = {
        "cycles",          "instructions",   "slots_retired",  "slots_issued",
        "recovery_cycles", "fe_undelivered", "stalls_total",   "stalls_mem_any",
        "stalls_l1d_miss", "stalls_l2_miss", "stalls_l3_miss", "bound_on_stores",
    };
    return names;
}

}  // namespace imb

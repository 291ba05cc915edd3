#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace imb {

struct CpuId {
    std::string vendor;  // "intel", "amd", ...
    int family = 0;
    int model = 0;
};

CpuId detect_cpu();

// Type/config pair as understood by perf_event_open.
struct EventSpec {
    std::uint32_t type = 0;
    std::uint64_t config = 0;

    bool operator==(const EventSpec&) const = default;
};

// Maps the abstract counter names the analysis needs onto hardware event
// encodings for one CPU. Files hold one section per CPU identity:
//
//   [intel:6:85]
//   cycles = hw:cycles
//   stalls_total = raw:0x040004a3
//
// Section headers may use * as a model wildcard, and [generic] applies
// everywhere. The most specific matching section wins; its entries are
// layered over the generic ones.
struct EventMap {
    std::map<std::string, EventSpec> events;
    std::string matched_section;
    std::uint64_t issue_width = 4;
};

EventMap parse_event_map(const std::string& text, const CpuId& id);
EventMap load_event_map(const std::string& path, const CpuId& id);

// The copy of data/eventmaps/default.eventmap that is compiled in, so the
// tool works without any data files installed.
const char* default_event_map_text();

// Every abstract counter name the stall accounting can consume, in a
// stable order.
const std::vector<std::string>& known_event_names();

}  // namespace imb

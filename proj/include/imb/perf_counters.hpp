#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "imb/event_map.hpp"

namespace imb {

// One measured phase worth of counter readings. Keys follow the event map;
// an absent key means that counter could not be collected. Values are
// scaled for multiplexing (value * enabled / running), and the ratio
// running / enabled is kept per counter so reports can flag heavy sharing.
struct CounterSample {
    std::uint64_t issue_width = 4;
    std::map<std::string, std::uint64_t> counts;
    std::map<std::string, double> multiplex_ratio;

    bool has(const std::string& name) const { return counts.count(name) != 0; }
    std::uint64_t get(const std::string& name) const {
        auto it = counts.find(name);
        return it == counts.end() ? 0 : it->second;
    }
    std::uint64_t slots() const { return issue_width * get("cycles"); }
};

enum class CounterStatus : std::uint8_t { Ok, PermissionDenied, Unsupported, Failed };
const char* to_string(CounterStatus status);

// Opens one self-monitoring counter per event-map entry. Events that the
// kernel rejects are recorded with a status instead of aborting, so a run
// on a machine without a usable PMU still produces timing results; the
// stall accounting is simply marked unavailable downstream.
class PerfSession {
  public:
    struct Counter {
        std::string name;
        EventSpec spec;
        CounterStatus status = CounterStatus::Failed;
        int error = 0;  // errno when status != Ok
        int fd = -1;
    };

    explicit PerfSession(const EventMap& map);
    ~PerfSession();
    PerfSession(const PerfSession&) = delete;
    PerfSession& operator=(const PerfSession&) = delete;

    bool available() const;
    const std::vector<Counter>& counters() const { return counters_; }
    std::vector<std::string> problems() const;

    void start();
    CounterSample stop();

  private:
    std::vector<Counter> counters_;
    std::uint64_t issue_width_;
};

}  // namespace imb

#include "imb/perf_counters.hpp"

#include <linux/perf_event.h>
#include <sys/ioctl.h>
#include <sys/syscall.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstring>

namespace imb {
namespace {

long perf_event_open(perf_event_attr* attr, pid_t pid, int cpu, int group_fd,
                     unsigned long flags) {
    return syscall(SYS_perf_event_open, attr, pid, cpu, group_fd, flags);
}

CounterStatus status_from_errno(int err) {
    switch (err) {
        case EACCES:
        case EPERM:
            return CounterStatus::PermissionDenied;
        case ENOENT:
        case ENODEV:
        case ENOSYS:
        case EOPNOTSUPP:
        case EINVAL:
            return CounterStatus::Unsupported;
        default:
            return CounterStatus::Failed;
    }
}

}  // namespace

const char* to_string(CounterStatus status) {
    switch (status) {
        case CounterStatus::Ok: return "ok";
        case CounterStatus::PermissionDenied: return "permission denied";
        case CounterStatus::Unsupported: return "unsupported";
        case CounterStatus::Failed: return "failed";
    }
    return "?";
}

PerfSession::PerfSession(const EventMap& map) : issue_width_(map.issue_width) {
    counters_.reserve(map.events.size());
    for (const auto& [name, spec] : map.events) {
        Counter c;
        c.name = name;
        c.spec = spec;

        perf_event_attr attr;
        std::memset(&attr, 0, sizeof(attr));
        attr.size = sizeof(attr);
        attr.type = spec.type;
        attr.config = spec.config;
        attr.disabled = 1;
        attr.exclude_kernel = 1;
        attr.exclude_hv = 1;
        attr.read_format = PERF_FORMAT_TOTAL_TIME_ENABLED | PERF_FORMAT_TOTAL_TIME_RUNNING;

        long fd = perf_event_open(&attr, 0, -1, -1, 0);
        if (fd < 0) {
            c.error = errno;
            c.status = status_from_errno(c.error);
        } else {
            c.fd = static_cast<int>(fd);
            c.status = CounterStatus::Ok;
        }
        counters_.push_back(c);
    }
}

PerfSession::~PerfSession() {
    for (auto& c : counters_) {
        if (c.fd >= 0) close(c.fd);
    }
}

bool PerfSession::available() const {
    for (const auto& c : counters_) {
        if (c.status == CounterStatus::Ok) return true;
    }
    return false;
}

std::vector<std::string> PerfSession::problems() const {
    std::vector<std::string> out;
    for (const auto& c : counters_) {
        if (c.status == CounterStatus::Ok) continue;
        out.push_back(c.name + ": " + to_string(c.status) + " (" + std::strerror(c.error) + ")");
    }
    return out;
}

void PerfSession::start() {
    for (const auto& c : counters_) {
        if (c.fd < 0) continue;
        ioctl(c.fd, PERF_EVENT_IOC_RESET, 0);
        ioctl(c.fd, PERF_EVENT_IOC_ENABLE, 0);
    }
}

CounterSample PerfSession::stop() {
    CounterSample sample;
    sample.issue_width = issue_width_;
    for (const auto& c : counters_) {
        if (c.fd < 0) continue;
        ioctl(c.fd, PERF_EVENT_IOC_DISABLE, 0);

        std::uint64_t buf[3] = {0, 0, 0};  // value, time_enabled, time_running
        ssize_t got = read(c.fd, buf, sizeof(buf));
        if (got != static_cast<ssize_t>(sizeof(buf))) continue;

        std::uint64_t value = buf[0];
        std::uint64_t enabled = buf[1];
        std::uint64_t running = buf[2];
        if (enabled > 0 && running == 0) continue;  // never scheduled on a PMU
        double ratio = enabled == 0 ? 1.0 : static_cast<double>(running) / static_cast<double>(enabled);
        if (running > 0 && running < enabled) {
            double scaled = static_cast<double>(value) *
                            (static_cast<double>(enabled) / static_cast<double>(running));
            value = static_cast<std::uint64_t>(std::llround(scaled));
        }
        sample.counts[c.name] = value;
        sample.multiplex_ratio[c.name] = ratio;
    }
    return sample;
}

}  // namespace imb

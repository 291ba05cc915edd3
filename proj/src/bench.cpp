#include "imb/bench.hpp"

#include <unistd.h>

#include <chrono>
#include <condition_variable>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "imb/alex_index.hpp"
#include "imb/alloc_stats.hpp"
#include "imb/art_index.hpp"
#include "imb/btree_index.hpp"
#include "imb/event_map.hpp"

namespace imb {
namespace {

std::uint64_t read_rss_bytes() {
    std::ifstream in("/proc/self/statm");
    std::uint64_t total_pages = 0;
    std::uint64_t resident_pages = 0;
    in >> total_pages >> resident_pages;
    return resident_pages * static_cast<std::uint64_t>(sysconf(_SC_PAGESIZE));
}

// Periodically appends "timestamp_ms,rss_bytes" rows to a sidecar file.
// One sample is taken at start and one at stop, so even runs shorter than
// the interval produce a usable trace.
class RssSampler {
  public:
    void start(const std::string& path, std::uint64_t interval_ms) {
        out_.open(path, std::ios::trunc);
        if (!out_) throw std::runtime_error("cannot open rss trace: " + path);
        out_ << "timestamp_ms,rss_bytes\n";
        t0_ = std::chrono::steady_clock::now();
        sample_once();
        worker_ = std::thread([this, interval_ms] {
            std::unique_lock<std::mutex> lock(mutex_);
            auto period = std::chrono::milliseconds(interval_ms);
            while (!cv_.wait_for(lock, period, [this] { return stop_; })) sample_once();
        });
        running_ = true;
    }

    std::uint64_t stop() {
        if (running_) {
            {
                std::lock_guard<std::mutex> lock(mutex_);
                stop_ = true;
            }
            cv_.notify_all();
            worker_.join();
            sample_once();
            out_.close();
            running_ = false;
        }
        return peak_;
    }

    ~RssSampler() { stop(); }

  private:
    void sample_once() {
        std::uint64_t rss = read_rss_bytes();
        if (rss > peak_) peak_ = rss;
        auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - t0_)
                      .count();
        out_ << ms << ',' << rss << '\n';
        out_.flush();
    }

    std::ofstream out_;
    std::chrono::steady_clock::time_point t0_;
    std::thread worker_;
    std::mutex mutex_;
    std::condition_variable cv_;
    bool stop_ = false;
    bool running_ = false;
    std::uint64_t peak_ = 0;
};

void tally(OutcomeTally& t, OpStatus status) {
    switch (status) {
        case OpStatus::Ok: ++t.ok; break;
        case OpStatus::AlreadyExists: ++t.already_exists; break;
        case OpStatus::NotFound: ++t.not_found; break;
    }
}

}  // namespace

std::unique_ptr<Index> make_index(const std::string& name) {
    if (name == "alex") return std::make_unique<AlexIndex>();
    if (name == "art") return std::make_unique<ArtIndex>();
    if (name == "btree") return std::make_unique<BPlusTreeIndex>();
    if (name == "oracle") return std::make_unique<OracleIndex>();
    if (name == "noop") return std::make_unique<NoopIndex>();
    throw std::invalid_argument("unknown index: " + name);
}

double time_phase(const std::function<void()>& fn) {
    auto t0 = std::chrono::steady_clock::now();
    fn();
    auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(t1 - t0).count();
}

RunReport run_experiment(const ExperimentConfig& cfg) {
    validate_config(cfg.workload);
    auto index = make_index(cfg.index_name);

    // All request streams are materialized up front so their memory never
    // pollutes the index footprint reading.
    Rng master(cfg.workload.seed);
    Rng population_rng = master.split();
    Rng request_rng = master.split();
    Rng warmup_rng = master.split();
    auto population = generate_population(cfg.workload, population_rng);
    auto requests = generate_requests(cfg.workload, population, request_rng);
    auto warmup = warmup_stream(population, cfg.warmup_reads, warmup_rng);

    RunReport report;
    report.index_name = index->name();
    report.pattern = cfg.workload.pattern;
    report.population = population.size();
    report.request_count = requests.size();
    report.mix = cfg.workload.mix;
    report.seed = cfg.workload.seed;

    RssSampler rss;
    if (!cfg.rss_csv_path.empty()) rss.start(cfg.rss_csv_path, cfg.rss_interval_ms);

    const std::uint64_t heap_before = alloc_stats::live_bytes();
    report.populate_seconds = time_phase([&] {
        if (!population.empty()) index->bulk_load(population);
    });
    const std::uint64_t heap_after = alloc_stats::live_bytes();
    report.footprint_valid = alloc_stats::shim_active();
    report.footprint_bytes = heap_after > heap_before ? heap_after - heap_before : 0;

    std::uint64_t checksum = 0;
    report.warmup_seconds = time_phase([&] {
        for (const auto& r : warmup) {
            if (auto v = index->read(r.key)) checksum += *v;
        }
    });

    std::unique_ptr<PerfSession> session;
    if (cfg.collect_counters) {
        EventMap map = cfg.event_map_path.empty()
                           ? parse_event_map(default_event_map_text(), detect_cpu())
                           : load_event_map(cfg.event_map_path, detect_cpu());
        session = std::make_unique<PerfSession>(map);
        report.counter_problems = session->problems();
    }

    if (session) session->start();
    report.run_seconds = time_phase([&] {
        for (const auto& r : requests) {
            switch (r.kind) {
                case RequestKind::Read: {
                    auto v = index->read(r.key);
                    if (v) {
                        checksum += *v;
                        ++report.outcomes.ok;
                    } else {
                        ++report.outcomes.not_found;
                    }
                    break;
                }
                case RequestKind::Update:
                    tally(report.outcomes, index->update(r.key, r.value));
                    break;
                case RequestKind::Insert:
                    tally(report.outcomes, index->insert(r.key, r.value));
                    break;
                case RequestKind::Delete:
                    tally(report.outcomes, index->erase(r.key));
                    break;
            }
        }
    });
    if (session) {
        report.sample = session->stop();
        report.counters_available = session->available();
    }

    report.checksum = checksum;
    if (report.request_count > 0) {
        report.avg_op_micros = report.run_seconds * 1e6 / static_cast<double>(report.request_count);
        std::uint64_t instructions = report.sample.get("instructions");
        if (instructions > 0) {
            report.instr_per_request =
                static_cast<double>(instructions) / static_cast<double>(report.request_count);
        }
    }
    report.tmam = compute_tmam(report.sample);
    report.peak_rss_bytes = rss.stop();
    return report;
}

std::uint64_t measure_memory_footprint(const std::string& index_name,
                                       const WorkloadConfig& workload) {
    validate_config(workload);
    Rng master(workload.seed);
    Rng population_rng = master.split();
    auto population = generate_population(workload, population_rng);

    auto index = make_index(index_name);
    const std::uint64_t before = alloc_stats::live_bytes();
    if (!population.empty()) index->bulk_load(population);
    const std::uint64_t after = alloc_stats::live_bytes();
    return after > before ? after - before : 0;
}

}  // namespace imb

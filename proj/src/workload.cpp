#include "imb/workload.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <stdexcept>
#include <unordered_set>

namespace imb {

const char* to_string(Pattern p) {
    return p == Pattern::Consecutive ? "consecutive" : "random";
}

Pattern pattern_from_string(std::string_view name) {
    if (name == "consecutive") return Pattern::Consecutive;
    if (name == "random") return Pattern::Random;
    throw std::invalid_argument("unknown pattern: " + std::string(name));
}

MixSpec builtin_mix(std::string_view name) {
    std::string n(name);
    std::replace(n.begin(), n.end(), '-', '_');
    if (n == "read_only") return {1.0, 0.0, 0.0, 0.0};
    if (n == "read_heavy") return {0.8, 0.1, 0.1, 0.0};
    if (n == "write_heavy") return {0.4, 0.3, 0.2, 0.1};
    if (n == "insert_only") return {0.0, 0.0, 1.0, 0.0};
    throw std::invalid_argument("unknown mix: " + std::string(name));
}

void validate_config(const WorkloadConfig& cfg) {
    if (std::abs(cfg.mix.sum() - 1.0) > 1e-9)
        throw std::invalid_argument("mix fractions must sum to 1");
    if (cfg.mix.read < 0 || cfg.mix.update < 0 || cfg.mix.insert < 0 || cfg.mix.del < 0)
        throw std::invalid_argument("mix fractions must not be negative");
    if (cfg.domain_hi <= cfg.domain_lo)
        throw std::invalid_argument("empty key domain");
    if (cfg.population > cfg.domain_hi - cfg.domain_lo)
        throw std::invalid_argument("population larger than the key domain");
    if (cfg.population == 0 &&
        (cfg.mix.read > 0 || cfg.mix.update > 0 || cfg.mix.del > 0))
        throw std::invalid_argument("reads, updates and deletes need a population");
}

namespace {

// Membership filter over [lo, hi): a plain bit set while the domain is
// small enough, a hash set beyond that.
class KeyFilter {
  public:
    KeyFilter(Key lo, Key hi, std::uint64_t expected) : lo_(lo) {
        const std::uint64_t span = hi - lo;
        if (span <= (std::uint64_t(1) << 31)) {
            bits_.assign(std::size_t((span + 63) / 64), 0);
        } else {
            set_.reserve(std::size_t(expected) * 2);
        }
    }

    bool contains(Key k) const {
        if (!bits_.empty()) {
            const std::uint64_t off = k - lo_;
            return (bits_[std::size_t(off >> 6)] >> (off & 63)) & 1u;
        }
        return set_.contains(k);
    }

    void add(Key k) {
        if (!bits_.empty()) {
            const std::uint64_t off = k - lo_;
            bits_[std::size_t(off >> 6)] |= std::uint64_t(1) << (off & 63);
        } else {
            set_.insert(k);
        }
    }

  private:
    Key lo_;
    std::vector<std::uint64_t> bits_;
    std::unordered_set<Key> set_;
};

RequestKind draw_kind(const MixSpec& mix, Rng& rng) {
    const double u = rng.next_fraction();
    if (u < mix.read) return RequestKind::Read;
    if (u < mix.read + mix.update) return RequestKind::Update;
    if (u < mix.read + mix.update + mix.insert) return RequestKind::Insert;
    return RequestKind::Delete;
}

}  // namespace

std::vector<std::pair<Key, Value>> generate_population(const WorkloadConfig& cfg, Rng& rng) {
    validate_config(cfg);
    std::vector<std::pair<Key, Value>> out;
    out.reserve(cfg.population);
    if (cfg.pattern == Pattern::Consecutive) {
        for (std::uint64_t i = 0; i < cfg.population; ++i)
            out.emplace_back(cfg.domain_lo + i, rng.next());
        return out;
    }
    KeyFilter seen(cfg.domain_lo, cfg.domain_hi, cfg.population);
    std::vector<Key> keys;
    keys.reserve(cfg.population);
    while (keys.size() < cfg.population) {
        const Key k = rng.uniform_range(cfg.domain_lo, cfg.domain_hi);
        if (seen.contains(k)) continue;
        seen.add(k);
        keys.push_back(k);
    }
    std::sort(keys.begin(), keys.end());
    for (Key k : keys) out.emplace_back(k, rng.next());
    return out;
}

std::vector<Request> generate_requests(const WorkloadConfig& cfg,
                                       std::span<const std::pair<Key, Value>> population,
                                       Rng& rng) {
    validate_config(cfg);
    std::vector<Request> out;
    out.reserve(cfg.request_count);

    // State for fresh insert keys.
    Key next_consecutive = population.empty() ? cfg.domain_lo
                                              : population.back().first + 1;
    std::unique_ptr<KeyFilter> taken;
    std::uint64_t taken_count = 0;
    if (cfg.pattern == Pattern::Random && cfg.mix.insert > 0) {
        taken = std::make_unique<KeyFilter>(cfg.domain_lo, cfg.domain_hi,
                                            cfg.population + cfg.request_count);
        for (const auto& [k, v] : population) taken->add(k);
        taken_count = population.size();
    }

    const std::uint64_t domain_span = cfg.domain_hi - cfg.domain_lo;
    for (std::uint64_t i = 0; i < cfg.request_count; ++i) {
        const RequestKind kind = draw_kind(cfg.mix, rng);
        Request r{kind, 0, 0};
        switch (kind) {
            case RequestKind::Read:
            case RequestKind::Delete:
                r.key = population[std::size_t(rng.uniform(population.size()))].first;
                break;
            case RequestKind::Update:
                r.key = population[std::size_t(rng.uniform(population.size()))].first;
                r.value = rng.next();
                break;
            case RequestKind::Insert:
                if (cfg.pattern == Pattern::Consecutive) {
                    r.key = next_consecutive++;
                } else {
                    if (taken_count >= domain_span)
                        throw std::invalid_argument(
                            "key domain too small for the requested inserts");
                    Key k;
                    do {
                        k = rng.uniform_range(cfg.domain_lo, cfg.domain_hi);
                    } while (taken->contains(k));
                    taken->add(k);
                    ++taken_count;
                    r.key = k;
                }
                r.value = rng.next();
                break;
        }
        out.push_back(r);
    }
    return out;
}

std::vector<Request> warmup_stream(std::span<const std::pair<Key, Value>> population,
                                   std::uint64_t count, Rng& rng) {
    std::vector<Request> out;
    if (population.empty()) return out;
    out.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        const Key k = population[std::size_t(rng.uniform(population.size()))].first;
        out.push_back({RequestKind::Read, k, 0});
    }
    return out;
}

namespace {

void put_u64_le(unsigned char* p, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) p[i] = (unsigned char)(v >> (8 * i));
}

std::uint64_t get_u64_le(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(p[i]) << (8 * i);
    return v;
}

struct FileCloser {
    void operator()(std::FILE* f) const { std::fclose(f); }
};

}  // namespace

void write_requests(const std::string& path, std::span<const Request> requests) {
    std::unique_ptr<std::FILE, FileCloser> f(std::fopen(path.c_str(), "wb"));
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    unsigned char rec[17];
    for (const Request& r : requests) {
        rec[0] = (unsigned char)r.kind;
        put_u64_le(rec + 1, r.key);
        put_u64_le(rec + 9, r.value);
        if (std::fwrite(rec, 1, sizeof rec, f.get()) != sizeof rec)
            throw std::runtime_error("short write: " + path);
    }
}

std::vector<Request> read_requests(const std::string& path) {
    std::unique_ptr<std::FILE, FileCloser> f(std::fopen(path.c_str(), "rb"));
    if (!f) throw std::runtime_error("cannot open for reading: " + path);
    std::vector<Request> out;
    unsigned char rec[17];
    while (true) {
        const std::size_t got = std::fread(rec, 1, sizeof rec, f.get());
        if (got == 0) break;
        if (got != sizeof rec)
            throw std::runtime_error("truncated request record in " + path);
        if (rec[0] > (unsigned char)RequestKind::Delete)
            throw std::runtime_error("bad request kind in " + path);
        out.push_back({RequestKind(rec[0]), get_u64_le(rec + 1), get_u64_le(rec + 9)});
    }
    return out;
}

}  // namespace imb

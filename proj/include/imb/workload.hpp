#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "imb/types.hpp"

namespace imb {

// splitmix64: tiny, fast, and the same sequence on every platform, which
// keeps generated workloads byte-identical across machines.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Unbiased draw from [0, bound) by rejection.
    std::uint64_t uniform(std::uint64_t bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        std::uint64_t r;
        do {
            r = next();
        } while (r < threshold);
        return r % bound;
    }

    std::uint64_t uniform_range(std::uint64_t lo, std::uint64_t hi) {
        return lo + uniform(hi - lo);
    }

    double next_fraction() { return double(next() >> 11) * 0x1.0p-53; }

    // Independent stream derived from this one.
    Rng split() { return Rng(next()); }

  private:
    std::uint64_t state_;
};

enum class Pattern : std::uint8_t { Consecutive, Random };

const char* to_string(Pattern p);
Pattern pattern_from_string(std::string_view name);

// Request kind fractions; must sum to 1.
struct MixSpec {
    double read = 0.0;
    double update = 0.0;
    double insert = 0.0;
    double del = 0.0;

    double sum() const { return read + update + insert + del; }
    bool operator==(const MixSpec&) const = default;
};

// read_only, read_heavy, write_heavy or insert_only.
MixSpec builtin_mix(std::string_view name);

struct WorkloadConfig {
    Pattern pattern = Pattern::Consecutive;
    std::uint64_t population = 0;  // keys loaded before any request runs
    Key domain_lo = 0;             // population and inserts draw from [domain_lo, domain_hi)
    Key domain_hi = 0;
    std::uint64_t request_count = 0;
    MixSpec mix;
    std::uint64_t seed = 1;

    bool operator==(const WorkloadConfig&) const = default;
};

// Throws std::invalid_argument when the mix does not sum to 1, the
// population does not fit the domain, or reads are requested from an
// empty population.
void validate_config(const WorkloadConfig& cfg);

// Sorted unique pairs: the first `population` keys of the domain for the
// consecutive pattern, a uniform distinct sample of it for the random one.
std::vector<std::pair<Key, Value>> generate_population(const WorkloadConfig& cfg, Rng& rng);

// Request kinds are independent draws from the mix. Read, update and
// delete keys are sampled from the population; insert keys are fresh:
// consecutive keys extend past the current maximum, random ones are drawn
// from the domain avoiding the population and earlier inserts.
std::vector<Request> generate_requests(const WorkloadConfig& cfg,
                                       std::span<const std::pair<Key, Value>> population,
                                       Rng& rng);

// Plain reads of random existing keys, used to warm caches before timing.
std::vector<Request> warmup_stream(std::span<const std::pair<Key, Value>> population,
                                   std::uint64_t count, Rng& rng);

// 17-byte little-endian records: kind, key, value.
void write_requests(const std::string& path, std::span<const Request> requests);
std::vector<Request> read_requests(const std::string& path);

}  // namespace imb

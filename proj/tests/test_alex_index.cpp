#include <doctest.h>

#include <random>
#include <string>
#include <vector>

#include "imb/alex_index.hpp"

using namespace imb;

namespace {

std::vector<std::pair<Key, Value>> consecutive(Key lo, std::size_t n) {
    std::vector<std::pair<Key, Value>> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.emplace_back(lo + i, (lo + i) * 2);
    return out;
}

}  // namespace

TEST_CASE("bulk load builds a two level tree with one stripe per root slot") {
    AlexIndex idx;
    auto items = consecutive(0, 10000);
    idx.bulk_load(items);
    auto info = idx.tree_info();
    CHECK(info.depth == 2);
    CHECK(info.inner_nodes == 1);
    CHECK(info.data_nodes == idx.config().inner_fanout);
    CHECK(idx.size() == 10000);
    std::string why;
    CHECK_MESSAGE(idx.validate(&why), why);
    for (Key k = 0; k < 10000; k += 37) {
        auto v = idx.read(k);
        REQUIRE(v.has_value());
        CHECK(*v == k * 2);
    }
    CHECK(!idx.read(10000).has_value());
}

TEST_CASE("small bulk loads stay a single node") {
    AlexIndex idx;
    auto items = consecutive(100, 50);
    idx.bulk_load(items);
    auto info = idx.tree_info();
    CHECK(info.depth == 1);
    CHECK(info.data_nodes == 1);
    std::string why;
    CHECK_MESSAGE(idx.validate(&why), why);
}

TEST_CASE("bulk load rejects unsorted or duplicated input") {
    AlexIndex idx;
    std::vector<std::pair<Key, Value>> bad{{3, 0}, {1, 0}};
    CHECK_THROWS_AS(idx.bulk_load(bad), std::invalid_argument);
    std::vector<std::pair<Key, Value>> dup{{1, 0}, {1, 1}};
    CHECK_THROWS_AS(idx.bulk_load(dup), std::invalid_argument);
}

TEST_CASE("statuses match the contract") {
    AlexIndex idx;
    CHECK(idx.insert(7, 70) == OpStatus::Ok);
    CHECK(idx.insert(7, 71) == OpStatus::AlreadyExists);
    CHECK(*idx.read(7) == 70);
    CHECK(idx.update(7, 72) == OpStatus::Ok);
    CHECK(*idx.read(7) == 72);
    CHECK(idx.update(8, 0) == OpStatus::NotFound);
    CHECK(idx.erase(8) == OpStatus::NotFound);
    CHECK(idx.erase(7) == OpStatus::Ok);
    CHECK(idx.size() == 0);
    CHECK(!idx.read(7).has_value());
}

TEST_CASE("random mixed operations stay equivalent to the reference map") {
    for (std::uint64_t seed : {11u, 22u, 33u, 44u, 55u}) {
        std::mt19937_64 gen(seed);
        AlexIndex idx;
        OracleIndex oracle;

        auto base = consecutive(0, 2000);
        idx.bulk_load(base);
        oracle.bulk_load(base);

        for (int op = 0; op < 20000; ++op) {
            Key k = gen() % 6000;
            Value v = gen();
            switch (gen() % 4) {
                case 0:
                    CHECK(idx.insert(k, v) == oracle.insert(k, v));
                    break;
                case 1: {
                    auto a = idx.read(k);
                    auto b = oracle.read(k);
                    CHECK(a == b);
                    break;
                }
                case 2:
                    CHECK(idx.update(k, v) == oracle.update(k, v));
                    break;
                case 3:
                    CHECK(idx.erase(k) == oracle.erase(k));
                    break;
            }
        }
        CHECK(idx.size() == oracle.size());
        std::vector<std::pair<Key, Value>> a, b;
        idx.collect(a);
        oracle.collect(b);
        CHECK(a == b);
        std::string why;
        CHECK_MESSAGE(idx.validate(&why), why);
    }
}

TEST_CASE("an append stream splits nodes and stays valid") {
    AlexIndex idx;
    auto base = consecutive(0, 1000);
    idx.bulk_load(base);
    for (Key k = 1000; k < 60000; ++k)
        REQUIRE(idx.insert(k, k) == OpStatus::Ok);
    CHECK(idx.size() == 60000);
    CHECK(idx.stats().node_splits > 0);
    CHECK(idx.stats().appends_without_remodel > 0);
    std::string why;
    CHECK_MESSAGE(idx.validate(&why), why);
    for (Key k = 0; k < 60000; k += 997) CHECK(idx.read(k).has_value());
    auto info = idx.tree_info();
    CHECK(info.depth >= 2);
}

TEST_CASE("splits over wide key ranges keep descent exact at every fence") {
    // Tiny nodes force constant splitting; 48-bit keys give the split
    // models slopes where rounding decides which half the fence key joins.
    // Descent must agree with where the split actually put each key.
    AlexConfig cfg;
    cfg.max_node_slots = 64;
    AlexIndex idx(cfg);
    std::mt19937_64 gen(4242);
    for (int i = 0; i < 30'000; ++i) {
        Key k = gen() >> 16;
        idx.insert(k, k);
    }
    CHECK(idx.stats().node_splits > 1000);
    std::string why;
    CHECK_MESSAGE(idx.validate(&why), why);
}

TEST_CASE("keys far outside the loaded range are routed and stored") {
    AlexIndex idx;
    auto base = consecutive(1000, 5000);
    idx.bulk_load(base);
    CHECK(idx.insert(50, 1) == OpStatus::Ok);
    CHECK(idx.insert(1'000'000, 2) == OpStatus::Ok);
    CHECK(idx.insert(0, 3) == OpStatus::Ok);
    for (Key k = 2'000'000; k < 2'020'000; ++k)
        REQUIRE(idx.insert(k, k) == OpStatus::Ok);
    CHECK(*idx.read(50) == 1);
    CHECK(*idx.read(1'000'000) == 2);
    CHECK(*idx.read(0) == 3);
    CHECK(*idx.read(2'010'000) == 2'010'000);
    std::string why;
    CHECK_MESSAGE(idx.validate(&why), why);
    std::vector<std::pair<Key, Value>> all;
    idx.collect(all);
    CHECK(all.size() == idx.size());
}

TEST_CASE("deletes shrink occupancy without breaking structure") {
    AlexIndex idx;
    auto base = consecutive(0, 8000);
    idx.bulk_load(base);
    for (Key k = 0; k < 8000; k += 2) REQUIRE(idx.erase(k) == OpStatus::Ok);
    CHECK(idx.size() == 4000);
    for (Key k = 1; k < 8000; k += 2) REQUIRE(idx.read(k).has_value());
    for (Key k = 0; k < 8000; k += 2) REQUIRE(!idx.read(k).has_value());
    std::string why;
    CHECK_MESSAGE(idx.validate(&why), why);
}

TEST_CASE("search step counter advances under lookups") {
    AlexIndex idx;
    idx.bulk_load(consecutive(0, 5000));
    idx.reset_stats();
    for (Key k = 0; k < 5000; k += 10) (void)idx.read(k);
    CHECK(idx.stats().exponential_search_steps > 0);
}

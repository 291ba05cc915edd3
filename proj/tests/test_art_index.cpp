#include <doctest.h>

#include <random>
#include <string>
#include <vector>

#include "imb/art_index.hpp"

using namespace imb;

TEST_CASE("radix bytes are big endian") {
    auto b = key_to_radix_bytes(0x0102030405060708ULL);
    for (int i = 0; i < 8; ++i) CHECK(b[std::size_t(i)] == i + 1);
    auto z = key_to_radix_bytes(0);
    for (auto x : z) CHECK(x == 0);
    auto m = key_to_radix_bytes(~Key(0));
    for (auto x : m) CHECK(x == 0xff);
}

TEST_CASE("byte order of keys follows numeric order") {
    // The whole point of the big-endian view: memcmp == integer compare.
    std::mt19937_64 gen(7);
    for (int i = 0; i < 1000; ++i) {
        Key a = gen(), b = gen();
        auto ba = key_to_radix_bytes(a), bb = key_to_radix_bytes(b);
        CHECK((a < b) == (ba < bb));
    }
}

TEST_CASE("statuses match the contract") {
    ArtIndex idx;
    CHECK(idx.insert(10, 100) == OpStatus::Ok);
    CHECK(idx.insert(10, 101) == OpStatus::AlreadyExists);
    CHECK(*idx.read(10) == 100);
    CHECK(idx.update(10, 102) == OpStatus::Ok);
    CHECK(*idx.read(10) == 102);
    CHECK(idx.update(11, 0) == OpStatus::NotFound);
    CHECK(idx.erase(11) == OpStatus::NotFound);
    CHECK(idx.erase(10) == OpStatus::Ok);
    CHECK(idx.size() == 0);
}

TEST_CASE("dense low keys grow nodes through every size class") {
    ArtIndex idx;
    // 256 keys differing only in the last byte force one node to pass
    // through 4 -> 16 -> 48 -> 256.
    for (Key k = 0; k < 256; ++k) REQUIRE(idx.insert(k, k) == OpStatus::Ok);
    auto st = idx.debug_stats();
    CHECK(st.node256 == 1);
    CHECK(st.leaves == 256);
    std::string why;
    CHECK_MESSAGE(idx.validate(&why), why);
    for (Key k = 0; k < 256; ++k) CHECK(*idx.read(k) == k);

    // Deleting back down shrinks through the same classes.
    for (Key k = 255; k >= 40; --k) REQUIRE(idx.erase(k) == OpStatus::Ok);
    st = idx.debug_stats();
    CHECK(st.node256 == 0);
    CHECK(st.node48 == 1);
    CHECK_MESSAGE(idx.validate(&why), why);

    for (Key k = 39; k >= 10; --k) REQUIRE(idx.erase(k) == OpStatus::Ok);
    st = idx.debug_stats();
    CHECK(st.node48 == 0);
    CHECK(st.node16 == 1);
    CHECK_MESSAGE(idx.validate(&why), why);

    for (Key k = 9; k >= 3; --k) REQUIRE(idx.erase(k) == OpStatus::Ok);
    st = idx.debug_stats();
    CHECK(st.node16 == 0);
    CHECK(st.node4 == 1);
    CHECK_MESSAGE(idx.validate(&why), why);
}

TEST_CASE("shared prefixes are collapsed into one node") {
    ArtIndex idx;
    // Both keys share the first seven bytes; the tree should be a single
    // node with a seven byte prefix and two leaves.
    idx.insert(0xAABBCCDD00112200ULL, 1);
    idx.insert(0xAABBCCDD00112201ULL, 2);
    auto st = idx.debug_stats();
    CHECK(st.node4 == 1);
    CHECK(st.leaves == 2);
    CHECK(st.max_depth == 2);
    std::string why;
    CHECK_MESSAGE(idx.validate(&why), why);

    // A key diverging in byte 3 splits the compressed run.
    idx.insert(0xAABBCC0000000000ULL, 3);
    st = idx.debug_stats();
    CHECK(st.node4 == 2);
    CHECK(st.leaves == 3);
    CHECK_MESSAGE(idx.validate(&why), why);
    CHECK(*idx.read(0xAABBCCDD00112200ULL) == 1);
    CHECK(*idx.read(0xAABBCCDD00112201ULL) == 2);
    CHECK(*idx.read(0xAABBCC0000000000ULL) == 3);
}

TEST_CASE("erasing down to one key folds the path back to a leaf") {
    ArtIndex idx;
    idx.insert(0xAABBCCDD00112200ULL, 1);
    idx.insert(0xAABBCCDD00112201ULL, 2);
    idx.insert(0xAABBCC0000000000ULL, 3);
    REQUIRE(idx.erase(0xAABBCC0000000000ULL) == OpStatus::Ok);
    auto st = idx.debug_stats();
    CHECK(st.node4 == 1);  // prefixes merged back together
    std::string why;
    CHECK_MESSAGE(idx.validate(&why), why);
    REQUIRE(idx.erase(0xAABBCCDD00112201ULL) == OpStatus::Ok);
    st = idx.debug_stats();
    CHECK(st.node4 == 0);
    CHECK(st.leaves == 1);
    CHECK(*idx.read(0xAABBCCDD00112200ULL) == 1);
}

TEST_CASE("collect returns keys in ascending order") {
    ArtIndex idx;
    std::mt19937_64 gen(21);
    std::vector<Key> keys;
    for (int i = 0; i < 5000; ++i) {
        Key k = gen();
        if (idx.insert(k, k + 1) == OpStatus::Ok) keys.push_back(k);
    }
    std::sort(keys.begin(), keys.end());
    std::vector<std::pair<Key, Value>> out;
    idx.collect(out);
    REQUIRE(out.size() == keys.size());
    for (std::size_t i = 0; i < keys.size(); ++i) {
        CHECK(out[i].first == keys[i]);
        CHECK(out[i].second == keys[i] + 1);
    }
}

TEST_CASE("random mixed operations stay equivalent to the reference map") {
    for (std::uint64_t seed : {3u, 5u, 8u}) {
        std::mt19937_64 gen(seed);
        ArtIndex idx;
        OracleIndex oracle;
        for (int op = 0; op < 30000; ++op) {
            // Mixed narrow/wide keys exercise prefix splits and deep paths.
            Key k = (op % 3 == 0) ? gen() % 512 : gen();
            Value v = gen();
            switch (gen() % 4) {
                case 0:
                    CHECK(idx.insert(k, v) == oracle.insert(k, v));
                    break;
                case 1:
                    CHECK(idx.read(k) == oracle.read(k));
                    break;
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

TEST_CASE("bulk load replaces previous contents") {
    ArtIndex idx;
    idx.insert(1, 1);
    std::vector<std::pair<Key, Value>> items{{5, 50}, {6, 60}, {7, 70}};
    idx.bulk_load(items);
    CHECK(idx.size() == 3);
    CHECK(!idx.read(1).has_value());
    CHECK(*idx.read(6) == 60);
    std::vector<std::pair<Key, Value>> bad{{2, 0}, {2, 1}};
    CHECK_THROWS_AS(idx.bulk_load(bad), std::invalid_argument);
}

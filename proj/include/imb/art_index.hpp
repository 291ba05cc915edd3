#pragma once

#include <array>
#include <string>
#include <vector>

#include "imb/index.hpp"

namespace imb {

// Big-endian byte view of a key, so lexicographic byte order matches
// numeric order.
std::array<std::uint8_t, 8> key_to_radix_bytes(Key key);

// Adaptive radix tree over fixed 8-byte keys: node sizes 4/16/48/256,
// collapsed single-branch paths (the prefix array) and leaves created as
// soon as a branch has one key. Nodes grow on insert and shrink back on
// erase; a node left with a single child is folded into its parent edge.
class ArtIndex final : public Index {
  public:
    ArtIndex() = default;
    ~ArtIndex() override;
    ArtIndex(const ArtIndex&) = delete;
    ArtIndex& operator=(const ArtIndex&) = delete;

    OpStatus insert(Key key, Value value) override;
    std::optional<Value> read(Key key) const override;
    OpStatus update(Key key, Value value) override;
    OpStatus erase(Key key) override;
    void bulk_load(std::span<const std::pair<Key, Value>> items) override;
    std::size_t size() const override;
    void collect(std::vector<std::pair<Key, Value>>& out) const override;
    const char* name() const override { return "art"; }

    struct DebugStats {
        std::size_t node4 = 0;
        std::size_t node16 = 0;
        std::size_t node48 = 0;
        std::size_t node256 = 0;
        std::size_t leaves = 0;
        std::size_t max_depth = 0;
    };
    DebugStats debug_stats() const;

    // Checks child counts per node type, sorted edge bytes, prefix
    // consistency against every reachable leaf, and the size counter.
    bool validate(std::string* why = nullptr) const;

  private:
    void* root_ = nullptr;
    std::size_t size_ = 0;
};

}  // namespace imb

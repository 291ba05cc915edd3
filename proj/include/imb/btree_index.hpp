#pragma once

#include <string>
#include <vector>

#include "imb/index.hpp"

namespace imb {

// Textbook B+Tree: 16 keys per node, values only in leaves, leaves
// chained for in-order scans. Non-root nodes stay at least half full;
// erase rebalances by borrowing from a sibling before merging.
class BPlusTreeIndex final : public Index {
  public:
    BPlusTreeIndex();
    ~BPlusTreeIndex() override;
    BPlusTreeIndex(const BPlusTreeIndex&) = delete;
    BPlusTreeIndex& operator=(const BPlusTreeIndex&) = delete;

    OpStatus insert(Key key, Value value) override;
    std::optional<Value> read(Key key) const override;
    OpStatus update(Key key, Value value) override;
    OpStatus erase(Key key) override;
    void bulk_load(std::span<const std::pair<Key, Value>> items) override;
    std::size_t size() const override;
    void collect(std::vector<std::pair<Key, Value>>& out) const override;
    const char* name() const override { return "btree"; }

    struct DebugStats {
        std::size_t inner_nodes = 0;
        std::size_t leaves = 0;
        std::size_t depth = 0;
    };
    DebugStats debug_stats() const;

    // Uniform leaf depth, fill bounds, in-node ordering, subtree key
    // ranges, the leaf chain, and the size counter.
    bool validate(std::string* why = nullptr) const;

  private:
    struct NodeBase;
    struct Leaf;
    struct Inner;

    void clear();

    NodeBase* root_ = nullptr;
    Leaf* head_ = nullptr;  // leftmost leaf
    std::size_t size_ = 0;
};

}  // namespace imb

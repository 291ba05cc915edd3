#pragma once

#include <memory>
#include <string>
#include <vector>

#include "imb/gapped_node.hpp"
#include "imb/index.hpp"

namespace imb {

// Two-layer-and-up learned index: inner nodes route with a linear model
// over a fixed slot array (several consecutive slots may share one child),
// leaves are gapped model-indexed arrays.
class AlexIndex final : public Index {
  public:
    explicit AlexIndex(AlexConfig cfg = {});
    ~AlexIndex() override;

    OpStatus insert(Key key, Value value) override;
    std::optional<Value> read(Key key) const override;
    OpStatus update(Key key, Value value) override;
    OpStatus erase(Key key) override;
    void bulk_load(std::span<const std::pair<Key, Value>> items) override;
    std::size_t size() const override;
    void collect(std::vector<std::pair<Key, Value>>& out) const override;
    const char* name() const override { return "alex"; }

    const AlexStats& stats() const { return stats_; }
    void reset_stats() { stats_ = {}; }
    const AlexConfig& config() const { return cfg_; }

    struct TreeInfo {
        std::size_t inner_nodes = 0;
        std::size_t data_nodes = 0;
        std::size_t depth = 0;  // 1 = single data node
    };
    TreeInfo tree_info() const;

    // Walks the whole structure: slot runs contiguous, ownership exact,
    // per-node consistency, global key order, sizes, and (per key) that
    // root descent lands on the node actually holding it. On failure
    // returns false and, if given, a reason.
    bool validate(std::string* why = nullptr) const;

  private:
    struct InnerNode;
    struct NodeRef {
        InnerNode* inner = nullptr;
        GappedNode* data = nullptr;
        bool is_data() const { return data != nullptr; }
    };
    struct PathEntry {
        InnerNode* node;
        std::size_t slot;
    };

    GappedNode* descend(Key key, std::vector<PathEntry>* path) const;
    void split_data_node(GappedNode* node, const std::vector<PathEntry>& path);
    std::unique_ptr<InnerNode> make_split_inner(const GappedNode& node);
    void make_empty_root();

    AlexConfig cfg_;
    mutable AlexStats stats_;
    std::size_t size_ = 0;
    NodeRef root_;
    std::unique_ptr<InnerNode> root_inner_;
    std::unique_ptr<GappedNode> root_data_;
};

}  // namespace imb

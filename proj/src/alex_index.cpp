#include "imb/alex_index.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace imb {

struct AlexIndex::InnerNode {
    LinearModel model;
    std::vector<NodeRef> slots;
    std::vector<std::unique_ptr<InnerNode>> owned_inner;
    std::vector<std::unique_ptr<GappedNode>> owned_data;

    explicit InnerNode(std::size_t fanout) : slots(fanout) {}

    std::size_t route(Key key) const { return predict_slot(model, key, slots.size()); }

    void adopt(std::unique_ptr<InnerNode> child) { owned_inner.push_back(std::move(child)); }
    void adopt(std::unique_ptr<GappedNode> child) { owned_data.push_back(std::move(child)); }

    std::unique_ptr<GappedNode> release_data(GappedNode* child) {
        for (auto& p : owned_data) {
            if (p.get() == child) {
                auto out = std::move(p);
                p = std::move(owned_data.back());
                owned_data.pop_back();
                return out;
            }
        }
        return nullptr;
    }
};

namespace {

// Model through (lo, -0.5) and (boundary, fanout/2 - 0.5), aiming keys
// below `boundary` at the left half of the slots and the rest at the right
// half. Rounding decides where the fence actually falls, so callers must
// recover it with boundary_key_for_cut instead of trusting `boundary`.
LinearModel two_piece_model(Key lo, Key boundary, std::size_t fanout) {
    assert(boundary > lo);
    const double slope = (double(fanout) / 2.0) / (double(boundary) - double(lo));
    return {slope, -0.5 - slope * double(lo)};
}

// Smallest key the model routes to a slot >= cut+1; keys below it route to
// slots <= cut. Found by inverting the model, then nudging to absorb
// floating point error.
Key boundary_key_for_cut(const LinearModel& m, std::size_t fanout, std::size_t cut) {
    assert(m.slope > 0.0);
    double raw = (double(cut) + 0.5 - m.intercept) / m.slope;
    double clamped = std::clamp(raw, 0.0, 18446744073709549568.0);  // ~2^64, fits a double
    Key k = static_cast<Key>(clamped);
    while (k > 0 && predict_slot(m, k - 1, fanout) > cut) --k;
    while (predict_slot(m, k, fanout) <= cut && k < ~Key(0)) ++k;
    return k;
}

}  // namespace

AlexIndex::AlexIndex(AlexConfig cfg) : cfg_(cfg) { make_empty_root(); }

AlexIndex::~AlexIndex() = default;

void AlexIndex::make_empty_root() {
    root_inner_.reset();
    root_data_ = std::make_unique<GappedNode>(cfg_);
    root_ = {nullptr, root_data_.get()};
    size_ = 0;
}

GappedNode* AlexIndex::descend(Key key, std::vector<PathEntry>* path) const {
    NodeRef cur = root_;
    while (!cur.is_data()) {
        std::size_t slot = cur.inner->route(key);
        if (path) path->push_back({cur.inner, slot});
        cur = cur.inner->slots[slot];
    }
    return cur.data;
}

std::optional<Value> AlexIndex::read(Key key) const {
    return descend(key, nullptr)->lookup(key, stats_);
}

OpStatus AlexIndex::update(Key key, Value value) {
    return descend(key, nullptr)->update(key, value, stats_);
}

OpStatus AlexIndex::erase(Key key) {
    if (!descend(key, nullptr)->erase(key, stats_)) return OpStatus::NotFound;
    --size_;
    return OpStatus::Ok;
}

OpStatus AlexIndex::insert(Key key, Value value) {
    std::vector<PathEntry> path;
    GappedNode* node = descend(key, &path);
    auto outcome = node->insert(key, value, stats_);
    if (outcome == GappedNode::InsertOutcome::Duplicate) return OpStatus::AlreadyExists;
    ++size_;
    if (outcome == GappedNode::InsertOutcome::NeedsSplit) split_data_node(node, path);
    return OpStatus::Ok;
}

void AlexIndex::split_data_node(GappedNode* node, const std::vector<PathEntry>& path) {
    const std::size_t fanout = cfg_.inner_fanout;

    if (path.empty()) {
        // Splitting the root data node: the tree grows a level.
        auto inner = make_split_inner(*node);
        root_inner_ = std::move(inner);
        root_data_.reset();
        root_ = {root_inner_.get(), nullptr};
        return;
    }

    InnerNode* parent = path.back().node;
    const std::size_t hit = path.back().slot;
    std::size_t s0 = hit, s1 = hit;
    while (s0 > 0 && parent->slots[s0 - 1].data == node) --s0;
    while (s1 + 1 < parent->slots.size() && parent->slots[s1 + 1].data == node) ++s1;

    auto old = parent->release_data(node);
    assert(old);

    if (s1 > s0) {
        // The node backs several slots: cut the run in half and divide the
        // elements at the key the parent model maps to the cut, so routing
        // stays exact without touching the model.
        const std::size_t cut = s0 + (s1 - s0 + 1) / 2 - 1;
        Key boundary = boundary_key_for_cut(parent->model, parent->slots.size(), cut);
        auto [left, right] = node->split_at_key(boundary, stats_);
        for (std::size_t i = s0; i <= cut; ++i) parent->slots[i] = {nullptr, left.get()};
        for (std::size_t i = cut + 1; i <= s1; ++i) parent->slots[i] = {nullptr, right.get()};
        parent->adopt(std::move(left));
        parent->adopt(std::move(right));
        return;
    }

    // Single slot: replace the data node with a fresh inner node whose two
    // halves take the elements divided near their median.
    auto inner = make_split_inner(*node);
    parent->slots[s0] = {inner.get(), nullptr};
    parent->adopt(std::move(inner));
}

// Builds a fresh inner node over two halves of a full data node. The model
// aims the median element at the middle slot, but the elements are divided
// at the slot fence the model actually produces, so descent is exact no
// matter which way the floating point rounds.
std::unique_ptr<AlexIndex::InnerNode> AlexIndex::make_split_inner(const GappedNode& node) {
    const std::size_t fanout = cfg_.inner_fanout;
    std::vector<std::pair<Key, Value>> items;
    node.gather(items);
    assert(items.size() >= 2);

    auto inner = std::make_unique<InnerNode>(fanout);
    inner->model = two_piece_model(items.front().first, items[items.size() / 2].first, fanout);
    const Key fence = boundary_key_for_cut(inner->model, fanout, fanout / 2 - 1);
    auto [left, right] = node.split_at_key(fence, stats_);
    for (std::size_t i = 0; i < fanout; ++i)
        inner->slots[i] = {nullptr, i < fanout / 2 ? left.get() : right.get()};
    inner->adopt(std::move(left));
    inner->adopt(std::move(right));
    return inner;
}

void AlexIndex::bulk_load(std::span<const std::pair<Key, Value>> items) {
    check_bulk_input(items);
    make_empty_root();
    size_ = items.size();
    if (items.empty()) return;

    if (items.size() <= std::max<std::size_t>(64, cfg_.min_node_slots)) {
        root_data_ = std::make_unique<GappedNode>(cfg_, items);
        root_ = {nullptr, root_data_.get()};
        return;
    }

    // Two levels: the root splits the key range into equal-width stripes,
    // one data node per stripe (empty stripes get an empty node).
    const std::size_t fanout = cfg_.inner_fanout;
    const Key lo = items.front().first;
    const Key hi = items.back().first;
    const double width = double(hi) - double(lo) + 1.0;
    auto inner = std::make_unique<InnerNode>(fanout);
    const double slope = double(fanout) / width;
    inner->model = {slope, -slope * double(lo) - 0.5};

    std::size_t begin = 0;
    for (std::size_t s = 0; s < fanout; ++s) {
        std::size_t end = begin;
        while (end < items.size() && inner->route(items[end].first) == s) ++end;
        auto child = std::make_unique<GappedNode>(cfg_, items.subspan(begin, end - begin));
        inner->slots[s] = {nullptr, child.get()};
        inner->adopt(std::move(child));
        begin = end;
    }
    assert(begin == items.size());

    root_data_.reset();
    root_inner_ = std::move(inner);
    root_ = {root_inner_.get(), nullptr};
}

std::size_t AlexIndex::size() const { return size_; }

void AlexIndex::collect(std::vector<std::pair<Key, Value>>& out) const {
    struct Walker {
        static void walk(NodeRef ref, std::vector<std::pair<Key, Value>>& out) {
            if (ref.is_data()) {
                ref.data->gather(out);
                return;
            }
            const GappedNode* prev_d = nullptr;
            const InnerNode* prev_i = nullptr;
            for (const NodeRef& child : ref.inner->slots) {
                if (child.data == prev_d && child.inner == prev_i) continue;
                prev_d = child.data;
                prev_i = child.inner;
                walk(child, out);
            }
        }
    };
    Walker::walk(root_, out);
}

AlexIndex::TreeInfo AlexIndex::tree_info() const {
    TreeInfo info;
    struct Walker {
        static void walk(NodeRef ref, std::size_t depth, TreeInfo& info) {
            info.depth = std::max(info.depth, depth);
            if (ref.is_data()) {
                ++info.data_nodes;
                return;
            }
            ++info.inner_nodes;
            const GappedNode* prev_d = nullptr;
            const InnerNode* prev_i = nullptr;
            for (const NodeRef& child : ref.inner->slots) {
                if (child.data == prev_d && child.inner == prev_i) continue;
                prev_d = child.data;
                prev_i = child.inner;
                walk(child, depth + 1, info);
            }
        }
    };
    Walker::walk(root_, 1, info);
    return info;
}

bool AlexIndex::validate(std::string* why) const {
    auto fail = [&](const char* msg) {
        if (why) *why = msg;
        return false;
    };

    // Structure pass: run contiguity and exact ownership per inner node.
    struct Check {
        const AlexConfig* cfg;
        std::string* why;
        bool ok = true;

        void fail(const char* msg) {
            if (why && ok) *why = msg;
            ok = false;
        }

        void walk(NodeRef ref) {
            if (!ok) return;
            if (ref.is_data()) {
                if (!ref.data->check_consistent()) fail("data node inconsistent");
                if (ref.data->density() > cfg->density_upper + 1e-12)
                    fail("data node above density bound");
                return;
            }
            const InnerNode* n = ref.inner;
            if (n->slots.empty()) return fail("inner node without slots");
            std::vector<const void*> seen;
            const void* prev = nullptr;
            for (const NodeRef& child : n->slots) {
                if (!child.inner && !child.data) return fail("null child slot");
                if (child.inner && child.data) return fail("ambiguous child slot");
                const void* p = child.inner ? (const void*)child.inner : (const void*)child.data;
                if (p != prev) {
                    if (std::find(seen.begin(), seen.end(), p) != seen.end())
                        return fail("child run not contiguous");
                    seen.push_back(p);
                    prev = p;
                }
            }
            std::size_t owned = n->owned_inner.size() + n->owned_data.size();
            if (owned != seen.size()) return fail("owned children != referenced children");
            for (const auto& c : n->owned_inner)
                if (std::find(seen.begin(), seen.end(), (const void*)c.get()) == seen.end())
                    return fail("owned inner not referenced");
            for (const auto& c : n->owned_data)
                if (std::find(seen.begin(), seen.end(), (const void*)c.get()) == seen.end())
                    return fail("owned data not referenced");
            const void* prevp = nullptr;
            for (const NodeRef& child : n->slots) {
                const void* p = child.inner ? (const void*)child.inner : (const void*)child.data;
                if (p == prevp) continue;
                prevp = p;
                walk(child);
            }
        }
    } check{&cfg_, why};
    check.walk(root_);
    if (!check.ok) return false;

    std::vector<std::pair<Key, Value>> all;
    collect(all);
    if (all.size() != size_) return fail("size() disagrees with stored entries");
    for (std::size_t i = 1; i < all.size(); ++i)
        if (all[i].first <= all[i - 1].first) return fail("keys not globally sorted");

    // Routing pass: descending for a stored key must reach a node holding it.
    for (const auto& [k, v] : all) {
        GappedNode* leaf = descend(k, nullptr);
        AlexStats scratch;
        auto got = leaf->lookup(k, scratch);
        if (!got || *got != v) return fail("descent does not reach stored key");
    }
    return true;
}

}  // namespace imb

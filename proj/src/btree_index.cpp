#include "imb/btree_index.hpp"

#include <algorithm>
#include <cassert>

namespace imb {

namespace {
constexpr int kMaxKeys = 16;
constexpr int kMinKeys = kMaxKeys / 2;
}  // namespace

struct BPlusTreeIndex::NodeBase {
    bool leaf;
    // Keys in this node; one extra slot so a node can hold the overflow
    // briefly between insert and split.
    int count = 0;
    Key keys[kMaxKeys + 1];

    // children[i] covers [keys[i-1], keys[i]).
    int route(Key key) const {
        return int(std::upper_bound(keys, keys + count, key) - keys);
    }

    int find_key(Key key) const {
        const Key* it = std::lower_bound(keys, keys + count, key);
        if (it == keys + count || *it != key) return -1;
        return int(it - keys);
    }
};

struct BPlusTreeIndex::Leaf : NodeBase {
    Leaf() { leaf = true; }
    Value values[kMaxKeys + 1];
    Leaf* next = nullptr;
};

struct BPlusTreeIndex::Inner : NodeBase {
    Inner() { leaf = false; }
    NodeBase* children[kMaxKeys + 2];
};

BPlusTreeIndex::BPlusTreeIndex() {
    auto* l = new Leaf();
    root_ = l;
    head_ = l;
}

BPlusTreeIndex::~BPlusTreeIndex() { clear(); }

void BPlusTreeIndex::clear() {
    struct Rec {
        static void destroy(NodeBase* n) {
            if (!n->leaf) {
                auto* in = static_cast<Inner*>(n);
                for (int i = 0; i <= in->count; ++i) destroy(in->children[i]);
                delete in;
            } else {
                delete static_cast<Leaf*>(n);
            }
        }
    };
    if (root_) Rec::destroy(root_);
    root_ = nullptr;
    head_ = nullptr;
    size_ = 0;
}

std::optional<Value> BPlusTreeIndex::read(Key key) const {
    const NodeBase* n = root_;
    while (!n->leaf) n = static_cast<const Inner*>(n)->children[n->route(key)];
    int i = n->find_key(key);
    if (i < 0) return std::nullopt;
    return static_cast<const Leaf*>(n)->values[i];
}

OpStatus BPlusTreeIndex::update(Key key, Value value) {
    NodeBase* n = root_;
    while (!n->leaf) n = static_cast<Inner*>(n)->children[n->route(key)];
    int i = n->find_key(key);
    if (i < 0) return OpStatus::NotFound;
    static_cast<Leaf*>(n)->values[i] = value;
    return OpStatus::Ok;
}

OpStatus BPlusTreeIndex::insert(Key key, Value value) {
    struct Rec {
        Key up_key = 0;
        NodeBase* up_node = nullptr;  // new right sibling when a split happened

        bool split_happened() const { return up_node != nullptr; }

        // Returns false on duplicate.
        bool insert(NodeBase* n, Key key, Value value) {
            if (n->leaf) {
                auto* l = static_cast<Leaf*>(n);
                int pos = int(std::lower_bound(l->keys, l->keys + l->count, key) - l->keys);
                if (pos < l->count && l->keys[pos] == key) return false;
                for (int i = l->count; i > pos; --i) {
                    l->keys[i] = l->keys[i - 1];
                    l->values[i] = l->values[i - 1];
                }
                l->keys[pos] = key;
                l->values[pos] = value;
                ++l->count;
                if (l->count > kMaxKeys) split_leaf(l);
                return true;
            }
            auto* in = static_cast<Inner*>(n);
            int idx = in->route(key);
            if (!insert(in->children[idx], key, value)) return false;
            if (split_happened()) {
                for (int i = in->count; i > idx; --i) {
                    in->keys[i] = in->keys[i - 1];
                    in->children[i + 1] = in->children[i];
                }
                in->keys[idx] = up_key;
                in->children[idx + 1] = up_node;
                ++in->count;
                up_node = nullptr;
                if (in->count > kMaxKeys) split_inner(in);
            }
            return true;
        }

        void split_leaf(Leaf* l) {
            auto* right = new Leaf();
            const int keep = (kMaxKeys + 1) / 2;  // 8 stay, 9 move
            right->count = l->count - keep;
            for (int i = 0; i < right->count; ++i) {
                right->keys[i] = l->keys[keep + i];
                right->values[i] = l->values[keep + i];
            }
            l->count = keep;
            right->next = l->next;
            l->next = right;
            up_key = right->keys[0];
            up_node = right;
        }

        void split_inner(Inner* in) {
            auto* right = new Inner();
            const int mid = kMaxKeys / 2;  // this key moves up
            right->count = in->count - mid - 1;
            for (int i = 0; i < right->count; ++i) right->keys[i] = in->keys[mid + 1 + i];
            for (int i = 0; i <= right->count; ++i)
                right->children[i] = in->children[mid + 1 + i];
            up_key = in->keys[mid];
            in->count = mid;
            up_node = right;
        }
    } rec;

    if (!rec.insert(root_, key, value)) return OpStatus::AlreadyExists;
    if (rec.split_happened()) {
        auto* new_root = new Inner();
        new_root->count = 1;
        new_root->keys[0] = rec.up_key;
        new_root->children[0] = root_;
        new_root->children[1] = rec.up_node;
        root_ = new_root;
    }
    ++size_;
    return OpStatus::Ok;
}

OpStatus BPlusTreeIndex::erase(Key key) {
    struct Rec {
        static bool erase(NodeBase* n, Key key) {
            if (n->leaf) {
                auto* l = static_cast<Leaf*>(n);
                int i = l->find_key(key);
                if (i < 0) return false;
                for (; i + 1 < l->count; ++i) {
                    l->keys[i] = l->keys[i + 1];
                    l->values[i] = l->values[i + 1];
                }
                --l->count;
                return true;
            }
            auto* in = static_cast<Inner*>(n);
            int idx = in->route(key);
            if (!erase(in->children[idx], key)) return false;
            if (in->children[idx]->count < kMinKeys) fix_underflow(in, idx);
            return true;
        }

        static void fix_underflow(Inner* parent, int idx) {
            NodeBase* child = parent->children[idx];
            NodeBase* left = idx > 0 ? parent->children[idx - 1] : nullptr;
            NodeBase* right = idx < parent->count ? parent->children[idx + 1] : nullptr;

            if (left && left->count > kMinKeys) {
                borrow_from_left(parent, idx, child, left);
            } else if (right && right->count > kMinKeys) {
                borrow_from_right(parent, idx, child, right);
            } else if (left) {
                merge(parent, idx - 1);
            } else {
                merge(parent, idx);
            }
        }

        static void borrow_from_left(Inner* parent, int idx, NodeBase* child, NodeBase* left) {
            if (child->leaf) {
                auto* c = static_cast<Leaf*>(child);
                auto* l = static_cast<Leaf*>(left);
                for (int i = c->count; i > 0; --i) {
                    c->keys[i] = c->keys[i - 1];
                    c->values[i] = c->values[i - 1];
                }
                c->keys[0] = l->keys[l->count - 1];
                c->values[0] = l->values[l->count - 1];
                ++c->count;
                --l->count;
                parent->keys[idx - 1] = c->keys[0];
            } else {
                auto* c = static_cast<Inner*>(child);
                auto* l = static_cast<Inner*>(left);
                for (int i = c->count; i > 0; --i) c->keys[i] = c->keys[i - 1];
                for (int i = c->count + 1; i > 0; --i) c->children[i] = c->children[i - 1];
                c->keys[0] = parent->keys[idx - 1];
                c->children[0] = l->children[l->count];
                ++c->count;
                parent->keys[idx - 1] = l->keys[l->count - 1];
                --l->count;
            }
        }

        static void borrow_from_right(Inner* parent, int idx, NodeBase* child, NodeBase* right) {
            if (child->leaf) {
                auto* c = static_cast<Leaf*>(child);
                auto* r = static_cast<Leaf*>(right);
                c->keys[c->count] = r->keys[0];
                c->values[c->count] = r->values[0];
                ++c->count;
                for (int i = 0; i + 1 < r->count; ++i) {
                    r->keys[i] = r->keys[i + 1];
                    r->values[i] = r->values[i + 1];
                }
                --r->count;
                parent->keys[idx] = r->keys[0];
            } else {
                auto* c = static_cast<Inner*>(child);
                auto* r = static_cast<Inner*>(right);
                c->keys[c->count] = parent->keys[idx];
                c->children[c->count + 1] = r->children[0];
                ++c->count;
                parent->keys[idx] = r->keys[0];
                for (int i = 0; i + 1 < r->count; ++i) r->keys[i] = r->keys[i + 1];
                for (int i = 0; i < r->count; ++i) r->children[i] = r->children[i + 1];
                --r->count;
            }
        }

        // Merges children[at] and children[at+1].
        static void merge(Inner* parent, int at) {
            NodeBase* lhs = parent->children[at];
            NodeBase* rhs = parent->children[at + 1];
            if (lhs->leaf) {
                auto* l = static_cast<Leaf*>(lhs);
                auto* r = static_cast<Leaf*>(rhs);
                for (int i = 0; i < r->count; ++i) {
                    l->keys[l->count + i] = r->keys[i];
                    l->values[l->count + i] = r->values[i];
                }
                l->count += r->count;
                l->next = r->next;
                delete r;
            } else {
                auto* l = static_cast<Inner*>(lhs);
                auto* r = static_cast<Inner*>(rhs);
                l->keys[l->count] = parent->keys[at];
                for (int i = 0; i < r->count; ++i) l->keys[l->count + 1 + i] = r->keys[i];
                for (int i = 0; i <= r->count; ++i)
                    l->children[l->count + 1 + i] = r->children[i];
                l->count += r->count + 1;
                delete r;
            }
            for (int i = at; i + 1 < parent->count; ++i) {
                parent->keys[i] = parent->keys[i + 1];
                parent->children[i + 1] = parent->children[i + 2];
            }
            --parent->count;
        }
    };

    if (!Rec::erase(root_, key)) return OpStatus::NotFound;
    if (!root_->leaf && root_->count == 0) {
        auto* old = static_cast<Inner*>(root_);
        root_ = old->children[0];
        delete old;
    }
    --size_;
    return OpStatus::Ok;
}

void BPlusTreeIndex::bulk_load(std::span<const std::pair<Key, Value>> items) {
    check_bulk_input(items);
    clear();

    const std::size_t n = items.size();
    if (n <= std::size_t(kMaxKeys)) {
        auto* l = new Leaf();
        l->count = int(n);
        for (std::size_t i = 0; i < n; ++i) {
            l->keys[i] = items[i].first;
            l->values[i] = items[i].second;
        }
        root_ = l;
        head_ = l;
        size_ = n;
        return;
    }

    // Bottom up: pack full leaves (trimming the second-to-last chunk so
    // the final one meets the fill bound), then group each level into
    // parents until one node remains.
    struct Entry {
        Key first_key;
        NodeBase* node;
    };
    std::vector<Entry> level;
    Leaf* prev = nullptr;
    std::size_t i = 0;
    while (i < n) {
        std::size_t take = std::min<std::size_t>(kMaxKeys, n - i);
        std::size_t left_after = n - i - take;
        if (left_after > 0 && left_after < std::size_t(kMinKeys)) take = n - i - kMinKeys;
        auto* l = new Leaf();
        l->count = int(take);
        for (std::size_t j = 0; j < take; ++j) {
            l->keys[j] = items[i + j].first;
            l->values[j] = items[i + j].second;
        }
        if (prev)
            prev->next = l;
        else
            head_ = l;
        prev = l;
        level.push_back({l->keys[0], l});
        i += take;
    }

    const std::size_t max_children = kMaxKeys + 1;
    const std::size_t min_children = kMinKeys + 1;
    while (level.size() > 1) {
        std::vector<Entry> up;
        std::size_t c = 0;
        while (c < level.size()) {
            std::size_t take = std::min(max_children, level.size() - c);
            std::size_t left_after = level.size() - c - take;
            if (left_after > 0 && left_after < min_children)
                take = level.size() - c - min_children;
            auto* in = new Inner();
            in->count = int(take) - 1;
            for (std::size_t j = 0; j < take; ++j) {
                in->children[j] = level[c + j].node;
                if (j > 0) in->keys[j - 1] = level[c + j].first_key;
            }
            up.push_back({level[c].first_key, in});
            c += take;
        }
        level = std::move(up);
    }
    root_ = level[0].node;
    size_ = n;
}

std::size_t BPlusTreeIndex::size() const { return size_; }

void BPlusTreeIndex::collect(std::vector<std::pair<Key, Value>>& out) const {
    for (const Leaf* l = head_; l; l = l->next)
        for (int i = 0; i < l->count; ++i) out.emplace_back(l->keys[i], l->values[i]);
}

BPlusTreeIndex::DebugStats BPlusTreeIndex::debug_stats() const {
    DebugStats st;
    struct Rec {
        static void walk(const NodeBase* n, std::size_t depth, DebugStats& st) {
            st.depth = std::max(st.depth, depth);
            if (n->leaf) {
                ++st.leaves;
                return;
            }
            ++st.inner_nodes;
            auto* in = static_cast<const Inner*>(n);
            for (int i = 0; i <= in->count; ++i) walk(in->children[i], depth + 1, st);
        }
    };
    Rec::walk(root_, 1, st);
    return st;
}

bool BPlusTreeIndex::validate(std::string* why) const {
    struct Checker {
        std::string* why;
        bool ok = true;
        std::size_t keys_seen = 0;
        std::ptrdiff_t leaf_depth = -1;
        const Leaf* chain_cursor;

        void fail(const char* msg) {
            if (why && ok) *why = msg;
            ok = false;
        }

        void walk(const NodeBase* n, bool is_root, std::size_t depth, const Key* lo,
                  const Key* hi) {
            if (!ok) return;
            const int min_count = is_root ? (n->leaf ? 0 : 1) : kMinKeys;
            if (n->count < min_count || n->count > kMaxKeys)
                return fail("node fill outside bounds");
            for (int i = 1; i < n->count; ++i)
                if (n->keys[i] <= n->keys[i - 1]) return fail("keys unsorted inside node");
            if (lo && n->count && n->keys[0] < *lo) return fail("key below subtree bound");
            if (hi && n->count && n->keys[n->count - 1] >= *hi)
                return fail("key above subtree bound");

            if (n->leaf) {
                if (leaf_depth < 0)
                    leaf_depth = std::ptrdiff_t(depth);
                else if (leaf_depth != std::ptrdiff_t(depth))
                    return fail("leaves at different depths");
                if (chain_cursor != n) return fail("leaf chain out of order");
                chain_cursor = static_cast<const Leaf*>(n)->next;
                keys_seen += std::size_t(n->count);
                return;
            }
            auto* in = static_cast<const Inner*>(n);
            for (int i = 0; i <= in->count; ++i) {
                const Key* clo = i == 0 ? lo : &in->keys[i - 1];
                const Key* chi = i == in->count ? hi : &in->keys[i];
                walk(in->children[i], false, depth + 1, clo, chi);
            }
        }
    } checker{why, true, 0, -1, head_};
    checker.walk(root_, true, 1, nullptr, nullptr);
    if (!checker.ok) return false;
    if (checker.chain_cursor != nullptr) {
        if (why) *why = "leaf chain has extra nodes";
        return false;
    }
    if (checker.keys_seen != size_) {
        if (why) *why = "stored keys disagree with size()";
        return false;
    }
    return true;
}

}  // namespace imb

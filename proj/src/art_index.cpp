#include "imb/art_index.hpp"

#include <cassert>
#include <cstring>

namespace imb {

std::array<std::uint8_t, 8> key_to_radix_bytes(Key key) {
    std::array<std::uint8_t, 8> b;
    for (int i = 0; i < 8; ++i) b[std::size_t(i)] = std::uint8_t(key >> (56 - 8 * i));
    return b;
}

namespace art {

enum NodeType : std::uint8_t { kNode4, kNode16, kNode48, kNode256 };

constexpr std::uint8_t kEmptySlot = 48;

struct Leaf {
    Key key;
    Value value;
};

struct Node {
    NodeType type;
    std::uint8_t prefix_len = 0;
    std::uint16_t count = 0;
    std::array<std::uint8_t, 8> prefix{};

    explicit Node(NodeType t) : type(t) {}
};

// Low pointer bit tags leaves; Leaf allocations are suitably aligned.
inline bool is_leaf(const void* p) { return reinterpret_cast<std::uintptr_t>(p) & 1u; }
inline Leaf* as_leaf(void* p) {
    return reinterpret_cast<Leaf*>(reinterpret_cast<std::uintptr_t>(p) & ~std::uintptr_t(1));
}
inline const Leaf* as_leaf(const void* p) {
    return reinterpret_cast<const Leaf*>(reinterpret_cast<std::uintptr_t>(p) & ~std::uintptr_t(1));
}
inline void* make_leaf(Leaf* l) {
    return reinterpret_cast<void*>(reinterpret_cast<std::uintptr_t>(l) | 1u);
}
inline Node* as_node(void* p) { return static_cast<Node*>(p); }
inline const Node* as_node(const void* p) { return static_cast<const Node*>(p); }

struct Node4 : Node {
    Node4() : Node(kNode4) {}
    std::uint8_t keys[4]{};
    void* children[4]{};
};

struct Node16 : Node {
    Node16() : Node(kNode16) {}
    std::uint8_t keys[16]{};
    void* children[16]{};
};

struct Node48 : Node {
    Node48() : Node(kNode48) { std::memset(child_index, kEmptySlot, sizeof child_index); }
    std::uint8_t child_index[256];
    void* children[48]{};
};

struct Node256 : Node {
    Node256() : Node(kNode256) {}
    void* children[256]{};
};

void** find_child(Node* n, std::uint8_t byte) {
    switch (n->type) {
        case kNode4: {
            auto* n4 = static_cast<Node4*>(n);
            for (int i = 0; i < n4->count; ++i)
                if (n4->keys[i] == byte) return &n4->children[i];
            return nullptr;
        }
        case kNode16: {
            auto* n16 = static_cast<Node16*>(n);
            for (int i = 0; i < n16->count; ++i)
                if (n16->keys[i] == byte) return &n16->children[i];
            return nullptr;
        }
        case kNode48: {
            auto* n48 = static_cast<Node48*>(n);
            if (n48->child_index[byte] == kEmptySlot) return nullptr;
            return &n48->children[n48->child_index[byte]];
        }
        case kNode256: {
            auto* n256 = static_cast<Node256*>(n);
            return n256->children[byte] ? &n256->children[byte] : nullptr;
        }
    }
    return nullptr;
}

// Inserts into a node with spare room; the caller handles growth.
void add_child_in_place(Node* n, std::uint8_t byte, void* child) {
    switch (n->type) {
        case kNode4: {
            auto* n4 = static_cast<Node4*>(n);
            int pos = 0;
            while (pos < n4->count && n4->keys[pos] < byte) ++pos;
            std::memmove(n4->keys + pos + 1, n4->keys + pos, std::size_t(n4->count - pos));
            std::memmove(n4->children + pos + 1, n4->children + pos,
                         std::size_t(n4->count - pos) * sizeof(void*));
            n4->keys[pos] = byte;
            n4->children[pos] = child;
            ++n4->count;
            return;
        }
        case kNode16: {
            auto* n16 = static_cast<Node16*>(n);
            int pos = 0;
            while (pos < n16->count && n16->keys[pos] < byte) ++pos;
            std::memmove(n16->keys + pos + 1, n16->keys + pos, std::size_t(n16->count - pos));
            std::memmove(n16->children + pos + 1, n16->children + pos,
                         std::size_t(n16->count - pos) * sizeof(void*));
            n16->keys[pos] = byte;
            n16->children[pos] = child;
            ++n16->count;
            return;
        }
        case kNode48: {
            auto* n48 = static_cast<Node48*>(n);
            int slot = 0;
            while (n48->children[slot]) ++slot;
            n48->children[slot] = child;
            n48->child_index[byte] = std::uint8_t(slot);
            ++n48->count;
            return;
        }
        case kNode256: {
            auto* n256 = static_cast<Node256*>(n);
            n256->children[byte] = child;
            ++n256->count;
            return;
        }
    }
}

bool node_full(const Node* n) {
    switch (n->type) {
        case kNode4: return n->count == 4;
        case kNode16: return n->count == 16;
        case kNode48: return n->count == 48;
        case kNode256: return false;
    }
    return false;
}

Node* grown_copy(Node* n) {
    switch (n->type) {
        case kNode4: {
            auto* n4 = static_cast<Node4*>(n);
            auto* up = new Node16();
            up->prefix_len = n->prefix_len;
            up->prefix = n->prefix;
            up->count = n->count;
            std::memcpy(up->keys, n4->keys, 4);
            std::memcpy(up->children, n4->children, 4 * sizeof(void*));
            return up;
        }
        case kNode16: {
            auto* n16 = static_cast<Node16*>(n);
            auto* up = new Node48();
            up->prefix_len = n->prefix_len;
            up->prefix = n->prefix;
            up->count = n->count;
            for (int i = 0; i < n->count; ++i) {
                up->children[i] = n16->children[i];
                up->child_index[n16->keys[i]] = std::uint8_t(i);
            }
            return up;
        }
        case kNode48: {
            auto* n48 = static_cast<Node48*>(n);
            auto* up = new Node256();
            up->prefix_len = n->prefix_len;
            up->prefix = n->prefix;
            up->count = n->count;
            for (int b = 0; b < 256; ++b)
                if (n48->child_index[b] != kEmptySlot)
                    up->children[b] = n48->children[n48->child_index[b]];
            return up;
        }
        case kNode256: break;
    }
    assert(false);
    return n;
}

void delete_shallow(Node* n) {
    switch (n->type) {
        case kNode4: delete static_cast<Node4*>(n); break;
        case kNode16: delete static_cast<Node16*>(n); break;
        case kNode48: delete static_cast<Node48*>(n); break;
        case kNode256: delete static_cast<Node256*>(n); break;
    }
}

void add_child(void** ref, std::uint8_t byte, void* child) {
    Node* n = as_node(*ref);
    if (node_full(n)) {
        Node* up = grown_copy(n);
        delete_shallow(n);
        *ref = up;
        n = up;
    }
    add_child_in_place(n, byte, child);
}

// After a removal left `n` as Node4 with one child: fold the node into
// the edge, concatenating prefixes (parent prefix + edge byte + child
// prefix always fits the 8 byte budget).
void collapse_single_child(void** ref, Node4* n) {
    void* only = n->children[0];
    if (is_leaf(only)) {
        *ref = only;
    } else {
        Node* child = as_node(only);
        std::array<std::uint8_t, 8> merged{};
        std::uint8_t len = 0;
        for (int i = 0; i < n->prefix_len; ++i) merged[len++] = n->prefix[std::size_t(i)];
        merged[len++] = n->keys[0];
        for (int i = 0; i < child->prefix_len; ++i) merged[len++] = child->prefix[std::size_t(i)];
        child->prefix = merged;
        child->prefix_len = len;
        *ref = child;
    }
    delete static_cast<Node4*>(n);
}

Node* shrunk_copy(Node* n) {
    switch (n->type) {
        case kNode16: {
            auto* n16 = static_cast<Node16*>(n);
            auto* down = new Node4();
            down->prefix_len = n->prefix_len;
            down->prefix = n->prefix;
            down->count = n->count;
            std::memcpy(down->keys, n16->keys, std::size_t(n->count));
            std::memcpy(down->children, n16->children, std::size_t(n->count) * sizeof(void*));
            return down;
        }
        case kNode48: {
            auto* n48 = static_cast<Node48*>(n);
            auto* down = new Node16();
            down->prefix_len = n->prefix_len;
            down->prefix = n->prefix;
            int pos = 0;
            for (int b = 0; b < 256; ++b) {
                if (n48->child_index[b] == kEmptySlot) continue;
                down->keys[pos] = std::uint8_t(b);
                down->children[pos] = n48->children[n48->child_index[b]];
                ++pos;
            }
            down->count = std::uint16_t(pos);
            return down;
        }
        case kNode256: {
            auto* n256 = static_cast<Node256*>(n);
            auto* down = new Node48();
            down->prefix_len = n->prefix_len;
            down->prefix = n->prefix;
            int pos = 0;
            for (int b = 0; b < 256; ++b) {
                if (!n256->children[b]) continue;
                down->children[pos] = n256->children[b];
                down->child_index[b] = std::uint8_t(pos);
                ++pos;
            }
            down->count = std::uint16_t(pos);
            return down;
        }
        case kNode4: break;
    }
    assert(false);
    return n;
}

void remove_child(void** ref, std::uint8_t byte) {
    Node* n = as_node(*ref);
    switch (n->type) {
        case kNode4: {
            auto* n4 = static_cast<Node4*>(n);
            int pos = 0;
            while (n4->keys[pos] != byte) ++pos;
            std::memmove(n4->keys + pos, n4->keys + pos + 1, std::size_t(n4->count - pos - 1));
            std::memmove(n4->children + pos, n4->children + pos + 1,
                         std::size_t(n4->count - pos - 1) * sizeof(void*));
            --n4->count;
            if (n4->count == 1) collapse_single_child(ref, n4);
            return;
        }
        case kNode16: {
            auto* n16 = static_cast<Node16*>(n);
            int pos = 0;
            while (n16->keys[pos] != byte) ++pos;
            std::memmove(n16->keys + pos, n16->keys + pos + 1,
                         std::size_t(n16->count - pos - 1));
            std::memmove(n16->children + pos, n16->children + pos + 1,
                         std::size_t(n16->count - pos - 1) * sizeof(void*));
            --n16->count;
            if (n16->count <= 4) {
                *ref = shrunk_copy(n);
                delete_shallow(n);
            }
            return;
        }
        case kNode48: {
            auto* n48 = static_cast<Node48*>(n);
            std::uint8_t slot = n48->child_index[byte];
            n48->child_index[byte] = kEmptySlot;
            n48->children[slot] = nullptr;
            --n48->count;
            if (n48->count <= 16) {
                *ref = shrunk_copy(n);
                delete_shallow(n);
            }
            return;
        }
        case kNode256: {
            auto* n256 = static_cast<Node256*>(n);
            n256->children[byte] = nullptr;
            --n256->count;
            if (n256->count <= 48) {
                *ref = shrunk_copy(n);
                delete_shallow(n);
            }
            return;
        }
    }
}

void destroy(void* p) {
    if (!p) return;
    if (is_leaf(p)) {
        delete as_leaf(p);
        return;
    }
    Node* n = as_node(p);
    switch (n->type) {
        case kNode4: {
            auto* n4 = static_cast<Node4*>(n);
            for (int i = 0; i < n4->count; ++i) destroy(n4->children[i]);
            break;
        }
        case kNode16: {
            auto* n16 = static_cast<Node16*>(n);
            for (int i = 0; i < n16->count; ++i) destroy(n16->children[i]);
            break;
        }
        case kNode48: {
            auto* n48 = static_cast<Node48*>(n);
            for (int i = 0; i < 48; ++i)
                if (n48->children[i]) destroy(n48->children[i]);
            break;
        }
        case kNode256: {
            auto* n256 = static_cast<Node256*>(n);
            for (int i = 0; i < 256; ++i)
                if (n256->children[i]) destroy(n256->children[i]);
            break;
        }
    }
    delete_shallow(n);
}

template <typename Fn>
void for_each(const void* p, Fn&& fn) {
    if (!p) return;
    if (is_leaf(p)) {
        fn(*as_leaf(p));
        return;
    }
    const Node* n = as_node(p);
    switch (n->type) {
        case kNode4: {
            auto* n4 = static_cast<const Node4*>(n);
            for (int i = 0; i < n4->count; ++i) for_each(n4->children[i], fn);
            break;
        }
        case kNode16: {
            auto* n16 = static_cast<const Node16*>(n);
            for (int i = 0; i < n16->count; ++i) for_each(n16->children[i], fn);
            break;
        }
        case kNode48: {
            auto* n48 = static_cast<const Node48*>(n);
            for (int b = 0; b < 256; ++b)
                if (n48->child_index[b] != kEmptySlot)
                    for_each(n48->children[n48->child_index[b]], fn);
            break;
        }
        case kNode256: {
            auto* n256 = static_cast<const Node256*>(n);
            for (int b = 0; b < 256; ++b)
                if (n256->children[b]) for_each(n256->children[b], fn);
            break;
        }
    }
}

Leaf* find_leaf(const void* root, Key key) {
    const auto kb = key_to_radix_bytes(key);
    const void* cur = root;
    std::size_t depth = 0;
    while (cur) {
        if (is_leaf(cur)) {
            const Leaf* l = as_leaf(cur);
            return l->key == key ? const_cast<Leaf*>(l) : nullptr;
        }
        const Node* n = as_node(cur);
        for (int i = 0; i < n->prefix_len; ++i)
            if (n->prefix[std::size_t(i)] != kb[depth + std::size_t(i)]) return nullptr;
        depth += n->prefix_len;
        void** child = find_child(const_cast<Node*>(n), kb[depth]);
        if (!child) return nullptr;
        cur = *child;
        ++depth;
    }
    return nullptr;
}

}  // namespace art

using namespace art;

ArtIndex::~ArtIndex() { destroy(root_); }

OpStatus ArtIndex::insert(Key key, Value value) {
    const auto kb = key_to_radix_bytes(key);
    void** ref = &root_;
    std::size_t depth = 0;
    while (true) {
        void* cur = *ref;
        if (!cur) {
            *ref = make_leaf(new Leaf{key, value});
            ++size_;
            return OpStatus::Ok;
        }
        if (is_leaf(cur)) {
            Leaf* l = as_leaf(cur);
            if (l->key == key) return OpStatus::AlreadyExists;
            // Two keys on one edge: branch where their bytes diverge and
            // keep the shared run as the new node's prefix.
            const auto lb = key_to_radix_bytes(l->key);
            std::size_t d = depth;
            while (lb[d] == kb[d]) ++d;
            auto* n = new Node4();
            n->prefix_len = std::uint8_t(d - depth);
            for (std::size_t i = 0; i < n->prefix_len; ++i) n->prefix[i] = kb[depth + i];
            add_child_in_place(n, lb[d], cur);
            add_child_in_place(n, kb[d], make_leaf(new Leaf{key, value}));
            *ref = n;
            ++size_;
            return OpStatus::Ok;
        }
        Node* n = as_node(cur);
        std::size_t matched = 0;
        while (matched < n->prefix_len && n->prefix[matched] == kb[depth + matched]) ++matched;
        if (matched < n->prefix_len) {
            // Diverged inside the compressed run: split it.
            auto* split = new Node4();
            split->prefix_len = std::uint8_t(matched);
            for (std::size_t i = 0; i < matched; ++i) split->prefix[i] = n->prefix[i];
            const std::uint8_t old_edge = n->prefix[matched];
            const std::uint8_t rest = std::uint8_t(n->prefix_len - matched - 1);
            for (std::size_t i = 0; i < rest; ++i) n->prefix[i] = n->prefix[matched + 1 + i];
            n->prefix_len = rest;
            add_child_in_place(split, old_edge, n);
            add_child_in_place(split, kb[depth + matched], make_leaf(new Leaf{key, value}));
            *ref = split;
            ++size_;
            return OpStatus::Ok;
        }
        depth += n->prefix_len;
        void** child = find_child(n, kb[depth]);
        if (!child) {
            add_child(ref, kb[depth], make_leaf(new Leaf{key, value}));
            ++size_;
            return OpStatus::Ok;
        }
        ref = child;
        ++depth;
    }
}

std::optional<Value> ArtIndex::read(Key key) const {
    const Leaf* l = find_leaf(root_, key);
    if (!l) return std::nullopt;
    return l->value;
}

OpStatus ArtIndex::update(Key key, Value value) {
    Leaf* l = find_leaf(root_, key);
    if (!l) return OpStatus::NotFound;
    l->value = value;
    return OpStatus::Ok;
}

OpStatus ArtIndex::erase(Key key) {
    const auto kb = key_to_radix_bytes(key);
    void** ref = &root_;
    std::size_t depth = 0;
    while (true) {
        void* cur = *ref;
        if (!cur) return OpStatus::NotFound;
        if (is_leaf(cur)) {
            Leaf* l = as_leaf(cur);
            if (l->key != key) return OpStatus::NotFound;
            delete l;
            *ref = nullptr;
            --size_;
            return OpStatus::Ok;
        }
        Node* n = as_node(cur);
        for (std::size_t i = 0; i < n->prefix_len; ++i)
            if (n->prefix[i] != kb[depth + i]) return OpStatus::NotFound;
        depth += n->prefix_len;
        void** child = find_child(n, kb[depth]);
        if (!child) return OpStatus::NotFound;
        if (is_leaf(*child)) {
            Leaf* l = as_leaf(*child);
            if (l->key != key) return OpStatus::NotFound;
            delete l;
            remove_child(ref, kb[depth]);
            --size_;
            return OpStatus::Ok;
        }
        ref = child;
        ++depth;
    }
}

void ArtIndex::bulk_load(std::span<const std::pair<Key, Value>> items) {
    check_bulk_input(items);
    destroy(root_);
    root_ = nullptr;
    size_ = 0;
    for (const auto& [k, v] : items) insert(k, v);
}

std::size_t ArtIndex::size() const { return size_; }

void ArtIndex::collect(std::vector<std::pair<Key, Value>>& out) const {
    for_each(root_, [&](const Leaf& l) { out.emplace_back(l.key, l.value); });
}

ArtIndex::DebugStats ArtIndex::debug_stats() const {
    DebugStats st;
    struct Walker {
        static void walk(const void* p, std::size_t depth, DebugStats& st) {
            if (!p) return;
            st.max_depth = std::max(st.max_depth, depth);
            if (is_leaf(p)) {
                ++st.leaves;
                return;
            }
            const Node* n = as_node(p);
            switch (n->type) {
                case kNode4: ++st.node4; break;
                case kNode16: ++st.node16; break;
                case kNode48: ++st.node48; break;
                case kNode256: ++st.node256; break;
            }
            switch (n->type) {
                case kNode4: {
                    auto* n4 = static_cast<const Node4*>(n);
                    for (int i = 0; i < n4->count; ++i) walk(n4->children[i], depth + 1, st);
                    break;
                }
                case kNode16: {
                    auto* n16 = static_cast<const Node16*>(n);
                    for (int i = 0; i < n16->count; ++i) walk(n16->children[i], depth + 1, st);
                    break;
                }
                case kNode48: {
                    auto* n48 = static_cast<const Node48*>(n);
                    for (int i = 0; i < 48; ++i)
                        if (n48->children[i]) walk(n48->children[i], depth + 1, st);
                    break;
                }
                case kNode256: {
                    auto* n256 = static_cast<const Node256*>(n);
                    for (int i = 0; i < 256; ++i)
                        if (n256->children[i]) walk(n256->children[i], depth + 1, st);
                    break;
                }
            }
        }
    };
    Walker::walk(root_, 1, st);
    return st;
}

bool ArtIndex::validate(std::string* why) const {
    struct Checker {
        std::string* why;
        std::size_t leaves = 0;
        bool ok = true;

        void fail(const char* msg) {
            if (why && ok) *why = msg;
            ok = false;
        }

        void walk(const void* p, std::array<std::uint8_t, 8> path, std::size_t depth) {
            if (!ok || !p) return;
            if (is_leaf(p)) {
                ++leaves;
                const auto kb = key_to_radix_bytes(as_leaf(p)->key);
                for (std::size_t i = 0; i < depth; ++i)
                    if (kb[i] != path[i]) return fail("leaf key disagrees with its path");
                return;
            }
            const Node* n = as_node(p);
            if (depth + n->prefix_len >= 8) return fail("path longer than the key");
            for (std::size_t i = 0; i < n->prefix_len; ++i) path[depth + i] = n->prefix[i];
            const std::size_t edge_at = depth + n->prefix_len;

            int lo = 0, hi = 0;
            switch (n->type) {
                case kNode4: lo = 2, hi = 4; break;
                case kNode16: lo = 5, hi = 16; break;
                case kNode48: lo = 17, hi = 48; break;
                case kNode256: lo = 49, hi = 256; break;
            }
            if (n->count < lo || n->count > hi) return fail("child count outside node type band");

            switch (n->type) {
                case kNode4:
                case kNode16: {
                    const std::uint8_t* keys = n->type == kNode4
                                                   ? static_cast<const Node4*>(n)->keys
                                                   : static_cast<const Node16*>(n)->keys;
                    void* const* children = n->type == kNode4
                                                ? static_cast<const Node4*>(n)->children
                                                : static_cast<const Node16*>(n)->children;
                    for (int i = 0; i < n->count; ++i) {
                        if (i > 0 && keys[i] <= keys[i - 1]) return fail("edge bytes unsorted");
                        if (!children[i]) return fail("missing child pointer");
                        path[edge_at] = keys[i];
                        walk(children[i], path, edge_at + 1);
                    }
                    break;
                }
                case kNode48: {
                    auto* n48 = static_cast<const Node48*>(n);
                    int seen = 0;
                    bool used[48] = {};
                    for (int b = 0; b < 256; ++b) {
                        const std::uint8_t s = n48->child_index[b];
                        if (s == kEmptySlot) continue;
                        if (s >= 48 || used[s]) return fail("child_index slot reuse");
                        used[s] = true;
                        if (!n48->children[s]) return fail("child_index points at null");
                        ++seen;
                        path[edge_at] = std::uint8_t(b);
                        walk(n48->children[s], path, edge_at + 1);
                    }
                    if (seen != n->count) return fail("child_index count mismatch");
                    break;
                }
                case kNode256: {
                    auto* n256 = static_cast<const Node256*>(n);
                    int seen = 0;
                    for (int b = 0; b < 256; ++b) {
                        if (!n256->children[b]) continue;
                        ++seen;
                        path[edge_at] = std::uint8_t(b);
                        walk(n256->children[b], path, edge_at + 1);
                    }
                    if (seen != n->count) return fail("child count mismatch");
                    break;
                }
            }
        }
    } checker{why};
    checker.walk(root_, {}, 0);
    if (!checker.ok) return false;
    if (checker.leaves != size_) {
        if (why) *why = "reachable leaves disagree with size()";
        return false;
    }
    return true;
}

}  // namespace imb

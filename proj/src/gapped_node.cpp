#include "imb/gapped_node.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <cmath>

namespace imb {

namespace {

std::size_t words_for(std::size_t capacity) { return (capacity + 63) / 64; }

std::size_t initial_capacity(const AlexConfig& cfg, std::size_t n) {
    std::size_t want = static_cast<std::size_t>(std::ceil(double(n) / cfg.init_density));
    return std::max(cfg.min_node_slots, want);
}

}  // namespace

GappedNode::GappedNode(const AlexConfig& cfg) : cfg_(cfg) {
    capacity_ = cfg.min_node_slots;
    keys_.resize(capacity_);
    values_.resize(capacity_);
    occupied_.assign(words_for(capacity_), 0);
}

GappedNode::GappedNode(const AlexConfig& cfg, std::span<const std::pair<Key, Value>> items)
    : GappedNode(cfg) {
    if (items.empty()) return;
    keys_.clear();
    values_.clear();
    keys_.reserve(items.size());
    values_.reserve(items.size());
    for (const auto& [k, v] : items) {
        keys_.push_back(k);
        values_.push_back(v);
    }
    occupancy_ = items.size();
    occupied_.assign(words_for(occupancy_), 0);
    for (std::size_t i = 0; i < occupancy_; ++i) set_bit(i);
    capacity_ = occupancy_;
    AlexStats scratch;
    rebuild(initial_capacity(cfg_, occupancy_), true, scratch);
    has_max_ = true;
    max_key_ = items.back().first;
}

std::optional<Key> GappedNode::min_key() const {
    std::size_t i = next_occupied(0);
    if (i == capacity_) return std::nullopt;
    return keys_[i];
}

std::optional<Key> GappedNode::max_key() const {
    if (!has_max_) return std::nullopt;
    return max_key_;
}

std::ptrdiff_t GappedNode::prev_occupied(std::ptrdiff_t from) const {
    if (from < 0) return -1;
    if (from >= std::ptrdiff_t(capacity_)) from = std::ptrdiff_t(capacity_) - 1;
    std::size_t w = std::size_t(from) >> 6;
    std::uint64_t word = occupied_[w] & (~std::uint64_t(0) >> (63 - (std::size_t(from) & 63)));
    while (true) {
        if (word) return std::ptrdiff_t((w << 6) + 63 - std::countl_zero(word));
        if (w == 0) return -1;
        word = occupied_[--w];
    }
}

std::size_t GappedNode::next_occupied(std::size_t from) const {
    if (from >= capacity_) return capacity_;
    std::size_t w = from >> 6;
    std::uint64_t word = occupied_[w] & (~std::uint64_t(0) << (from & 63));
    while (true) {
        if (word) {
            std::size_t slot = (w << 6) + std::size_t(std::countr_zero(word));
            return slot < capacity_ ? slot : capacity_;
        }
        if (++w == occupied_.size()) return capacity_;
        word = occupied_[w];
    }
}

std::size_t GappedNode::next_gap(std::size_t from) const {
    if (from >= capacity_) return capacity_;
    std::size_t w = from >> 6;
    std::uint64_t word = ~occupied_[w] & (~std::uint64_t(0) << (from & 63));
    while (true) {
        if (word) {
            std::size_t slot = (w << 6) + std::size_t(std::countr_zero(word));
            return slot < capacity_ ? slot : capacity_;
        }
        if (++w == occupied_.size()) return capacity_;
        word = ~occupied_[w];
    }
}

std::ptrdiff_t GappedNode::prev_gap(std::ptrdiff_t from) const {
    if (from < 0) return -1;
    if (from >= std::ptrdiff_t(capacity_)) from = std::ptrdiff_t(capacity_) - 1;
    std::size_t w = std::size_t(from) >> 6;
    std::uint64_t word = ~occupied_[w] & (~std::uint64_t(0) >> (63 - (std::size_t(from) & 63)));
    while (true) {
        if (word) return std::ptrdiff_t((w << 6) + 63 - std::countl_zero(word));
        if (w == 0) return -1;
        word = ~occupied_[--w];
    }
}

GappedNode::SearchResult GappedNode::exponential_search(std::size_t start, Key key,
                                                        std::uint64_t& steps) const {
    if (occupancy_ == 0) return {false, 0};
    if (start >= capacity_) start = capacity_ - 1;

    // Compares `key` against the effective key at position p: the key of
    // the rightmost occupied slot <= p, or -infinity when there is none.
    // Returns <0 / 0 / >0, and the matching slot through `match`.
    auto cmp_at = [&](std::ptrdiff_t p, std::ptrdiff_t& match) -> int {
        std::ptrdiff_t o = prev_occupied(p);
        if (o < 0) return -1;
        ++steps;
        match = o;
        if (keys_[std::size_t(o)] < key) return -1;
        return keys_[std::size_t(o)] == key ? 0 : 1;
    };

    std::ptrdiff_t match = -1;
    std::ptrdiff_t lo, hi;
    int c0 = cmp_at(std::ptrdiff_t(start), match);
    if (c0 == 0) return {true, std::size_t(match)};

    if (c0 < 0) {
        // Effective key below target: double the stride to the right.
        std::ptrdiff_t prev = std::ptrdiff_t(start);
        std::ptrdiff_t stride = 1;
        while (true) {
            std::ptrdiff_t p = prev == std::ptrdiff_t(capacity_) - 1
                                   ? prev
                                   : std::min(std::ptrdiff_t(start) + stride,
                                              std::ptrdiff_t(capacity_) - 1);
            if (p == prev) {
                // Ran off the right end: key is larger than everything.
                return {false, std::size_t(prev_occupied(p) + 1)};
            }
            int c = cmp_at(p, match);
            if (c == 0) return {true, std::size_t(match)};
            if (c > 0) {
                lo = prev;
                hi = p;
                break;
            }
            prev = p;
            stride <<= 1;
        }
    } else {
        // Effective key above target: double the stride to the left.
        std::ptrdiff_t prev = std::ptrdiff_t(start);
        std::ptrdiff_t stride = 1;
        while (true) {
            std::ptrdiff_t p = std::max<std::ptrdiff_t>(std::ptrdiff_t(start) - stride, -1);
            if (p < 0) {
                lo = -1;
                hi = prev;
                break;
            }
            int c = cmp_at(p, match);
            if (c == 0) return {true, std::size_t(match)};
            if (c < 0) {
                lo = p;
                hi = prev;
                break;
            }
            prev = p;
            stride <<= 1;
        }
    }

    // Invariant: effective key at lo < target < effective key at hi.
    while (lo + 1 < hi) {
        std::ptrdiff_t mid = lo + (hi - lo) / 2;
        int c = cmp_at(mid, match);
        if (c == 0) return {true, std::size_t(match)};
        if (c < 0)
            lo = mid;
        else
            hi = mid;
    }
    return {false, std::size_t(prev_occupied(lo) + 1)};
}

std::optional<Value> GappedNode::lookup(Key key, AlexStats& stats) const {
    auto r = exponential_search(predict(key), key, stats.exponential_search_steps);
    if (!r.found) return std::nullopt;
    return values_[r.slot];
}

void GappedNode::write_slot(std::size_t slot, Key key, Value value) {
    keys_[slot] = key;
    values_[slot] = value;
    set_bit(slot);
}

void GappedNode::move_slot(std::size_t from, std::size_t to) {
    keys_[to] = keys_[from];
    values_[to] = values_[from];
    set_bit(to);
    clear_bit(from);
}

void GappedNode::place_at(std::size_t slot, Key key, Value value) {
    if (slot < capacity_ && !bit(slot)) {
        write_slot(slot, key, value);
        return;
    }
    std::size_t anchored = std::min(slot, capacity_ - 1);
    std::size_t gap_right = slot < capacity_ ? next_gap(slot) : capacity_;
    std::ptrdiff_t gap_left = prev_gap(std::ptrdiff_t(anchored));
    assert(gap_right < capacity_ || gap_left >= 0);

    bool use_right;
    if (gap_right == capacity_)
        use_right = false;
    else if (gap_left < 0)
        use_right = true;
    else
        use_right = (gap_right - slot) <= (anchored - std::size_t(gap_left));

    if (use_right) {
        for (std::size_t i = gap_right; i > slot; --i) move_slot(i - 1, i);
        write_slot(slot, key, value);
    } else {
        // Shift [gap_left+1, slot-1] down one; the element lands at slot-1,
        // which keeps it right of every smaller key.
        std::size_t target = slot == 0 ? 0 : slot - 1;
        for (std::size_t i = std::size_t(gap_left); i < target; ++i) move_slot(i + 1, i);
        write_slot(target, key, value);
    }
}

void GappedNode::note_insert_pattern(Key key, AlexStats& stats) {
    const bool append = !has_max_ || key > max_key_;
    if (append) {
        max_key_ = key;
        has_max_ = true;
        if (append_only_) {
            ++stats.appends_without_remodel;
        } else if (++ascending_run_ >= cfg_.append_window) {
            append_only_ = true;
        }
    } else {
        ascending_run_ = 0;
        append_only_ = false;
    }
}

GappedNode::InsertOutcome GappedNode::insert(Key key, Value value, AlexStats& stats) {
    auto r = exponential_search(predict(key), key, stats.exponential_search_steps);
    if (r.found) return InsertOutcome::Duplicate;
    place_at(r.slot, key, value);
    ++occupancy_;
    note_insert_pattern(key, stats);
    if (density() > cfg_.density_upper) {
        std::size_t grown =
            static_cast<std::size_t>(double(capacity_) * cfg_.expansion_factor);
        if (grown > cfg_.max_node_slots) return InsertOutcome::NeedsSplit;
        expand(stats);
    }
    return InsertOutcome::Inserted;
}

OpStatus GappedNode::update(Key key, Value value, AlexStats& stats) {
    auto r = exponential_search(predict(key), key, stats.exponential_search_steps);
    if (!r.found) return OpStatus::NotFound;
    values_[r.slot] = value;
    return OpStatus::Ok;
}

bool GappedNode::erase(Key key, AlexStats& stats) {
    auto r = exponential_search(predict(key), key, stats.exponential_search_steps);
    if (!r.found) return false;
    clear_bit(r.slot);
    --occupancy_;
    if (has_max_ && keys_[r.slot] == max_key_) {
        std::ptrdiff_t o = prev_occupied(std::ptrdiff_t(capacity_) - 1);
        has_max_ = o >= 0;
        if (has_max_) max_key_ = keys_[std::size_t(o)];
    }
    return true;
}

void GappedNode::expand(AlexStats& stats) {
    std::size_t grown = static_cast<std::size_t>(double(capacity_) * cfg_.expansion_factor);
    grown = std::max(grown, capacity_ + 1);
    ++stats.node_expansions;
    if (append_only_) {
        // Extend in place: existing slots keep their position so the model
        // stays exact for them, and appends land in the fresh tail.
        keys_.resize(grown);
        values_.resize(grown);
        occupied_.resize(words_for(grown), 0);
        capacity_ = grown;
        return;
    }
    rebuild(grown, true, stats);
}

void GappedNode::rebuild(std::size_t new_capacity, bool retrain, AlexStats& stats) {
    std::vector<std::pair<Key, Value>> items;
    items.reserve(occupancy_);
    gather(items);
    const std::size_t n = items.size();
    assert(new_capacity >= n);

    if (retrain && n > 0) {
        std::vector<Key> ks(n);
        std::vector<double> pos(n);
        for (std::size_t i = 0; i < n; ++i) {
            ks[i] = items[i].first;
            pos[i] = n == 1 ? 0.0
                            : double(i) * double(new_capacity - 1) / double(n - 1);
        }
        model_ = train_linear_model(ks, pos);
        ++stats.model_retrains;
    }

    keys_.assign(new_capacity, 0);
    values_.assign(new_capacity, 0);
    occupied_.assign(words_for(new_capacity), 0);
    capacity_ = new_capacity;
    occupancy_ = 0;

    if (n > 0) {
        // Place each element at its predicted slot, nudged right to stay
        // strictly increasing, then pulled back if the tail would overflow.
        std::vector<std::size_t> pos(n);
        std::size_t prev = 0;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t want = predict_slot(model_, items[i].first, new_capacity);
            pos[i] = i == 0 ? want : std::max(want, prev + 1);
            prev = pos[i];
        }
        if (pos[n - 1] >= new_capacity) {
            for (std::size_t i = n; i-- > 0;) {
                std::size_t ceiling = new_capacity - (n - i);
                if (pos[i] > ceiling)
                    pos[i] = ceiling;
                else
                    break;
            }
        }
        for (std::size_t i = 0; i < n; ++i) write_slot(pos[i], items[i].first, items[i].second);
        occupancy_ = n;
        has_max_ = true;
        max_key_ = items.back().first;
    } else {
        has_max_ = false;
    }
}

std::pair<std::unique_ptr<GappedNode>, std::unique_ptr<GappedNode>>
GappedNode::split_at_median(AlexStats& stats) const {
    std::vector<std::pair<Key, Value>> items;
    items.reserve(occupancy_);
    gather(items);
    const std::size_t cut = items.size() / 2;
    ++stats.node_splits;
    stats.model_retrains += 2;
    auto left = std::make_unique<GappedNode>(
        cfg_, std::span<const std::pair<Key, Value>>(items.data(), cut));
    auto right = std::make_unique<GappedNode>(
        cfg_, std::span<const std::pair<Key, Value>>(items.data() + cut, items.size() - cut));
    return {std::move(left), std::move(right)};
}

std::pair<std::unique_ptr<GappedNode>, std::unique_ptr<GappedNode>>
GappedNode::split_at_key(Key boundary, AlexStats& stats) const {
    std::vector<std::pair<Key, Value>> items;
    items.reserve(occupancy_);
    gather(items);
    auto mid = std::partition_point(items.begin(), items.end(),
                                    [&](const auto& kv) { return kv.first < boundary; });
    const std::size_t cut = std::size_t(mid - items.begin());
    ++stats.node_splits;
    stats.model_retrains += 2;
    auto left = std::make_unique<GappedNode>(
        cfg_, std::span<const std::pair<Key, Value>>(items.data(), cut));
    auto right = std::make_unique<GappedNode>(
        cfg_, std::span<const std::pair<Key, Value>>(items.data() + cut, items.size() - cut));
    return {std::move(left), std::move(right)};
}

void GappedNode::gather(std::vector<std::pair<Key, Value>>& out) const {
    for (std::size_t i = next_occupied(0); i < capacity_; i = next_occupied(i + 1))
        out.emplace_back(keys_[i], values_[i]);
}

bool GappedNode::check_consistent() const {
    if (keys_.size() != capacity_ || values_.size() != capacity_) return false;
    if (occupied_.size() != words_for(capacity_)) return false;
    std::size_t count = 0;
    bool have_prev = false;
    Key prev = 0, last = 0;
    for (std::size_t i = 0; i < capacity_; ++i) {
        if (!bit(i)) continue;
        ++count;
        if (have_prev && keys_[i] <= prev) return false;
        prev = keys_[i];
        last = keys_[i];
        have_prev = true;
    }
    if (count != occupancy_) return false;
    if (has_max_ != (count > 0)) return false;
    if (count > 0 && last != max_key_) return false;
    return true;
}

}  // namespace imb

#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "imb/linear_model.hpp"
#include "imb/types.hpp"

namespace imb {

struct AlexConfig {
    // Occupancy band for data nodes: expand above the upper bound, build
    // fresh nodes near the middle of the band.
    double density_lower = 0.6;
    double density_upper = 0.8;
    double init_density = 0.7;
    double expansion_factor = 2.0;
    std::size_t min_node_slots = 16;
    std::size_t max_node_slots = std::size_t(1) << 14;
    std::size_t inner_fanout = 16;
    // Consecutive past-the-max inserts required before a node stops
    // remodelling and starts growing by plain array extension.
    std::uint32_t append_window = 32;
};

struct AlexStats {
    std::uint64_t model_retrains = 0;
    std::uint64_t node_expansions = 0;
    std::uint64_t node_splits = 0;
    std::uint64_t appends_without_remodel = 0;
    std::uint64_t exponential_search_steps = 0;
};

// A model-indexed sorted array with gaps. Keys live at (or near) the slot
// the linear model predicts for them; unoccupied slots absorb inserts
// without shifting the whole tail.
class GappedNode {
  public:
    struct SearchResult {
        bool found;
        std::size_t slot;  // match slot, or insertion slot when !found
    };

    enum class InsertOutcome { Inserted, Duplicate, NeedsSplit };

    explicit GappedNode(const AlexConfig& cfg);
    // Builds a node holding `items` (sorted, unique), sized so the initial
    // density lands at cfg.init_density, and trains a fresh model.
    GappedNode(const AlexConfig& cfg, std::span<const std::pair<Key, Value>> items);

    std::size_t capacity() const { return capacity_; }
    std::size_t occupancy() const { return occupancy_; }
    double density() const { return capacity_ ? double(occupancy_) / double(capacity_) : 0.0; }
    const LinearModel& model() const { return model_; }
    bool append_only_mode() const { return append_only_; }
    bool occupied(std::size_t slot) const { return bit(slot); }
    Key key_at(std::size_t slot) const { return keys_[slot]; }
    Value value_at(std::size_t slot) const { return values_[slot]; }
    std::optional<Key> min_key() const;
    std::optional<Key> max_key() const;

    std::size_t predict(Key key) const { return predict_slot(model_, key, capacity_); }

    // Locates `key` starting from slot `start`: doubling probes outward
    // until the target is bracketed, then a binary search. A probed gap
    // stands in for the nearest occupied slot to its left. When the key is
    // absent, `slot` is where an insert should place it (one past the
    // rightmost smaller key; may equal capacity()).
    SearchResult exponential_search(std::size_t start, Key key, std::uint64_t& steps) const;
    SearchResult exponential_search(std::size_t start, Key key) const {
        std::uint64_t steps = 0;
        return exponential_search(start, key, steps);
    }

    std::optional<Value> lookup(Key key, AlexStats& stats) const;

    // Places the pair, shifting towards the nearest gap when the target
    // slot is taken, then expands if the density bound is exceeded. Returns
    // NeedsSplit (with the pair already placed) when expansion would
    // overshoot max_node_slots; the tree resolves that by splitting.
    InsertOutcome insert(Key key, Value value, AlexStats& stats);
    OpStatus update(Key key, Value value, AlexStats& stats);
    bool erase(Key key, AlexStats& stats);

    // Grows capacity by the expansion factor. Normally the model is
    // retrained and every element re-placed; in append-only mode the layout
    // and model are kept and the new slots just extend the tail.
    void expand(AlexStats& stats);

    // Splits into two nodes, either at the median element or at a key
    // boundary (left < boundary <= right). Either side may come out empty
    // under a boundary split; both are rebuilt at init_density.
    std::pair<std::unique_ptr<GappedNode>, std::unique_ptr<GappedNode>>
    split_at_median(AlexStats& stats) const;
    std::pair<std::unique_ptr<GappedNode>, std::unique_ptr<GappedNode>>
    split_at_key(Key boundary, AlexStats& stats) const;

    void gather(std::vector<std::pair<Key, Value>>& out) const;

    // Structural self-check used by tests: bitmap vs occupancy, sortedness
    // across occupied slots, cached max key. Returns false on any mismatch.
    bool check_consistent() const;

  private:
    bool bit(std::size_t i) const {
        return (occupied_[i >> 6] >> (i & 63)) & 1u;
    }
    void set_bit(std::size_t i) { occupied_[i >> 6] |= std::uint64_t(1) << (i & 63); }
    void clear_bit(std::size_t i) { occupied_[i >> 6] &= ~(std::uint64_t(1) << (i & 63)); }

    // Rightmost occupied slot <= from, or -1.
    std::ptrdiff_t prev_occupied(std::ptrdiff_t from) const;
    // Leftmost occupied slot >= from, or capacity().
    std::size_t next_occupied(std::size_t from) const;
    std::size_t next_gap(std::size_t from) const;
    std::ptrdiff_t prev_gap(std::ptrdiff_t from) const;

    void place_at(std::size_t slot, Key key, Value value);
    void write_slot(std::size_t slot, Key key, Value value);
    void move_slot(std::size_t from, std::size_t to);
    void note_insert_pattern(Key key, AlexStats& stats);

    // Re-places all elements into `new_capacity` slots, optionally fitting
    // a fresh model against evenly spread target positions first.
    void rebuild(std::size_t new_capacity, bool retrain, AlexStats& stats);

    AlexConfig cfg_;
    std::size_t capacity_ = 0;
    std::size_t occupancy_ = 0;
    std::vector<Key> keys_;
    std::vector<Value> values_;
    std::vector<std::uint64_t> occupied_;
    LinearModel model_;
    bool append_only_ = false;
    std::uint32_t ascending_run_ = 0;
    bool has_max_ = false;
    Key max_key_ = 0;
};

}  // namespace imb

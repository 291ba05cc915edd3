#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "imb/types.hpp"

namespace imb {

// Common contract for every index under test. Keys are unique: inserting an
// existing key fails with AlreadyExists and leaves the stored value alone.
class Index {
  public:
    virtual ~Index() = default;

    virtual OpStatus insert(Key key, Value value) = 0;
    virtual std::optional<Value> read(Key key) const = 0;
    virtual OpStatus update(Key key, Value value) = 0;
    virtual OpStatus erase(Key key) = 0;

    // Replaces the current contents with `items`, which must be sorted by
    // key and duplicate-free (throws std::invalid_argument otherwise).
    virtual void bulk_load(std::span<const std::pair<Key, Value>> items) = 0;

    virtual std::size_t size() const = 0;

    // Appends all live entries in ascending key order.
    virtual void collect(std::vector<std::pair<Key, Value>>& out) const = 0;

    virtual const char* name() const = 0;
};

inline void check_bulk_input(std::span<const std::pair<Key, Value>> items) {
    for (std::size_t i = 1; i < items.size(); ++i) {
        if (items[i].first <= items[i - 1].first)
            throw std::invalid_argument("bulk_load input must be sorted and duplicate-free");
    }
}

// Reference implementation used as ground truth in tests.
class OracleIndex final : public Index {
  public:
    OpStatus insert(Key key, Value value) override {
        auto [it, inserted] = map_.emplace(key, value);
        return inserted ? OpStatus::Ok : OpStatus::AlreadyExists;
    }

    std::optional<Value> read(Key key) const override {
        auto it = map_.find(key);
        if (it == map_.end()) return std::nullopt;
        return it->second;
    }

    OpStatus update(Key key, Value value) override {
        auto it = map_.find(key);
        if (it == map_.end()) return OpStatus::NotFound;
        it->second = value;
        return OpStatus::Ok;
    }

    OpStatus erase(Key key) override {
        return map_.erase(key) ? OpStatus::Ok : OpStatus::NotFound;
    }

    void bulk_load(std::span<const std::pair<Key, Value>> items) override {
        check_bulk_input(items);
        map_.clear();
        map_.insert(items.begin(), items.end());
    }

    std::size_t size() const override { return map_.size(); }

    void collect(std::vector<std::pair<Key, Value>>& out) const override {
        out.insert(out.end(), map_.begin(), map_.end());
    }

    const char* name() const override { return "oracle"; }

  private:
    std::map<Key, Value> map_;
};

// Does nothing; exists to measure the harness' own overhead.
class NoopIndex final : public Index {
  public:
    OpStatus insert(Key, Value) override { return OpStatus::Ok; }
    std::optional<Value> read(Key) const override { return 0; }
    OpStatus update(Key, Value) override { return OpStatus::Ok; }
    OpStatus erase(Key) override { return OpStatus::Ok; }
    void bulk_load(std::span<const std::pair<Key, Value>> items) override {
        check_bulk_input(items);
        loaded_ = items.size();
    }
    std::size_t size() const override { return loaded_; }
    void collect(std::vector<std::pair<Key, Value>>&) const override {}
    const char* name() const override { return "noop"; }

  private:
    std::size_t loaded_ = 0;
};

}  // namespace imb

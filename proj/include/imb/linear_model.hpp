#pragma once

#include <cstddef>
#include <span>

#include "imb/types.hpp"

namespace imb {

// y = slope * key + intercept, mapping keys to (fractional) slot positions.
struct LinearModel {
    double slope = 0.0;
    double intercept = 0.0;

    double predict(double key) const { return slope * key + intercept; }
};

// Ordinary least squares fit of positions against keys. A single point (or
// a degenerate all-equal key set) yields slope 0 and intercept equal to the
// mean position. Throws std::invalid_argument on empty or mismatched input.
LinearModel train_linear_model(std::span<const Key> keys, std::span<const double> positions);

// Rounds the model output half-up and clamps it into [0, capacity).
std::size_t predict_slot(const LinearModel& model, Key key, std::size_t capacity);

}  // namespace imb

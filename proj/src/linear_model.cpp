#include "imb/linear_model.hpp"

#include <cmath>
#include <stdexcept>

namespace imb {

LinearModel train_linear_model(std::span<const Key> keys, std::span<const double> positions) {
    if (keys.empty() || keys.size() != positions.size())
        throw std::invalid_argument("train_linear_model: need n >= 1 keys with matching positions");

    const std::size_t n = keys.size();
    if (n == 1) return {0.0, positions[0]};

    // Center on the means before accumulating; keys can be large enough
    // that raw sums of squares lose precision.
    double key_mean = 0.0, pos_mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        key_mean += static_cast<double>(keys[i]);
        pos_mean += positions[i];
    }
    key_mean /= static_cast<double>(n);
    pos_mean /= static_cast<double>(n);

    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = static_cast<double>(keys[i]) - key_mean;
        sxx += dx * dx;
        sxy += dx * (positions[i] - pos_mean);
    }

    if (sxx == 0.0) return {0.0, pos_mean};
    const double slope = sxy / sxx;
    return {slope, pos_mean - slope * key_mean};
}

std::size_t predict_slot(const LinearModel& model, Key key, std::size_t capacity) {
    const double p = std::floor(model.predict(static_cast<double>(key)) + 0.5);
    if (!(p > 0.0)) return 0;  // also catches NaN
    if (p >= static_cast<double>(capacity)) return capacity - 1;
    return static_cast<std::size_t>(p);
}

}  // namespace imb

#pragma once

#include <cstddef>
#include <span>

namespace lut4d {

// Pairwise (tree) summation: fixed association order, O(log n) error growth.
inline double pairwise_sum(std::span<const double> v) noexcept {
    constexpr std::size_t kLeaf = 8;
    if (v.size() <= kLeaf) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t half = v.size() / 2;
    return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

}  // namespace lut4d

#pragma once

#include <vector>

#include "lut4d/fusion.hpp"
#include "lut4d/lattice.hpp"

namespace lut4d {

// Sum over channels and over the four axes of squared differences between
// adjacent nodes. The differenced index stops at (axis size - 2).
double smooth_lut(const Lattice4D& l4);

// Number of (channel, axis, adjacent pair) terms summed by smooth_lut and
// monotonicity.
std::size_t adjacent_pair_count(std::size_t n_bin, std::size_t n_ctx) noexcept;

// Sum of squared weights and biases.
double smooth_coef(const FusionCoefficients& coef);

double smooth_total(const Lattice4D& l4, const FusionCoefficients& coef);

// Sum over channels and axes of max(0, p(current) - p(next)).
double monotonicity(const Lattice4D& l4);

struct RegularizerGrad {
    std::vector<double> d_lattice;
    FusionCoefficients d_coef;
};

// Gradient of alpha_s * smooth_total + alpha_m * monotonicity. The ReLU
// subgradient at exactly zero is taken as zero.
RegularizerGrad regularizer_backward(const Lattice4D& l4, const FusionCoefficients& coef,
                                     double alpha_s, double alpha_m);

}  // namespace lut4d

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lut4d/lattice.hpp"

namespace lut4d {

// Image-adaptive fusion coefficients: 3*N^2 weights and N biases for N basis
// LUTs.
//
// Weight layout. The weight vector is N blocks of 3N. Output channel c reads
// block (c mod N); inside a block, entry s*N + n scales channel (c + s) mod 3
// of basis n. So s = 0 is the output's own channel and, for the red output,
// entries n, N+n, 2N+n multiply the red, green and blue planes of basis n.
// With the default N = 3 each output channel owns a block; with N = 1 all
// three share one. Biases are shared across output channels.
struct FusionCoefficients {
    std::vector<double> weights;
    std::vector<double> biases;

    FusionCoefficients() = default;
    explicit FusionCoefficients(std::size_t n_lut)
        : weights(3 * n_lut * n_lut, 0.0), biases(n_lut, 0.0) {}
    FusionCoefficients(std::vector<double> w, std::vector<double> b);

    std::size_t n_lut() const noexcept { return biases.size(); }
    std::size_t size() const noexcept { return weights.size() + biases.size(); }

    // Flat view: weights followed by biases.
    std::vector<double> flatten() const;
    static FusionCoefficients unflatten(std::span<const double> flat, std::size_t n_lut);
};

std::size_t fusion_weight_count(std::size_t n_lut) noexcept;
std::size_t fusion_bias_count(std::size_t n_lut) noexcept;

// Index into `weights` of the coefficient that scales channel
// (out_ch + rel) mod 3 of basis n when producing output channel out_ch.
std::size_t fusion_weight_index(std::size_t n_lut, std::size_t out_ch, std::size_t rel,
                                std::size_t n) noexcept;

// Coefficients that make fuse() return basis 0 unchanged.
FusionCoefficients identity_coefficients(std::size_t n_lut);

using BasisBank = std::vector<Lattice4D>;

// Throws InvalidArgument on an empty bank, mixed sizes, or a coefficient
// count that does not match the bank.
void validate(const BasisBank& bank, const FusionCoefficients& coef);

Lattice4D fuse(const BasisBank& bank, const FusionCoefficients& coef);

struct FusionGrad {
    FusionCoefficients d_coef;
    std::vector<std::vector<double>> d_basis;  // one lattice-shaped buffer per basis
};

// `upstream` is dLoss/dFused, lattice-shaped.
FusionGrad fuse_backward(const BasisBank& bank, const FusionCoefficients& coef,
                         std::span<const double> upstream);

}  // namespace lut4d

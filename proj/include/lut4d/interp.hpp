#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "lut4d/image.hpp"
#include "lut4d/lattice.hpp"

namespace lut4d {

// Position along one lattice axis: lower cell index and fractional offset in
// [0,1]. A coordinate at the top node lands in the last cell with offset 1.
struct AxisCell {
    std::size_t index = 0;
    double offset = 0.0;
};

// Map a normalized sample (clamped to [0,1]) onto an axis with `size` nodes.
AxisCell locate(double value, std::size_t size) noexcept;

// Lattice coordinates of one query: x,y,z in [0, n_bin-1], u in [0, n_ctx-1].
struct Coord4 {
    double x = 0, y = 0, z = 0, u = 0;
};

Coord4 to_coord(const Lattice4D& l4, const Rgb& rgb, double c) noexcept;

Rgb trilinear(const Lattice3D& l3, const Rgb& rgb) noexcept;
Rgb quadrilinear(const Lattice4D& l4, const Rgb& rgb, double c) noexcept;

// The 16 corners touched by a quadrilinear lookup: channel-0 flat offset and
// interpolation weight. Weights sum to one.
struct CornerSet {
    std::array<std::size_t, 16> offset{};
    std::array<double, 16> weight{};
};

CornerSet quadrilinear_corners(const Lattice4D& l4, const Rgb& rgb, double c) noexcept;

struct LatticeContribution {
    std::size_t offset = 0;  // flat offset including the channel plane
    double value = 0.0;
};

// Backward pass of one quadrilinear lookup.
//   d_lattice[ch][n] : d(sum_ch upstream[ch] * out[ch]) / d(lattice entry)
//   d_u              : same loss differentiated w.r.t. the context sample c
//                      (already includes the (n_ctx - 1) chain factor)
struct InterpGrad {
    std::array<std::array<LatticeContribution, 16>, 3> d_lattice{};
    double d_u = 0.0;

    // Scatter d_lattice into a dense lattice-shaped gradient buffer.
    void accumulate_into(std::span<double> lattice_grad) const noexcept;
};

InterpGrad quadrilinear_backward(const Lattice4D& l4, const Rgb& rgb, double c,
                                 const Rgb& upstream) noexcept;

// Per-pixel quadrilinear lookup. Throws ShapeError when sizes disagree.
Image apply_lut4(const Lattice4D& l4, const Image& image, const ContextMap& context);

struct ApplyGrad {
    std::vector<double> d_lattice;  // lattice-shaped
    ContextMap d_context;
};

// Gradient of sum(upstream * apply_lut4(l4, image, context)) w.r.t. the
// lattice entries and the context map. The image is treated as data.
ApplyGrad apply_lut4_backward(const Lattice4D& l4, const Image& image,
                              const ContextMap& context, const Image& upstream);

// Trilinear counterpart of apply_lut4 for the 3D baseline.
Image apply_lut3(const Lattice3D& l3, const Image& image);

}  // namespace lut4d

#include "lut4d/interp.hpp"

#include <algorithm>
#include <cmath>

#include "lut4d/errors.hpp"

namespace lut4d {

AxisCell locate(double value, std::size_t size) noexcept {
    const double v = std::clamp(value, 0.0, 1.0);
    const double t = v * static_cast<double>(size - 1);
    auto idx = static_cast<std::size_t>(std::floor(t));
    if (idx > size - 2) idx = size - 2;
    return {idx, t - static_cast<double>(idx)};
}

Coord4 to_coord(const Lattice4D& l4, const Rgb& rgb, double c) noexcept {
    const double sb = static_cast<double>(l4.n_bin() - 1);
    const double sc = static_cast<double>(l4.n_ctx() - 1);
    return {std::clamp(rgb[0], 0.0, 1.0) * sb, std::clamp(rgb[1], 0.0, 1.0) * sb,
            std::clamp(rgb[2], 0.0, 1.0) * sb, std::clamp(c, 0.0, 1.0) * sc};
}

Rgb trilinear(const Lattice3D& l3, const Rgb& rgb) noexcept {
    const std::size_t n = l3.n_bin();
    const AxisCell cx = locate(rgb[0], n), cy = locate(rgb[1], n), cz = locate(rgb[2], n);
    const double wx[2] = {1.0 - cx.offset, cx.offset};
    const double wy[2] = {1.0 - cy.offset, cy.offset};
    const double wz[2] = {1.0 - cz.offset, cz.offset};
    auto v = l3.values();
    Rgb out{0.0, 0.0, 0.0};
    for (std::size_t dz = 0; dz < 2; ++dz)
        for (std::size_t dy = 0; dy < 2; ++dy)
            for (std::size_t dx = 0; dx < 2; ++dx) {
                const double w = wx[dx] * wy[dy] * wz[dz];
                for (std::size_t ch = 0; ch < 3; ++ch) {
                    out[ch] += w * v[l3.offset(ch, cx.index + dx, cy.index + dy, cz.index + dz)];
                }
            }
    return out;
}

namespace {

// Corner c in [0,16): bit 0 -> i+1, bit 1 -> j+1, bit 2 -> k+1, bit 3 -> l+1.
struct Cell4 {
    AxisCell x, y, z, u;
};

Cell4 locate4(const Lattice4D& l4, const Rgb& rgb, double c) noexcept {
    return {locate(rgb[0], l4.n_bin()), locate(rgb[1], l4.n_bin()),
            locate(rgb[2], l4.n_bin()), locate(c, l4.n_ctx())};
}

void fill_corners(const Lattice4D& l4, const Cell4& cell, CornerSet& cs) noexcept {
    const double wx[2] = {1.0 - cell.x.offset, cell.x.offset};
    const double wy[2] = {1.0 - cell.y.offset, cell.y.offset};
    const double wz[2] = {1.0 - cell.z.offset, cell.z.offset};
    const double wu[2] = {1.0 - cell.u.offset, cell.u.offset};
    for (std::size_t corner = 0; corner < 16; ++corner) {
        const std::size_t dx = corner & 1u, dy = (corner >> 1) & 1u, dz = (corner >> 2) & 1u,
                          du = (corner >> 3) & 1u;
        cs.offset[corner] = l4.offset(0, cell.x.index + dx, cell.y.index + dy,
                                      cell.z.index + dz, cell.u.index + du);
        cs.weight[corner] = wx[dx] * wy[dy] * wz[dz] * wu[du];
    }
}

}  // namespace

CornerSet quadrilinear_corners(const Lattice4D& l4, const Rgb& rgb, double c) noexcept {
    CornerSet cs;
    fill_corners(l4, locate4(l4, rgb, c), cs);
    return cs;
}

Rgb quadrilinear(const Lattice4D& l4, const Rgb& rgb, double c) noexcept {
    const CornerSet cs = quadrilinear_corners(l4, rgb, c);
    const std::size_t plane = l4.plane_size();
    auto v = l4.values();
    Rgb out{0.0, 0.0, 0.0};
    for (std::size_t corner = 0; corner < 16; ++corner) {
        const double w = cs.weight[corner];
        const std::size_t off = cs.offset[corner];
        out[0] += w * v[off];
        out[1] += w * v[off + plane];
        out[2] += w * v[off + 2 * plane];
    }
    return out;
}

void InterpGrad::accumulate_into(std::span<double> lattice_grad) const noexcept {
    for (const auto& per_channel : d_lattice)
        for (const auto& contrib : per_channel) lattice_grad[contrib.offset] += contrib.value;
}

InterpGrad quadrilinear_backward(const Lattice4D& l4, const Rgb& rgb, double c,
                                 const Rgb& upstream) noexcept {
    const Cell4 cell = locate4(l4, rgb, c);
    CornerSet cs;
    fill_corners(l4, cell, cs);
    const std::size_t plane = l4.plane_size();
    auto v = l4.values();

    InterpGrad g;
    for (std::size_t ch = 0; ch < 3; ++ch) {
        for (std::size_t corner = 0; corner < 16; ++corner) {
            g.d_lattice[ch][corner] = {cs.offset[corner] + ch * plane,
                                       upstream[ch] * cs.weight[corner]};
        }
    }

    // d out / d o_u: corners at l+1 minus corners at l, each weighted by the
    // xyz part of the weight only.
    if (c >= 0.0 && c <= 1.0) {
        const double wx[2] = {1.0 - cell.x.offset, cell.x.offset};
        const double wy[2] = {1.0 - cell.y.offset, cell.y.offset};
        const double wz[2] = {1.0 - cell.z.offset, cell.z.offset};
        double du = 0.0;
        for (std::size_t corner = 0; corner < 8; ++corner) {
            const double wxyz = wx[corner & 1u] * wy[(corner >> 1) & 1u] * wz[(corner >> 2) & 1u];
            const std::size_t lo = cs.offset[corner], hi = cs.offset[corner + 8];
            for (std::size_t ch = 0; ch < 3; ++ch) {
                du += upstream[ch] * wxyz * (v[hi + ch * plane] - v[lo + ch * plane]);
            }
        }
        g.d_u = du * static_cast<double>(l4.n_ctx() - 1);
    }
    return g;
}

namespace {

void require_same_shape(const Image& image, const ContextMap& context) {
    if (!context.same_shape(image.height(), image.width())) {
        throw ShapeError("context map " + std::to_string(context.height()) + "x" +
                         std::to_string(context.width()) + " does not match image " +
                         std::to_string(image.height()) + "x" + std::to_string(image.width()));
    }
}

}  // namespace

Image apply_lut4(const Lattice4D& l4, const Image& image, const ContextMap& context) {
    require_same_shape(image, context);
    Image out(image.height(), image.width());
    const std::size_t n = image.pixels();
    auto r = image.plane(0), g = image.plane(1), b = image.plane(2);
    auto c = context.plane(0);
    auto o0 = out.plane(0), o1 = out.plane(1), o2 = out.plane(2);
    for (std::size_t p = 0; p < n; ++p) {
        const Rgb px = quadrilinear(l4, {r[p], g[p], b[p]}, c[p]);
        o0[p] = px[0];
        o1[p] = px[1];
        o2[p] = px[2];
    }
    return out;
}

ApplyGrad apply_lut4_backward(const Lattice4D& l4, const Image& image,
                              const ContextMap& context, const Image& upstream) {
    require_same_shape(image, context);
    if (!upstream.same_shape(image.height(), image.width())) {
        throw ShapeError("upstream gradient does not match image");
    }
    ApplyGrad grad{std::vector<double>(l4.size(), 0.0),
                   ContextMap(image.height(), image.width())};
    const std::size_t n = image.pixels();
    auto r = image.plane(0), g = image.plane(1), b = image.plane(2);
    auto c = context.plane(0);
    auto u0 = upstream.plane(0), u1 = upstream.plane(1), u2 = upstream.plane(2);
    auto dc = grad.d_context.plane(0);
    for (std::size_t p = 0; p < n; ++p) {
        const InterpGrad ig = quadrilinear_backward(l4, {r[p], g[p], b[p]}, c[p], {u0[p], u1[p], u2[p]});
        ig.accumulate_into(grad.d_lattice);
        dc[p] = ig.d_u;
    }
    return grad;
}

Image apply_lut3(const Lattice3D& l3, const Image& image) {
    Image out(image.height(), image.width());
    const std::size_t n = image.pixels();
    for (std::size_t p = 0; p < n; ++p) {
        const Rgb px = trilinear(l3, {image.plane(0)[p], image.plane(1)[p], image.plane(2)[p]});
        for (std::size_t ch = 0; ch < 3; ++ch) out.plane(ch)[p] = px[ch];
    }
    return out;
}

}  // namespace lut4d

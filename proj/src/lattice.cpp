#include "lut4d/lattice.hpp"

#include <cmath>
#include <string>

#include "lut4d/errors.hpp"

namespace lut4d {

namespace {

void require_axis(std::size_t n, const char* name) {
    if (n < 2) {
        throw InvalidArgument(std::string(name) + " must be >= 2, got " + std::to_string(n));
    }
}

}  // namespace

std::size_t lattice3_size(std::size_t n_bin) noexcept { return 3 * n_bin * n_bin * n_bin; }

std::size_t lattice4_size(std::size_t n_bin, std::size_t n_ctx) noexcept {
    return lattice3_size(n_bin) * n_ctx;
}

bool all_finite(std::span<const double> values) noexcept {
    for (double v : values) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Lattice3D

Lattice3D::Lattice3D(std::size_t n_bin) : n_bin_(n_bin) {
    require_axis(n_bin, "n_bin");
    values_.assign(lattice3_size(n_bin), 0.0);
}

Lattice3D::Lattice3D(std::size_t n_bin, std::vector<double> values)
    : n_bin_(n_bin), values_(std::move(values)) {
    require_axis(n_bin, "n_bin");
    if (values_.size() != lattice3_size(n_bin)) {
        throw InvalidArgument("Lattice3D buffer length " + std::to_string(values_.size()) +
                              " != " + std::to_string(lattice3_size(n_bin)));
    }
    if (!all_finite(values_)) throw InvalidArgument("Lattice3D contains non-finite values");
}

void Lattice3D::check(const GridIndex3& idx, std::size_t ch) const {
    if (ch >= 3 || idx.i >= n_bin_ || idx.j >= n_bin_ || idx.k >= n_bin_) {
        throw IndexError("Lattice3D index out of range");
    }
}

double Lattice3D::get(const GridIndex3& idx, std::size_t ch) const {
    check(idx, ch);
    return values_[offset(ch, idx.i, idx.j, idx.k)];
}

void Lattice3D::set(const GridIndex3& idx, std::size_t ch, double v) {
    check(idx, ch);
    values_[offset(ch, idx.i, idx.j, idx.k)] = v;
}

Rgb Lattice3D::rgb(const GridIndex3& idx) const {
    return {get(idx, kRed), get(idx, kGreen), get(idx, kBlue)};
}

// ---------------------------------------------------------------------------
// Lattice4D

Lattice4D::Lattice4D(std::size_t n_bin, std::size_t n_ctx) : n_bin_(n_bin), n_ctx_(n_ctx) {
    require_axis(n_bin, "n_bin");
    require_axis(n_ctx, "n_ctx");
    values_.assign(lattice4_size(n_bin, n_ctx), 0.0);
}

Lattice4D::Lattice4D(std::size_t n_bin, std::size_t n_ctx, std::vector<double> values)
    : n_bin_(n_bin), n_ctx_(n_ctx), values_(std::move(values)) {
    require_axis(n_bin, "n_bin");
    require_axis(n_ctx, "n_ctx");
    if (values_.size() != lattice4_size(n_bin, n_ctx)) {
        throw InvalidArgument("Lattice4D buffer length " + std::to_string(values_.size()) +
                              " != " + std::to_string(lattice4_size(n_bin, n_ctx)));
    }
    if (!all_finite(values_)) throw InvalidArgument("Lattice4D contains non-finite values");
}

void Lattice4D::check(const GridIndex4& idx, std::size_t ch) const {
    if (ch >= 3 || idx.i >= n_bin_ || idx.j >= n_bin_ || idx.k >= n_bin_ || idx.l >= n_ctx_) {
        throw IndexError("Lattice4D index (" + std::to_string(idx.i) + "," +
                         std::to_string(idx.j) + "," + std::to_string(idx.k) + "," +
                         std::to_string(idx.l) + ") ch " + std::to_string(ch) +
                         " out of range");
    }
}

double Lattice4D::get(const GridIndex4& idx, std::size_t ch) const {
    check(idx, ch);
    return values_[offset(ch, idx)];
}

void Lattice4D::set(const GridIndex4& idx, std::size_t ch, double v) {
    check(idx, ch);
    values_[offset(ch, idx)] = v;
}

Rgb Lattice4D::rgb(const GridIndex4& idx) const {
    return {get(idx, kRed), get(idx, kGreen), get(idx, kBlue)};
}

// ---------------------------------------------------------------------------
// Constructions

Lattice3D identity_lattice3(std::size_t n_bin) {
    Lattice3D out(n_bin);
    const double step = 1.0 / static_cast<double>(n_bin - 1);
    auto v = out.values();
    for (std::size_t k = 0; k < n_bin; ++k)
        for (std::size_t j = 0; j < n_bin; ++j)
            for (std::size_t i = 0; i < n_bin; ++i) {
                v[out.offset(kRed, i, j, k)] = static_cast<double>(i) * step;
                v[out.offset(kGreen, i, j, k)] = static_cast<double>(j) * step;
                v[out.offset(kBlue, i, j, k)] = static_cast<double>(k) * step;
            }
    return out;
}

Lattice4D identity_lattice4(std::size_t n_bin, std::size_t n_ctx) {
    require_axis(n_bin, "n_bin");
    require_axis(n_ctx, "n_ctx");
    return replicate_3d_to_4d(identity_lattice3(n_bin), n_ctx);
}

Lattice4D constant_lattice4(std::size_t n_bin, std::size_t n_ctx, const Rgb& value) {
    Lattice4D out(n_bin, n_ctx);
    for (std::size_t ch = 0; ch < 3; ++ch) {
        for (double& v : out.channel(ch)) v = value[ch];
    }
    return out;
}

Lattice4D replicate_3d_to_4d(const Lattice3D& l3, std::size_t n_ctx) {
    Lattice4D out(l3.n_bin(), n_ctx);
    const std::size_t plane3 = l3.plane_size();
    auto src = l3.values();
    for (std::size_t ch = 0; ch < 3; ++ch) {
        auto dst = out.channel(ch);
        for (std::size_t l = 0; l < n_ctx; ++l) {
            for (std::size_t e = 0; e < plane3; ++e) dst[l * plane3 + e] = src[ch * plane3 + e];
        }
    }
    return out;
}

Lattice3D context_slice(const Lattice4D& l4, std::size_t l) {
    if (l >= l4.n_ctx()) throw IndexError("context slice " + std::to_string(l) + " out of range");
    const std::size_t plane3 = l4.n_bin() * l4.n_bin() * l4.n_bin();
    std::vector<double> vals(3 * plane3);
    for (std::size_t ch = 0; ch < 3; ++ch) {
        auto src = l4.channel(ch);
        for (std::size_t e = 0; e < plane3; ++e) vals[ch * plane3 + e] = src[l * plane3 + e];
    }
    return Lattice3D(l4.n_bin(), std::move(vals));
}

}  // namespace lut4d

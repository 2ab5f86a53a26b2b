#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace lut4d {

using Rgb = std::array<double, 3>;

enum Channel : std::size_t { kRed = 0, kGreen = 1, kBlue = 2 };

struct GridIndex3 {
    std::size_t i = 0, j = 0, k = 0;
};

struct GridIndex4 {
    std::size_t i = 0, j = 0, k = 0, l = 0;
};

// 3D LUT over the RGB cube. Storage is channel-major, then k, j, i with the
// red index i fastest:  offset = ((ch * n + k) * n + j) * n + i.
class Lattice3D {
public:
    explicit Lattice3D(std::size_t n_bin);
    Lattice3D(std::size_t n_bin, std::vector<double> values);

    std::size_t n_bin() const noexcept { return n_bin_; }
    std::size_t plane_size() const noexcept { return n_bin_ * n_bin_ * n_bin_; }
    std::size_t size() const noexcept { return values_.size(); }

    std::size_t offset(std::size_t ch, std::size_t i, std::size_t j, std::size_t k) const noexcept {
        return ((ch * n_bin_ + k) * n_bin_ + j) * n_bin_ + i;
    }

    double get(const GridIndex3& idx, std::size_t ch) const;
    void set(const GridIndex3& idx, std::size_t ch, double v);
    Rgb rgb(const GridIndex3& idx) const;

    std::span<double> values() noexcept { return values_; }
    std::span<const double> values() const noexcept { return values_; }

    friend bool operator==(const Lattice3D&, const Lattice3D&) = default;

private:
    void check(const GridIndex3& idx, std::size_t ch) const;

    std::size_t n_bin_;
    std::vector<double> values_;
};

// 4D LUT over RGB x context. Storage is channel-major, then l, k, j, i with
// i fastest and the context index l slowest:
//   offset = (((ch * n_ctx + l) * n_bin + k) * n_bin + j) * n_bin + i.
// This order is shared by the cube4 file format and the interpolator.
class Lattice4D {
public:
    Lattice4D(std::size_t n_bin, std::size_t n_ctx);
    Lattice4D(std::size_t n_bin, std::size_t n_ctx, std::vector<double> values);

    std::size_t n_bin() const noexcept { return n_bin_; }
    std::size_t n_ctx() const noexcept { return n_ctx_; }
    // Entries per channel: n_bin^3 * n_ctx.
    std::size_t plane_size() const noexcept { return n_bin_ * n_bin_ * n_bin_ * n_ctx_; }
    std::size_t size() const noexcept { return values_.size(); }

    std::size_t offset(std::size_t ch, std::size_t i, std::size_t j, std::size_t k,
                       std::size_t l) const noexcept {
        return (((ch * n_ctx_ + l) * n_bin_ + k) * n_bin_ + j) * n_bin_ + i;
    }
    std::size_t offset(std::size_t ch, const GridIndex4& g) const noexcept {
        return offset(ch, g.i, g.j, g.k, g.l);
    }

    // Bounds-checked access; throws IndexError.
    double get(const GridIndex4& idx, std::size_t ch) const;
    void set(const GridIndex4& idx, std::size_t ch, double v);
    Rgb rgb(const GridIndex4& idx) const;

    std::span<double> values() noexcept { return values_; }
    std::span<const double> values() const noexcept { return values_; }
    std::span<double> channel(std::size_t ch) noexcept {
        return std::span<double>(values_).subspan(ch * plane_size(), plane_size());
    }
    std::span<const double> channel(std::size_t ch) const noexcept {
        return std::span<const double>(values_).subspan(ch * plane_size(), plane_size());
    }

    bool same_shape(const Lattice4D& o) const noexcept {
        return n_bin_ == o.n_bin_ && n_ctx_ == o.n_ctx_;
    }

    friend bool operator==(const Lattice4D&, const Lattice4D&) = default;

private:
    void check(const GridIndex4& idx, std::size_t ch) const;

    std::size_t n_bin_;
    std::size_t n_ctx_;
    std::vector<double> values_;
};

std::size_t lattice3_size(std::size_t n_bin) noexcept;
std::size_t lattice4_size(std::size_t n_bin, std::size_t n_ctx) noexcept;

bool all_finite(std::span<const double> values) noexcept;

Lattice3D identity_lattice3(std::size_t n_bin);
Lattice4D identity_lattice4(std::size_t n_bin, std::size_t n_ctx);
Lattice4D constant_lattice4(std::size_t n_bin, std::size_t n_ctx, const Rgb& value);
Lattice4D replicate_3d_to_4d(const Lattice3D& l3, std::size_t n_ctx);

// The 3D lattice at context index l.
Lattice3D context_slice(const Lattice4D& l4, std::size_t l);

}  // namespace lut4d

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace lut4d {

// Planar raster: `channels` planes of height*width samples, row-major within
// a plane. Samples are nominally in [0,1].
template <std::size_t Channels>
class Raster {
public:
    static constexpr std::size_t kChannels = Channels;

    Raster() = default;
    Raster(std::size_t height, std::size_t width, double fill = 0.0)
        : height_(height), width_(width), data_(Channels * height * width, fill) {}

    std::size_t height() const noexcept { return height_; }
    std::size_t width() const noexcept { return width_; }
    std::size_t pixels() const noexcept { return height_ * width_; }
    bool empty() const noexcept { return data_.empty(); }

    double& at(std::size_t c, std::size_t y, std::size_t x) {
        return data_[(c * height_ + y) * width_ + x];
    }
    double at(std::size_t c, std::size_t y, std::size_t x) const {
        return data_[(c * height_ + y) * width_ + x];
    }

    std::span<double> plane(std::size_t c) {
        return {data_.data() + c * pixels(), pixels()};
    }
    std::span<const double> plane(std::size_t c) const {
        return {data_.data() + c * pixels(), pixels()};
    }

    std::vector<double>& data() noexcept { return data_; }
    const std::vector<double>& data() const noexcept { return data_; }

    bool same_shape(std::size_t h, std::size_t w) const noexcept {
        return height_ == h && width_ == w;
    }

    friend bool operator==(const Raster&, const Raster&) = default;

private:
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::vector<double> data_;
};

using Image = Raster<3>;
using ContextMap = Raster<1>;

// Clamp every sample into [0,1].
template <std::size_t C>
void clamp_unit(Raster<C>& r) {
    for (double& v : r.data()) v = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
}

// Round-trip through 8-bit quantization (v -> round(255 v) / 255, clamped).
Image quantize_8bit(const Image& img);

}  // namespace lut4d

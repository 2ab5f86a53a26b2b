#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "lut4d/fusion.hpp"
#include "lut4d/image.hpp"

namespace lut4d::nn {

// Feature map, channel-major and row-major within a channel.
struct Tensor3 {
    std::size_t channels = 0, height = 0, width = 0;
    std::vector<double> data;

    Tensor3() = default;
    Tensor3(std::size_t c, std::size_t h, std::size_t w, double fill = 0.0)
        : channels(c), height(h), width(w), data(c * h * w, fill) {}

    std::size_t plane() const noexcept { return height * width; }
    double& at(std::size_t c, std::size_t y, std::size_t x) {
        return data[(c * height + y) * width + x];
    }
    double at(std::size_t c, std::size_t y, std::size_t x) const {
        return data[(c * height + y) * width + x];
    }
};

Tensor3 to_tensor(const Image& img);
Tensor3 to_tensor(const ContextMap& map);
ContextMap to_context_map(const Tensor3& t);

// Learnable buffer with its gradient and Adam moments.
struct ParamTensor {
    std::string name;
    std::vector<std::size_t> shape;
    std::vector<double> value, grad, m, v;

    ParamTensor() = default;
    ParamTensor(std::string n, std::vector<std::size_t> s);

    std::size_t size() const noexcept { return value.size(); }
    void zero_grad();
};

using ParamRefs = std::vector<ParamTensor*>;

// Uniform fan-in initialization: U(-sqrt(3/fan_in) * gain, +...).
void init_uniform_fan_in(ParamTensor& p, std::size_t fan_in, double gain, std::mt19937_64& rng);

// 2D cross-correlation with zero padding. Weight layout [out][in][k][k].
class Conv2d {
public:
    Conv2d() = default;
    Conv2d(std::string name, std::size_t in_ch, std::size_t out_ch, std::size_t kernel,
           std::size_t stride, std::size_t padding);

    std::size_t in_channels() const noexcept { return in_ch_; }
    std::size_t out_channels() const noexcept { return out_ch_; }
    std::size_t output_size(std::size_t input) const noexcept {
        return (input + 2 * pad_ - k_) / stride_ + 1;
    }

    Tensor3 forward(const Tensor3& x);
    // Accumulates parameter gradients; returns dL/dx (empty when not wanted).
    Tensor3 backward(const Tensor3& grad_out, bool want_input_grad = true);

    void init(std::mt19937_64& rng, double gain = 1.0);
    void collect(ParamRefs& out) { out.push_back(&weight); out.push_back(&bias); }

    ParamTensor weight, bias;

private:
    std::size_t in_ch_ = 0, out_ch_ = 0, k_ = 1, stride_ = 1, pad_ = 0;
    Tensor3 input_;
};

// slope 0 gives a plain ReLU.
class LeakyRelu {
public:
    explicit LeakyRelu(double slope = 0.2) : slope_(slope) {}
    Tensor3 forward(const Tensor3& x);
    Tensor3 backward(const Tensor3& grad_out) const;

private:
    double slope_;
    Tensor3 input_;
};

class Sigmoid {
public:
    Tensor3 forward(const Tensor3& x);
    Tensor3 backward(const Tensor3& grad_out) const;

private:
    Tensor3 output_;
};

// conv -> leaky-ReLU(0.2) -> conv, plus a skip connection (identity, or a 1x1
// projection when the channel count changes). Stride 1, "same" padding.
class ResidualBlock {
public:
    ResidualBlock() = default;
    ResidualBlock(const std::string& name, std::size_t in_ch, std::size_t out_ch,
                  std::size_t kernel);

    Tensor3 forward(const Tensor3& x);
    Tensor3 backward(const Tensor3& grad_out, bool want_input_grad = true);
    void init(std::mt19937_64& rng);
    void collect(ParamRefs& out);

private:
    Conv2d conv1_, conv2_;
    LeakyRelu act_{0.2};
    std::optional<Conv2d> proj_;
};

class GlobalAvgPool {
public:
    std::vector<double> forward(const Tensor3& x);
    Tensor3 backward(std::span<const double> grad_out) const;

private:
    std::size_t c_ = 0, h_ = 0, w_ = 0;
};

// y = W x + b, weight layout [out][in].
class Linear {
public:
    Linear() = default;
    Linear(std::string name, std::size_t in, std::size_t out);

    std::vector<double> forward(std::span<const double> x);
    std::vector<double> backward(std::span<const double> grad_out);
    void init(std::mt19937_64& rng, double gain = 1.0);
    void collect(ParamRefs& out) { out.push_back(&weight); out.push_back(&bias); }

    ParamTensor weight, bias;

private:
    std::size_t in_ = 0, out_ = 0;
    std::vector<double> input_;
};

// Bilinear resampling with half-pixel centers and edge clamping.
Tensor3 bilinear_resize(const Tensor3& x, std::size_t height, std::size_t width);
Image bilinear_resize(const Image& img, std::size_t height, std::size_t width);

// Per-pixel context: four 3x3 residual blocks of `width` channels, one 1x1
// residual block down to a single channel, then a sigmoid.
class ContextEncoder {
public:
    ContextEncoder() = default;
    explicit ContextEncoder(std::size_t width);

    std::size_t width() const noexcept { return width_; }
    ContextMap forward(const Image& image);
    // dL/dC from the interpolator; accumulates into parameter gradients.
    void backward(const ContextMap& grad_context);
    void init(std::mt19937_64& rng);
    void collect(ParamRefs& out);

private:
    std::size_t width_ = 0;
    std::vector<ResidualBlock> blocks_;
    Sigmoid squash_;
};

// Image-level fusion coefficients: stride-2 3x3 conv + leaky-ReLU blocks,
// global average pooling, then an affine layer emitting 3N^2 + N scalars.
// The input is resized to resolution x resolution first.
class ParameterEncoder {
public:
    ParameterEncoder() = default;
    ParameterEncoder(std::vector<std::size_t> widths, std::size_t n_lut, std::size_t resolution);

    std::size_t n_lut() const noexcept { return n_lut_; }
    std::size_t resolution() const noexcept { return resolution_; }
    const std::vector<std::size_t>& widths() const noexcept { return widths_; }

    FusionCoefficients forward(const Image& image);
    void backward(const FusionCoefficients& grad_coef);
    // Random conv weights; zero output weights with an identity-selecting bias.
    void init(std::mt19937_64& rng);
    void collect(ParamRefs& out);

private:
    std::vector<std::size_t> widths_;
    std::size_t n_lut_ = 0, resolution_ = 0;
    std::vector<Conv2d> convs_;
    std::vector<LeakyRelu> acts_;
    GlobalAvgPool pool_;
    Linear head_;
};

}  // namespace lut4d::nn

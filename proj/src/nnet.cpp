#include "lut4d/nnet.hpp"

#include <algorithm>
#include <cmath>

#include "lut4d/errors.hpp"

namespace lut4d::nn {

Tensor3 to_tensor(const Image& img) {
    Tensor3 t(3, img.height(), img.width());
    t.data = img.data();
    return t;
}

Tensor3 to_tensor(const ContextMap& map) {
    Tensor3 t(1, map.height(), map.width());
    t.data = map.data();
    return t;
}

ContextMap to_context_map(const Tensor3& t) {
    if (t.channels != 1) throw ShapeError("context map tensor must have one channel");
    ContextMap m(t.height, t.width);
    m.data() = t.data;
    return m;
}

// ---------------------------------------------------------------------------

ParamTensor::ParamTensor(std::string n, std::vector<std::size_t> s)
    : name(std::move(n)), shape(std::move(s)) {
    std::size_t count = 1;
    for (std::size_t d : shape) count *= d;
    value.assign(count, 0.0);
    grad.assign(count, 0.0);
    m.assign(count, 0.0);
    v.assign(count, 0.0);
}

void ParamTensor::zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }

void init_uniform_fan_in(ParamTensor& p, std::size_t fan_in, double gain, std::mt19937_64& rng) {
    const double bound = gain * std::sqrt(3.0 / static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (double& x : p.value) x = dist(rng);
}

// ---------------------------------------------------------------------------
// Conv2d

Conv2d::Conv2d(std::string name, std::size_t in_ch, std::size_t out_ch, std::size_t kernel,
               std::size_t stride, std::size_t padding)
    : weight(name + ".weight", {out_ch, in_ch, kernel, kernel}),
      bias(name + ".bias", {out_ch}),
      in_ch_(in_ch),
      out_ch_(out_ch),
      k_(kernel),
      stride_(stride),
      pad_(padding) {
    if (in_ch == 0 || out_ch == 0 || kernel == 0 || stride == 0) {
        throw InvalidArgument("conv2d " + name + ": zero-sized configuration");
    }
}

void Conv2d::init(std::mt19937_64& rng, double gain) {
    init_uniform_fan_in(weight, in_ch_ * k_ * k_, gain, rng);
    std::fill(bias.value.begin(), bias.value.end(), 0.0);
}

namespace {

// Output columns ox whose input column ox*s + kx - p lies in [0, in_w).
struct ColRange {
    std::size_t lo, hi;  // half-open
};

ColRange valid_cols(std::size_t kx, std::size_t pad, std::size_t stride, std::size_t in_w,
                    std::size_t out_w) {
    // need ox*s >= pad - kx and ox*s <= in_w - 1 + pad - kx
    const std::ptrdiff_t lo_num = static_cast<std::ptrdiff_t>(pad) - static_cast<std::ptrdiff_t>(kx);
    std::size_t lo = lo_num <= 0 ? 0 : static_cast<std::size_t>((lo_num + static_cast<std::ptrdiff_t>(stride) - 1) /
                                                               static_cast<std::ptrdiff_t>(stride));
    const std::ptrdiff_t hi_num =
        static_cast<std::ptrdiff_t>(in_w) - 1 + static_cast<std::ptrdiff_t>(pad) - static_cast<std::ptrdiff_t>(kx);
    if (hi_num < 0) return {0, 0};
    std::size_t hi = static_cast<std::size_t>(hi_num) / stride + 1;
    hi = std::min(hi, out_w);
    lo = std::min(lo, hi);
    return {lo, hi};
}

}  // namespace

Tensor3 Conv2d::forward(const Tensor3& x) {
    if (x.channels != in_ch_) {
        throw ShapeError(weight.name + ": expected " + std::to_string(in_ch_) + " channels, got " +
                         std::to_string(x.channels));
    }
    if (x.height + 2 * pad_ < k_ || x.width + 2 * pad_ < k_) {
        throw ShapeError(weight.name + ": input smaller than kernel");
    }
    input_ = x;
    const std::size_t oh = output_size(x.height), ow = output_size(x.width);
    Tensor3 out(out_ch_, oh, ow);
    for (std::size_t oc = 0; oc < out_ch_; ++oc) {
        double* dst = out.data.data() + oc * oh * ow;
        std::fill(dst, dst + oh * ow, bias.value[oc]);
        for (std::size_t ic = 0; ic < in_ch_; ++ic) {
            const double* src = x.data.data() + ic * x.plane();
            for (std::size_t ky = 0; ky < k_; ++ky) {
                for (std::size_t kx = 0; kx < k_; ++kx) {
                    const double w = weight.value[((oc * in_ch_ + ic) * k_ + ky) * k_ + kx];
                    const ColRange cols = valid_cols(kx, pad_, stride_, x.width, ow);
                    const std::ptrdiff_t shift =
                        static_cast<std::ptrdiff_t>(kx) - static_cast<std::ptrdiff_t>(pad_);
                    for (std::size_t oy = 0; oy < oh; ++oy) {
                        const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * stride_ + ky) -
                                                  static_cast<std::ptrdiff_t>(pad_);
                        if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(x.height)) continue;
                        const double* row = src + static_cast<std::size_t>(iy) * x.width;
                        double* orow = dst + oy * ow;
                        if (stride_ == 1) {
                            for (std::size_t ox = cols.lo; ox < cols.hi; ++ox)
                                orow[ox] += w * row[static_cast<std::ptrdiff_t>(ox) + shift];
                        } else {
                            for (std::size_t ox = cols.lo; ox < cols.hi; ++ox)
                                orow[ox] += w * row[static_cast<std::ptrdiff_t>(ox * stride_) + shift];
                        }
                    }
                }
            }
        }
    }
    return out;
}

Tensor3 Conv2d::backward(const Tensor3& grad_out, bool want_input_grad) {
    const Tensor3& x = input_;
    const std::size_t oh = output_size(x.height), ow = output_size(x.width);
    if (grad_out.channels != out_ch_ || grad_out.height != oh || grad_out.width != ow) {
        throw ShapeError(weight.name + ": gradient shape mismatch");
    }
    Tensor3 grad_in;
    if (want_input_grad) grad_in = Tensor3(in_ch_, x.height, x.width);
    for (std::size_t oc = 0; oc < out_ch_; ++oc) {
        const double* go = grad_out.data.data() + oc * oh * ow;
        double db = 0.0;
        for (std::size_t p = 0; p < oh * ow; ++p) db += go[p];
        bias.grad[oc] += db;
        for (std::size_t ic = 0; ic < in_ch_; ++ic) {
            const double* src = x.data.data() + ic * x.plane();
            double* gsrc = want_input_grad ? grad_in.data.data() + ic * x.plane() : nullptr;
            for (std::size_t ky = 0; ky < k_; ++ky) {
                for (std::size_t kx = 0; kx < k_; ++kx) {
                    const std::size_t wi = ((oc * in_ch_ + ic) * k_ + ky) * k_ + kx;
                    const double w = weight.value[wi];
                    const ColRange cols = valid_cols(kx, pad_, stride_, x.width, ow);
                    const std::ptrdiff_t shift =
                        static_cast<std::ptrdiff_t>(kx) - static_cast<std::ptrdiff_t>(pad_);
                    double dw = 0.0;
                    for (std::size_t oy = 0; oy < oh; ++oy) {
                        const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * stride_ + ky) -
                                                  static_cast<std::ptrdiff_t>(pad_);
                        if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(x.height)) continue;
                        const std::size_t row_off = static_cast<std::size_t>(iy) * x.width;
                        const double* row = src + row_off;
                        const double* grow = go + oy * ow;
                        double* grow_in = gsrc ? gsrc + row_off : nullptr;
                        for (std::size_t ox = cols.lo; ox < cols.hi; ++ox) {
                            const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * stride_) + shift;
                            dw += grow[ox] * row[ix];
                            if (grow_in) grow_in[ix] += w * grow[ox];
                        }
                    }
                    weight.grad[wi] += dw;
                }
            }
        }
    }
    return grad_in;
}

// ---------------------------------------------------------------------------
// Activations

Tensor3 LeakyRelu::forward(const Tensor3& x) {
    input_ = x;
    Tensor3 out = x;
    for (double& v : out.data) v = v > 0.0 ? v : slope_ * v;
    return out;
}

Tensor3 LeakyRelu::backward(const Tensor3& grad_out) const {
    Tensor3 g = grad_out;
    for (std::size_t i = 0; i < g.data.size(); ++i) {
        if (!(input_.data[i] > 0.0)) g.data[i] *= slope_;
    }
    return g;
}

Tensor3 Sigmoid::forward(const Tensor3& x) {
    Tensor3 out = x;
    for (double& v : out.data) v = 1.0 / (1.0 + std::exp(-v));
    output_ = out;
    return out;
}

Tensor3 Sigmoid::backward(const Tensor3& grad_out) const {
    Tensor3 g = grad_out;
    for (std::size_t i = 0; i < g.data.size(); ++i) {
        const double s = output_.data[i];
        g.data[i] *= s * (1.0 - s);
    }
    return g;
}

// ---------------------------------------------------------------------------
// ResidualBlock

ResidualBlock::ResidualBlock(const std::string& name, std::size_t in_ch, std::size_t out_ch,
                             std::size_t kernel)
    : conv1_(name + ".conv1", in_ch, out_ch, kernel, 1, kernel / 2),
      conv2_(name + ".conv2", out_ch, out_ch, kernel, 1, kernel / 2) {
    if (kernel % 2 == 0) throw InvalidArgument("residual block kernel must be odd");
    if (in_ch != out_ch) proj_.emplace(name + ".proj", in_ch, out_ch, 1, 1, 0);
}

Tensor3 ResidualBlock::forward(const Tensor3& x) {
    Tensor3 y = conv2_.forward(act_.forward(conv1_.forward(x)));
    if (proj_) {
        const Tensor3 s = proj_->forward(x);
        for (std::size_t i = 0; i < y.data.size(); ++i) y.data[i] += s.data[i];
    } else {
        for (std::size_t i = 0; i < y.data.size(); ++i) y.data[i] += x.data[i];
    }
    return y;
}

Tensor3 ResidualBlock::backward(const Tensor3& grad_out, bool want_input_grad) {
    Tensor3 g = conv1_.backward(act_.backward(conv2_.backward(grad_out)), want_input_grad);
    if (proj_) {
        Tensor3 gs = proj_->backward(grad_out, want_input_grad);
        if (want_input_grad)
            for (std::size_t i = 0; i < g.data.size(); ++i) g.data[i] += gs.data[i];
    } else if (want_input_grad) {
        for (std::size_t i = 0; i < g.data.size(); ++i) g.data[i] += grad_out.data[i];
    }
    return g;
}

void ResidualBlock::init(std::mt19937_64& rng) {
    conv1_.init(rng, std::sqrt(2.0));
    conv2_.init(rng, 1.0);
    if (proj_) proj_->init(rng);
}

void ResidualBlock::collect(ParamRefs& out) {
    conv1_.collect(out);
    conv2_.collect(out);
    if (proj_) proj_->collect(out);
}

// ---------------------------------------------------------------------------
// Pooling / affine

std::vector<double> GlobalAvgPool::forward(const Tensor3& x) {
    c_ = x.channels;
    h_ = x.height;
    w_ = x.width;
    std::vector<double> out(c_, 0.0);
    const double inv = 1.0 / static_cast<double>(x.plane());
    for (std::size_t c = 0; c < c_; ++c) {
        double s = 0.0;
        for (std::size_t p = 0; p < x.plane(); ++p) s += x.data[c * x.plane() + p];
        out[c] = s * inv;
    }
    return out;
}

Tensor3 GlobalAvgPool::backward(std::span<const double> grad_out) const {
    Tensor3 g(c_, h_, w_);
    const double inv = 1.0 / static_cast<double>(h_ * w_);
    for (std::size_t c = 0; c < c_; ++c) {
        for (std::size_t p = 0; p < h_ * w_; ++p) g.data[c * h_ * w_ + p] = grad_out[c] * inv;
    }
    return g;
}

Linear::Linear(std::string name, std::size_t in, std::size_t out)
    : weight(name + ".weight", {out, in}), bias(name + ".bias", {out}), in_(in), out_(out) {}

void Linear::init(std::mt19937_64& rng, double gain) {
    init_uniform_fan_in(weight, in_, gain, rng);
    std::fill(bias.value.begin(), bias.value.end(), 0.0);
}

std::vector<double> Linear::forward(std::span<const double> x) {
    if (x.size() != in_) throw ShapeError(weight.name + ": input length mismatch");
    input_.assign(x.begin(), x.end());
    std::vector<double> y(bias.value);
    for (std::size_t o = 0; o < out_; ++o) {
        double s = 0.0;
        for (std::size_t i = 0; i < in_; ++i) s += weight.value[o * in_ + i] * x[i];
        y[o] += s;
    }
    return y;
}

std::vector<double> Linear::backward(std::span<const double> grad_out) {
    if (grad_out.size() != out_) throw ShapeError(weight.name + ": gradient length mismatch");
    std::vector<double> gx(in_, 0.0);
    for (std::size_t o = 0; o < out_; ++o) {
        bias.grad[o] += grad_out[o];
        for (std::size_t i = 0; i < in_; ++i) {
            weight.grad[o * in_ + i] += grad_out[o] * input_[i];
            gx[i] += grad_out[o] * weight.value[o * in_ + i];
        }
    }
    return gx;
}

// ---------------------------------------------------------------------------
// Resize

namespace {

struct Tap {
    std::size_t i0, i1;
    double w1;
};

std::vector<Tap> resize_taps(std::size_t in, std::size_t out) {
    std::vector<Tap> taps(out);
    const double scale = static_cast<double>(in) / static_cast<double>(out);
    for (std::size_t o = 0; o < out; ++o) {
        double src = (static_cast<double>(o) + 0.5) * scale - 0.5;
        src = std::clamp(src, 0.0, static_cast<double>(in - 1));
        const auto i0 = static_cast<std::size_t>(std::floor(src));
        const std::size_t i1 = std::min(i0 + 1, in - 1);
        taps[o] = {i0, i1, src - static_cast<double>(i0)};
    }
    return taps;
}

}  // namespace

Tensor3 bilinear_resize(const Tensor3& x, std::size_t height, std::size_t width) {
    if (height == 0 || width == 0 || x.height == 0 || x.width == 0) {
        throw InvalidArgument("bilinear_resize: empty size");
    }
    if (height == x.height && width == x.width) return x;
    const auto ty = resize_taps(x.height, height);
    const auto tx = resize_taps(x.width, width);
    Tensor3 out(x.channels, height, width);
    for (std::size_t c = 0; c < x.channels; ++c) {
        for (std::size_t y = 0; y < height; ++y) {
            const Tap& a = ty[y];
            for (std::size_t xo = 0; xo < width; ++xo) {
                const Tap& b = tx[xo];
                const double v00 = x.at(c, a.i0, b.i0), v01 = x.at(c, a.i0, b.i1);
                const double v10 = x.at(c, a.i1, b.i0), v11 = x.at(c, a.i1, b.i1);
                const double top = v00 + b.w1 * (v01 - v00);
                const double bot = v10 + b.w1 * (v11 - v10);
                out.at(c, y, xo) = top + a.w1 * (bot - top);
            }
        }
    }
    return out;
}

Image bilinear_resize(const Image& img, std::size_t height, std::size_t width) {
    const Tensor3 t = bilinear_resize(to_tensor(img), height, width);
    Image out(height, width);
    out.data() = t.data;
    return out;
}

// ---------------------------------------------------------------------------
// ContextEncoder

ContextEncoder::ContextEncoder(std::size_t width) : width_(width) {
    if (width == 0) throw InvalidArgument("context encoder width must be positive");
    blocks_.emplace_back("ctx.block0", 3, width, 3);
    for (std::size_t b = 1; b < 4; ++b) {
        blocks_.emplace_back("ctx.block" + std::to_string(b), width, width, 3);
    }
    blocks_.emplace_back("ctx.block4", width, 1, 1);
}

ContextMap ContextEncoder::forward(const Image& image) {
    Tensor3 t = to_tensor(image);
    for (auto& b : blocks_) t = b.forward(t);
    return to_context_map(squash_.forward(t));
}

void ContextEncoder::backward(const ContextMap& grad_context) {
    Tensor3 g = squash_.backward(to_tensor(grad_context));
    for (std::size_t b = blocks_.size(); b-- > 0;) g = blocks_[b].backward(g, b != 0);
}

void ContextEncoder::init(std::mt19937_64& rng) {
    for (auto& b : blocks_) b.init(rng);
}

void ContextEncoder::collect(ParamRefs& out) {
    for (auto& b : blocks_) b.collect(out);
}

// ---------------------------------------------------------------------------
// ParameterEncoder

ParameterEncoder::ParameterEncoder(std::vector<std::size_t> widths, std::size_t n_lut,
                                   std::size_t resolution)
    : widths_(std::move(widths)), n_lut_(n_lut), resolution_(resolution) {
    if (widths_.empty()) throw InvalidArgument("parameter encoder needs at least one conv block");
    if (n_lut == 0) throw InvalidArgument("n_lut must be positive");
    if (resolution < 2) throw InvalidArgument("parameter encoder resolution must be >= 2");
    std::size_t in = 3;
    for (std::size_t i = 0; i < widths_.size(); ++i) {
        if (widths_[i] == 0) throw InvalidArgument("parameter encoder width must be positive");
        convs_.emplace_back("param.conv" + std::to_string(i), in, widths_[i], 3, 2, 1);
        acts_.emplace_back(0.2);
        in = widths_[i];
    }
    head_ = Linear("param.head", in, fusion_weight_count(n_lut) + fusion_bias_count(n_lut));
}

FusionCoefficients ParameterEncoder::forward(const Image& image) {
    Tensor3 t = to_tensor(bilinear_resize(image, resolution_, resolution_));
    for (std::size_t i = 0; i < convs_.size(); ++i) t = acts_[i].forward(convs_[i].forward(t));
    const std::vector<double> pooled = pool_.forward(t);
    return FusionCoefficients::unflatten(head_.forward(pooled), n_lut_);
}

void ParameterEncoder::backward(const FusionCoefficients& grad_coef) {
    const std::vector<double> flat = grad_coef.flatten();
    Tensor3 g = pool_.backward(head_.backward(flat));
    for (std::size_t i = convs_.size(); i-- > 0;) {
        g = convs_[i].backward(acts_[i].backward(g), i != 0);
    }
}

void ParameterEncoder::init(std::mt19937_64& rng) {
    for (auto& c : convs_) c.init(rng, std::sqrt(2.0));
    std::fill(head_.weight.value.begin(), head_.weight.value.end(), 0.0);
    head_.bias.value = identity_coefficients(n_lut_).flatten();
}

void ParameterEncoder::collect(ParamRefs& out) {
    for (auto& c : convs_) c.collect(out);
    head_.collect(out);
}

}  // namespace lut4d::nn

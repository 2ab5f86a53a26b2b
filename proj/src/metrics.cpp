#include "lut4d/metrics.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "lut4d/errors.hpp"

namespace lut4d {

namespace {

void require_same(const Image& a, const Image& b) {
    if (!a.same_shape(b.height(), b.width())) throw ShapeError("metric inputs differ in size");
}

std::array<double, kSsimWindow> gaussian_taps() {
    std::array<double, kSsimWindow> g{};
    const double center = static_cast<double>(kSsimWindow / 2);
    double sum = 0.0;
    for (std::size_t i = 0; i < kSsimWindow; ++i) {
        const double d = static_cast<double>(i) - center;
        g[i] = std::exp(-d * d / (2.0 * kSsimSigma * kSsimSigma));
        sum += g[i];
    }
    for (double& v : g) v /= sum;
    return g;
}

// Separable "valid" Gaussian filter of an h x w plane.
std::vector<double> filter_valid(const std::vector<double>& src, std::size_t h, std::size_t w,
                                 const std::array<double, kSsimWindow>& g) {
    const std::size_t oh = h - kSsimWindow + 1, ow = w - kSsimWindow + 1;
    std::vector<double> tmp(h * ow, 0.0);
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < ow; ++x) {
            double s = 0.0;
            for (std::size_t t = 0; t < kSsimWindow; ++t) s += g[t] * src[y * w + x + t];
            tmp[y * ow + x] = s;
        }
    std::vector<double> out(oh * ow, 0.0);
    for (std::size_t y = 0; y < oh; ++y)
        for (std::size_t x = 0; x < ow; ++x) {
            double s = 0.0;
            for (std::size_t t = 0; t < kSsimWindow; ++t) s += g[t] * tmp[(y + t) * ow + x];
            out[y * ow + x] = s;
        }
    return out;
}

}  // namespace

double psnr(const Image& a, const Image& b) {
    require_same(a, b);
    const auto& da = a.data();
    const auto& db = b.data();
    double s = 0.0;
    for (std::size_t i = 0; i < da.size(); ++i) {
        const double d = da[i] - db[i];
        s += d * d;
    }
    const double mse = s / static_cast<double>(da.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / mse);
}

double ssim(const Image& a, const Image& b) {
    require_same(a, b);
    const std::size_t h = a.height(), w = a.width();
    if (h < kSsimWindow || w < kSsimWindow) {
        throw InvalidArgument("ssim needs at least 11x11 pixels");
    }
    const auto g = gaussian_taps();
    const double c1 = (kSsimK1 * 1.0) * (kSsimK1 * 1.0);
    const double c2 = (kSsimK2 * 1.0) * (kSsimK2 * 1.0);
    double total = 0.0;
    for (std::size_t ch = 0; ch < 3; ++ch) {
        std::vector<double> x(a.plane(ch).begin(), a.plane(ch).end());
        std::vector<double> y(b.plane(ch).begin(), b.plane(ch).end());
        std::vector<double> xx(x.size()), yy(x.size()), xy(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            xx[i] = x[i] * x[i];
            yy[i] = y[i] * y[i];
            xy[i] = x[i] * y[i];
        }
        const auto mx = filter_valid(x, h, w, g), my = filter_valid(y, h, w, g);
        const auto sxx = filter_valid(xx, h, w, g), syy = filter_valid(yy, h, w, g),
                   sxy = filter_valid(xy, h, w, g);
        double acc = 0.0;
        for (std::size_t i = 0; i < mx.size(); ++i) {
            const double vx = sxx[i] - mx[i] * mx[i];
            const double vy = syy[i] - my[i] * my[i];
            const double cov = sxy[i] - mx[i] * my[i];
            acc += ((2.0 * mx[i] * my[i] + c1) * (2.0 * cov + c2)) /
                   ((mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2));
        }
        total += acc / static_cast<double>(mx.size());
    }
    return total / 3.0;
}

}  // namespace lut4d

#include "lut4d/regularizers.hpp"

#include <array>

#include "lut4d/reduce.hpp"

namespace lut4d {

namespace {

struct Axis {
    std::size_t stride;
    std::size_t size;
};

std::array<Axis, 4> axes_of(const Lattice4D& l4) {
    const std::size_t n = l4.n_bin();
    return {{{1, n}, {n, n}, {n * n, n}, {n * n * n, l4.n_ctx()}}};
}

// Visit every adjacent pair (cur, next) of flat offsets, one call per row of
// the innermost (i) dimension so callers can keep per-row partial sums.
template <typename PairFn, typename RowEnd>
void for_each_pair(const Lattice4D& l4, PairFn&& pair, RowEnd&& row_end) {
    const std::size_t n = l4.n_bin();
    const std::size_t rows = n * n * l4.n_ctx();  // (j, k, l) combinations
    const auto axes = axes_of(l4);
    for (std::size_t ch = 0; ch < 3; ++ch) {
        const std::size_t base = ch * l4.plane_size();
        for (const Axis& ax : axes) {
            for (std::size_t row = 0; row < rows; ++row) {
                const std::size_t row_off = row * n;
                for (std::size_t i = 0; i < n; ++i) {
                    const std::size_t e = row_off + i;
                    if ((e / ax.stride) % ax.size == ax.size - 1) continue;
                    pair(base + e, base + e + ax.stride);
                }
                row_end();
            }
        }
    }
}

}  // namespace

double smooth_lut(const Lattice4D& l4) {
    auto v = l4.values();
    std::vector<double> partial;
    double acc = 0.0;
    for_each_pair(
        l4,
        [&](std::size_t cur, std::size_t next) {
            const double d = v[next] - v[cur];
            acc += d * d;
        },
        [&] {
            partial.push_back(acc);
            acc = 0.0;
        });
    return pairwise_sum(partial);
}

std::size_t adjacent_pair_count(std::size_t n_bin, std::size_t n_ctx) noexcept {
    if (n_bin < 2 || n_ctx < 2) return 0;
    const std::size_t rgb_axes = 3 * (n_bin - 1) * n_bin * n_bin * n_ctx;
    const std::size_t ctx_axis = n_bin * n_bin * n_bin * (n_ctx - 1);
    return 3 * (rgb_axes + ctx_axis);
}

double smooth_coef(const FusionCoefficients& coef) {
    double s = 0.0;
    for (double w : coef.weights) s += w * w;
    for (double b : coef.biases) s += b * b;
    return s;
}

double smooth_total(const Lattice4D& l4, const FusionCoefficients& coef) {
    return smooth_lut(l4) + smooth_coef(coef);
}

double monotonicity(const Lattice4D& l4) {
    auto v = l4.values();
    std::vector<double> partial;
    double acc = 0.0;
    for_each_pair(
        l4,
        [&](std::size_t cur, std::size_t next) {
            const double d = v[cur] - v[next];
            if (d > 0.0) acc += d;
        },
        [&] {
            partial.push_back(acc);
            acc = 0.0;
        });
    return pairwise_sum(partial);
}

RegularizerGrad regularizer_backward(const Lattice4D& l4, const FusionCoefficients& coef,
                                     double alpha_s, double alpha_m) {
    RegularizerGrad g{std::vector<double>(l4.size(), 0.0), FusionCoefficients(coef.n_lut())};
    auto v = l4.values();
    auto& d = g.d_lattice;
    for_each_pair(
        l4,
        [&](std::size_t cur, std::size_t next) {
            const double diff = v[next] - v[cur];
            const double s = 2.0 * alpha_s * diff;
            d[next] += s;
            d[cur] -= s;
            // d/dcur max(0, cur - next)
            if (diff < 0.0) {
                d[cur] += alpha_m;
                d[next] -= alpha_m;
            }
        },
        [] {});
    for (std::size_t i = 0; i < coef.weights.size(); ++i)
        g.d_coef.weights[i] = 2.0 * alpha_s * coef.weights[i];
    for (std::size_t i = 0; i < coef.biases.size(); ++i)
        g.d_coef.biases[i] = 2.0 * alpha_s * coef.biases[i];
    return g;
}

}  // namespace lut4d

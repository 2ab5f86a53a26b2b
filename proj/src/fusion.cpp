#include "lut4d/fusion.hpp"

#include <string>

#include "lut4d/errors.hpp"

namespace lut4d {

std::size_t fusion_weight_count(std::size_t n_lut) noexcept { return 3 * n_lut * n_lut; }
std::size_t fusion_bias_count(std::size_t n_lut) noexcept { return n_lut; }

std::size_t fusion_weight_index(std::size_t n_lut, std::size_t out_ch, std::size_t rel,
                                std::size_t n) noexcept {
    return (out_ch % n_lut) * 3 * n_lut + rel * n_lut + n;
}

FusionCoefficients::FusionCoefficients(std::vector<double> w, std::vector<double> b)
    : weights(std::move(w)), biases(std::move(b)) {
    if (biases.empty() || weights.size() != fusion_weight_count(biases.size())) {
        throw InvalidArgument("fusion coefficients need 3*N^2 weights and N biases, got " +
                              std::to_string(weights.size()) + " and " +
                              std::to_string(biases.size()));
    }
    if (!all_finite(weights) || !all_finite(biases)) {
        throw InvalidArgument("fusion coefficients contain non-finite values");
    }
}

std::vector<double> FusionCoefficients::flatten() const {
    std::vector<double> flat(weights);
    flat.insert(flat.end(), biases.begin(), biases.end());
    return flat;
}

FusionCoefficients FusionCoefficients::unflatten(std::span<const double> flat, std::size_t n_lut) {
    const std::size_t nw = fusion_weight_count(n_lut);
    if (flat.size() != nw + n_lut) {
        throw InvalidArgument("flat coefficient vector has length " + std::to_string(flat.size()) +
                              ", expected " + std::to_string(nw + n_lut));
    }
    return {std::vector<double>(flat.begin(), flat.begin() + static_cast<std::ptrdiff_t>(nw)),
            std::vector<double>(flat.begin() + static_cast<std::ptrdiff_t>(nw), flat.end())};
}

FusionCoefficients identity_coefficients(std::size_t n_lut) {
    if (n_lut == 0) throw InvalidArgument("n_lut must be positive");
    FusionCoefficients coef(n_lut);
    for (std::size_t c = 0; c < 3; ++c) coef.weights[fusion_weight_index(n_lut, c, 0, 0)] = 1.0;
    return coef;
}

void validate(const BasisBank& bank, const FusionCoefficients& coef) {
    if (bank.empty()) throw InvalidArgument("basis bank is empty");
    for (const auto& lut : bank) {
        if (!lut.same_shape(bank.front())) throw InvalidArgument("basis LUTs differ in size");
    }
    if (coef.biases.size() != bank.size() ||
        coef.weights.size() != fusion_weight_count(bank.size())) {
        throw InvalidArgument("coefficient count does not match " + std::to_string(bank.size()) +
                              " basis LUTs");
    }
}

Lattice4D fuse(const BasisBank& bank, const FusionCoefficients& coef) {
    validate(bank, coef);
    const std::size_t n_lut = bank.size();
    Lattice4D out(bank.front().n_bin(), bank.front().n_ctx());
    double bias = 0.0;
    for (double b : coef.biases) bias += b;
    const std::size_t plane = out.plane_size();
    for (std::size_t c = 0; c < 3; ++c) {
        auto dst = out.channel(c);
        for (double& v : dst) v = bias;
        for (std::size_t n = 0; n < n_lut; ++n) {
            for (std::size_t rel = 0; rel < 3; ++rel) {
                const double w = coef.weights[fusion_weight_index(n_lut, c, rel, n)];
                if (w == 0.0) continue;
                auto src = bank[n].channel((c + rel) % 3);
                for (std::size_t e = 0; e < plane; ++e) dst[e] += w * src[e];
            }
        }
    }
    return out;
}

FusionGrad fuse_backward(const BasisBank& bank, const FusionCoefficients& coef,
                         std::span<const double> upstream) {
    validate(bank, coef);
    if (upstream.size() != bank.front().size()) {
        throw ShapeError("fusion upstream gradient has length " + std::to_string(upstream.size()) +
                         ", expected " + std::to_string(bank.front().size()));
    }
    const std::size_t n_lut = bank.size();
    const std::size_t plane = bank.front().plane_size();
    FusionGrad g{FusionCoefficients(n_lut),
                 std::vector<std::vector<double>>(n_lut, std::vector<double>(bank.front().size(), 0.0))};

    double up_total = 0.0;
    for (double u : upstream) up_total += u;
    for (double& b : g.d_coef.biases) b = up_total;

    for (std::size_t c = 0; c < 3; ++c) {
        auto up = upstream.subspan(c * plane, plane);
        for (std::size_t n = 0; n < n_lut; ++n) {
            for (std::size_t rel = 0; rel < 3; ++rel) {
                const std::size_t src_ch = (c + rel) % 3;
                const std::size_t wi = fusion_weight_index(n_lut, c, rel, n);
                auto src = bank[n].channel(src_ch);
                double dw = 0.0;
                for (std::size_t e = 0; e < plane; ++e) dw += up[e] * src[e];
                g.d_coef.weights[wi] += dw;

                const double w = coef.weights[wi];
                if (w == 0.0) continue;
                double* dst = g.d_basis[n].data() + src_ch * plane;
                for (std::size_t e = 0; e < plane; ++e) dst[e] += w * up[e];
            }
        }
    }
    return g;
}

}  // namespace lut4d

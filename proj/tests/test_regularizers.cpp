#include <gtest/gtest.h>

#include <random>

#include "lut4d/fusion.hpp"
#include "lut4d/regularizers.hpp"
#include "naive_oracles.hpp"
#include "test_util.hpp"

using namespace lut4d;
using namespace lut4d::testing;

TEST(SmoothLut, ConstantIsZero) {
    EXPECT_EQ(smooth_lut(constant_lattice4(4, 2, {0.2, 0.4, 0.6})), 0.0);
}

TEST(SmoothLut, IdentityClosedForm) {
    const Lattice4D id = identity_lattice4(3, 2);
    EXPECT_NEAR(smooth_lut(id), 27.0, 1e-12);
    EXPECT_NEAR(naive::smooth_lut(id), 27.0, 1e-12);
}

TEST(SmoothLut, MatchesNaiveOracle) {
    std::mt19937_64 rng(61);
    for (std::size_t nc : {2u, 3u}) {
        const Lattice4D l = random_lattice4(3, nc, rng);
        EXPECT_LE(rel_err(smooth_lut(l), naive::smooth_lut(l)), 1e-12);
    }
}

TEST(SmoothCoef, Examples) {
    EXPECT_EQ(smooth_coef(FusionCoefficients(3)), 0.0);
    FusionCoefficients unit(3);
    unit.weights[0] = 1.0;
    EXPECT_DOUBLE_EQ(smooth_coef(unit), 1.0);
    FusionCoefficients c;
    c.weights = {1.0, 2.0};
    c.biases = {3.0};
    EXPECT_DOUBLE_EQ(smooth_coef(c), 14.0);
}

TEST(SmoothTotal, SumOfParts) {
    FusionCoefficients unit(3);
    unit.weights[0] = 1.0;
    EXPECT_NEAR(smooth_total(identity_lattice4(3, 2), unit), 28.0, 1e-12);
    EXPECT_EQ(smooth_total(Lattice4D(3, 2), FusionCoefficients(3)), 0.0);
    std::mt19937_64 rng(62);
    const Lattice4D l = random_lattice4(3, 2, rng);
    const FusionCoefficients c(random_values(27, rng), random_values(3, rng));
    EXPECT_NEAR(smooth_total(l, c), naive::smooth_lut(l) + smooth_coef(c), 1e-10);
}

TEST(Monotonicity, IdentityAndConstantAreZero) {
    EXPECT_EQ(monotonicity(identity_lattice4(5, 3)), 0.0);
    EXPECT_EQ(naive::monotonicity(identity_lattice4(5, 3)), 0.0);
    EXPECT_EQ(monotonicity(constant_lattice4(3, 2, {0.9, 0.1, 0.5})), 0.0);
}

TEST(Monotonicity, UnitDropExample) {
    Lattice4D l(2, 2);
    for (std::size_t m = 0; m < 2; ++m)
        for (std::size_t k = 0; k < 2; ++k)
            for (std::size_t j = 0; j < 2; ++j) l.set({0, j, k, m}, kRed, 1.0);
    EXPECT_DOUBLE_EQ(monotonicity(l), 8.0);
    EXPECT_DOUBLE_EQ(naive::monotonicity(l), 8.0);
}

TEST(Monotonicity, MatchesNaiveOracle) {
    std::mt19937_64 rng(63);
    for (std::size_t nc : {2u, 3u}) {
        const Lattice4D l = random_lattice4(4, nc, rng);
        EXPECT_LE(rel_err(monotonicity(l), naive::monotonicity(l)), 1e-12);
    }
}

TEST(Regularizers, NonNegativeAndShiftInvariant) {
    std::mt19937_64 rng(64);
    for (int t = 0; t < 10; ++t) {
        Lattice4D l = random_lattice4(3, 2, rng, -2, 2);
        const double s = smooth_lut(l), m = monotonicity(l);
        EXPECT_GE(s, 0.0);
        EXPECT_GE(m, 0.0);
        for (double& v : l.channel(kGreen)) v += 0.75;
        EXPECT_NEAR(smooth_lut(l), s, 1e-10);
        EXPECT_NEAR(monotonicity(l), m, 1e-10);
    }
}

TEST(Regularizers, PairCount) {
    // 3 channels x (3 RGB axes x (n-1) n^2 n_ctx + n^3 (n_ctx - 1)).
    EXPECT_EQ(adjacent_pair_count(3, 2), 3u * (3 * 2 * 9 * 2 + 27));
    EXPECT_EQ(adjacent_pair_count(17, 2), 97971u);
}

TEST(RegularizerBackward, ConstantLatticeHasZeroLatticeGradient) {
    FusionCoefficients c(3);
    c.weights[4] = 0.5;
    const RegularizerGrad g = regularizer_backward(constant_lattice4(3, 2, {0.3, 0.3, 0.3}), c, 1.0, 1.0);
    for (double v : g.d_lattice) EXPECT_EQ(v, 0.0);
}

TEST(RegularizerBackward, CoefGradientIsTwiceCoefficients) {
    std::mt19937_64 rng(65);
    const FusionCoefficients c(random_values(27, rng, -1, 1), random_values(3, rng, -1, 1));
    const double alpha_s = 0.3;
    const RegularizerGrad g = regularizer_backward(identity_lattice4(3, 2), c, alpha_s, 10.0);
    for (std::size_t i = 0; i < c.weights.size(); ++i)
        EXPECT_DOUBLE_EQ(g.d_coef.weights[i], 2.0 * alpha_s * c.weights[i]);
    for (std::size_t i = 0; i < c.biases.size(); ++i)
        EXPECT_DOUBLE_EQ(g.d_coef.biases[i], 2.0 * alpha_s * c.biases[i]);
}

TEST(RegularizerBackward, MatchesFiniteDifferencesAwayFromKink) {
    std::mt19937_64 rng(66);
    const double alpha_s = 0.7, alpha_m = 1.9, h = 1e-6;
    Lattice4D l = random_lattice4(3, 2, rng);
    const FusionCoefficients c(random_values(27, rng), random_values(3, rng));
    std::vector<double> vals(l.values().begin(), l.values().end());
    auto loss = [&] {
        std::copy(vals.begin(), vals.end(), l.values().begin());
        return alpha_s * smooth_total(l, c) + alpha_m * monotonicity(l);
    };
    const RegularizerGrad g = regularizer_backward(l, c, alpha_s, alpha_m);

    // Skip entries whose adjacent differences sit within 1e-4 of the kink.
    auto near_kink = [&](std::size_t e) {
        const std::size_t n = l.n_bin();
        const std::size_t plane = l.plane_size();
        const std::size_t local = e % plane;
        const std::size_t strides[4] = {1, n, n * n, n * n * n};
        const std::size_t sizes[4] = {n, n, n, l.n_ctx()};
        for (int a = 0; a < 4; ++a) {
            const std::size_t idx = (local / strides[a]) % sizes[a];
            if (idx + 1 < sizes[a] && std::abs(vals[e] - vals[e + strides[a]]) < 1e-4) return true;
            if (idx > 0 && std::abs(vals[e - strides[a]] - vals[e]) < 1e-4) return true;
        }
        return false;
    };
    int checked = 0;
    for (std::size_t e = 0; e < vals.size(); ++e) {
        if (near_kink(e)) continue;
        EXPECT_NEAR(g.d_lattice[e], central_diff(loss, vals, e, h), 1e-6) << "entry " << e;
        ++checked;
    }
    EXPECT_GE(checked, 20);
}

// Copyright 2026 The twistfield Authors
// SPDX-License-Identifier: Apache-2.0

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace twistfield;
using namespace twistfield::testing;

namespace {

ScalarTestFunction constant_pair(const Grid& g, double a, double b) {
    const auto n = static_cast<Eigen::Index>(g.size());
    return {Field::Constant(n, a), Field::Constant(n, b)};
}

} // namespace

TEST(Grid, SizesAndMeasures) {
    const Grid g(3, 4, 0.5);
    EXPECT_EQ(g.size(), 64u);
    EXPECT_DOUBLE_EQ(g.cell_volume(), 0.125);
    EXPECT_DOUBLE_EQ(g.dual_cell_volume(), std::pow(2.0 * kPi / 2.0, 3));
    EXPECT_THROW(Grid(4, 4, 1.0), Error);
    EXPECT_THROW(Grid(1, 1, 1.0), Error);
    EXPECT_THROW(Grid(1, 4, 0.0), Error);
}

TEST(Grid, DualFrequenciesCoverTheStatedRange) {
    for (int n : {4, 5}) {
        const Grid g(1, n, 1.0);
        std::vector<int> seen;
        for (std::size_t k = 0; k < g.size(); ++k) seen.push_back(g.frequencies(k)[0]);
        std::sort(seen.begin(), seen.end());
        EXPECT_EQ(seen.front(), -(n / 2));
        EXPECT_EQ(seen.back(), (n + 1) / 2 - 1);
    }
}

TEST(Spectral, ForwardTransformMatchesNaiveDft) {
    std::mt19937_64 rng(11);
    for (const Grid& g : {Grid(1, 16, 0.5), Grid(2, 6, 0.3), Grid(3, 4, 1.1)}) {
        const CVec f = random_cvec(static_cast<Eigen::Index>(g.size()), rng);
        EXPECT_LE((fft_forward(g, f) - naive_dft(g, f)).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_LE((fft_inverse(g, fft_forward(g, f)) - f).cwiseAbs().maxCoeff(), 1e-13);
    }
}

TEST(SymplecticForm, DiagonalVanishes) {
    std::mt19937_64 rng(1);
    const Grid g(1, 16, 0.5);
    const auto s = random_test_function(g, rng);
    EXPECT_EQ(symplectic_form(s, s, g), 0.0);
}

TEST(SymplecticForm, OnesPairOnFourSites) {
    const Grid g(1, 4, 1.0);
    EXPECT_DOUBLE_EQ(symplectic_form(constant_pair(g, 1, 0), constant_pair(g, 0, 1), g), -4.0);
}

TEST(SymplecticForm, MatchesDoubleLoop) {
    std::mt19937_64 rng(2);
    const Grid g(1, 16, 0.5);
    const auto s = random_test_function(g, rng);
    const auto t = random_test_function(g, rng);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < s.s0.size(); ++i) acc += s.s1[i] * t.s0[i];
    for (Eigen::Index i = 0; i < s.s0.size(); ++i) acc -= s.s0[i] * t.s1[i];
    EXPECT_NEAR(symplectic_form(s, t, g), g.cell_volume() * acc, 1e-14);
}

TEST(SymplecticForm, AntisymmetricAndBilinear) {
    std::mt19937_64 rng(3);
    const Grid g(2, 5, 0.7);
    for (int trial = 0; trial < 20; ++trial) {
        const auto s = random_test_function(g, rng);
        const auto t = random_test_function(g, rng);
        const auto u = random_test_function(g, rng);
        const double a = 0.3 + trial, b = -1.7;
        EXPECT_NEAR(symplectic_form(s, t, g), -symplectic_form(t, s, g), 1e-13);
        EXPECT_NEAR(symplectic_form(a * s + b * t, u, g), a * symplectic_form(s, u, g) + b * symplectic_form(t, u, g),
                    1e-13 * (1.0 + std::abs(a)) * 10.0);
    }
}

TEST(SymplecticForm, GridMismatchThrows) {
    const Grid g(1, 4, 1.0), h(1, 8, 1.0);
    try {
        symplectic_form(ScalarTestFunction::zero(g), ScalarTestFunction::zero(h), g);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::GridMismatch);
    }
}

TEST(Convolve, DeltaIsIdentity) {
    std::mt19937_64 rng(4);
    for (const Grid& g : {Grid(1, 16, 0.5), Grid(2, 8, 0.25), Grid(3, 4, 1.5)}) {
        const Field f = random_field(g, rng);
        EXPECT_LE(sup_norm(convolve(TwistKernel::delta(g), f) - f), 1e-13);
        EXPECT_DOUBLE_EQ(TwistKernel::delta(g).values()[0], 1.0 / g.cell_volume());
    }
}

TEST(Convolve, ConstantKernelGivesTheIntegral) {
    const Grid g(1, 16, 0.5);
    std::mt19937_64 rng(5);
    Field f = random_field(g, rng);
    f *= 2.0 / integral(g, f);
    const Field c = convolve(TwistKernel::constant(g), f);
    EXPECT_LE(sup_norm(c - Field::Constant(c.size(), 2.0)), 1e-13);
}

TEST(Convolve, YukawaMatchesDirectSum) {
    std::mt19937_64 rng(6);
    const Grid g(1, 16, 0.5);
    const Field f = random_field(g, rng);
    for (Sampling smp : {Sampling::Pointwise, Sampling::Spectral}) {
        const auto k = TwistKernel::yukawa(g, 1.0, smp);
        EXPECT_LE(sup_norm(convolve(k, f) - naive_convolution(g, k.values(), f)), 1e-12);
    }
}

TEST(Convolve, NonFiniteKernelRejected) {
    const Grid g(1, 8, 1.0);
    Field v = Field::Zero(8);
    v[3] = std::numeric_limits<double>::quiet_NaN();
    try {
        (void)TwistKernel::tabulated(g, v);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NonFinite);
    }
}

TEST(Convolve, LinearAndTranslationCovariant) {
    std::mt19937_64 rng(7);
    const Grid g(2, 6, 0.4);
    const auto sigma = TwistKernel::tabulated(g, random_field(g, rng));
    for (int trial = 0; trial < 10; ++trial) {
        const Field f = random_field(g, rng), h = random_field(g, rng);
        const Shift a{trial % 6, (2 * trial + 1) % 6, 0};
        EXPECT_LE(sup_norm(convolve(sigma, 2.0 * f - 3.0 * h) - (2.0 * convolve(sigma, f) - 3.0 * convolve(sigma, h))), 1e-12);
        EXPECT_LE(sup_norm(convolve(sigma, translate(g, f, a)) - translate(g, convolve(sigma, f), a)), 1e-13);
    }
}

TEST(Convolve, NamedEvenKernelsAreSymmetric) {
    std::mt19937_64 rng(8);
    for (const Grid& g : {Grid(1, 16, 0.5), Grid(3, 4, 0.5)}) {
        const std::vector<TwistKernel> kernels = {
            TwistKernel::delta(g), TwistKernel::constant(g), TwistKernel::yukawa(g, 1.0, Sampling::Pointwise),
            TwistKernel::yukawa(g, 1.0), TwistKernel::coulomb(g, Sampling::Pointwise), TwistKernel::coulomb(g)};
        for (const auto& k : kernels) {
            EXPECT_TRUE(k.is_even()) << k.label();
            const Field f = random_field(g, rng), h = random_field(g, rng);
            const double lhs = g.cell_volume() * h.dot(convolve(k, f));
            const double rhs = g.cell_volume() * convolve(k, h).dot(f);
            EXPECT_NEAR(lhs, rhs, 1e-12 * std::max(1.0, std::abs(lhs))) << k.label();
        }
    }
}

TEST(Kernels, PointwiseOriginIsTheBallAverage) {
    const Grid g(3, 4, 0.5);
    const double a = TwistKernel::origin_ball_radius(g);
    EXPECT_NEAR(4.0 / 3.0 * kPi * a * a * a, 0.125, 1e-15);
    EXPECT_NEAR(TwistKernel::coulomb(g, Sampling::Pointwise).values()[0], 3.0 / (8.0 * kPi * a), 1e-14);
    // Ball average of exp(-r)/r by midpoint quadrature in r.
    const int steps = 200000;
    double acc = 0.0;
    for (int i = 0; i < steps; ++i) {
        const double r = (i + 0.5) * a / steps;
        acc += 4.0 * kPi * r * std::exp(-r) * (a / steps);
    }
    EXPECT_NEAR(TwistKernel::yukawa(g, 1.0, Sampling::Pointwise).values()[0], acc / (4.0 / 3.0 * kPi * a * a * a), 1e-8);
}

TEST(DiffOp, IdentityAndZeroMode) {
    std::mt19937_64 rng(9);
    const Grid g(2, 6, 0.3);
    const Field f = random_field(g, rng);
    EXPECT_EQ(apply_diffop(DiffOp::identity(), g, f), f);
    const Field c = Field::Constant(static_cast<Eigen::Index>(g.size()), 1.7);
    EXPECT_LE(sup_norm(apply_diffop(DiffOp::helmholtz(2.0), g, c) - 4.0 * c), 1e-12);
}

TEST(DiffOp, NegLaplacianOnCosine) {
    const Grid g(1, 16, 0.5);
    for (int j = 0; j <= 8; ++j) {
        const double k = 2.0 * kPi * j / (g.n * g.dx);
        Field f(16);
        for (int x = 0; x < 16; ++x) f[x] = std::cos(k * x * g.dx);
        EXPECT_LE(sup_norm(apply_diffop(DiffOp::neg_laplacian(), g, f) - k * k * f), 1e-12 * std::max(1.0, k * k)) << j;
    }
}

TEST(DiffOp, SymbolsAreNonnegativeAndLaplacianVanishesOnlyAtZero) {
    const Grid g(3, 4, 0.5);
    for (std::size_t k = 0; k < g.size(); ++k) {
        EXPECT_GE(DiffOp::helmholtz(1.0).symbol(g, k), 1.0);
        EXPECT_EQ(DiffOp::neg_laplacian().symbol(g, k) == 0.0, k == 0);
    }
}

TEST(FundamentalSolution, RoundTrips) {
    std::mt19937_64 rng(10);
    for (const Grid& g : {Grid(1, 16, 0.5), Grid(2, 8, 0.5), Grid(3, 6, 0.4)}) {
        const Field f = random_field(g, rng);
        const auto hs = fundamental_solution(DiffOp::helmholtz(1.0), g, ZeroMode::Strict);
        EXPECT_LE(sup_norm(apply_diffop(DiffOp::helmholtz(1.0), g, convolve(hs, f)) - f), 1e-12);
        const auto ls = fundamental_solution(DiffOp::neg_laplacian(), g, ZeroMode::MeanZero);
        const Field f0 = f.array() - f.mean();
        EXPECT_LE(sup_norm(apply_diffop(DiffOp::neg_laplacian(), g, convolve(ls, f0)) - f0), 1e-12);
        EXPECT_LE(sup_norm(apply_diffop(DiffOp::neg_laplacian(), g, convolve(ls, f)) - f0), 1e-12);
        EXPECT_EQ(ls.zero_mode(), ZeroMode::MeanZero);
    }
}

TEST(FundamentalSolution, SingularSymbolNeedsMeanZero) {
    const Grid g(1, 8, 1.0);
    try {
        (void)fundamental_solution(DiffOp::neg_laplacian(), g, ZeroMode::Strict);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::SingularSymbol);
    }
}

// Periodic Green's function of -d^2 + m^2 on a circle of length L:
// cosh(m(|x| - L/2)) / (2 m sinh(m L / 2)).
TEST(FundamentalSolution, HelmholtzRefinementConverges) {
    const double m = 1.0, L = 8.0;
    std::vector<double> diffs, errs;
    Field previous;
    for (int n : {16, 32, 64, 128, 256}) {
        const Grid g(1, n, L / n);
        const Field v = fundamental_solution(DiffOp::helmholtz(m), g, ZeroMode::Strict).values();
        double err = 0.0;
        for (int i = 0; i < n; ++i) {
            const double x = std::abs(g.position(static_cast<std::size_t>(i))[0]);
            err = std::max(err, std::abs(v[i] - std::cosh(m * (x - L / 2)) / (2 * m * std::sinh(m * L / 2))));
        }
        errs.push_back(err);
        if (previous.size()) {
            double d = 0.0;
            for (Eigen::Index i = 0; i < previous.size(); ++i) d = std::max(d, std::abs(v[2 * i] - previous[i]));
            diffs.push_back(d);
        }
        previous = v;
    }
    for (std::size_t i = 1; i < diffs.size(); ++i) EXPECT_LT(diffs[i], diffs[i - 1]);
    for (std::size_t i = 1; i < errs.size(); ++i) EXPECT_LT(errs[i], errs[i - 1]);
    // The kink at x = 0 limits the sup error to first order in dx.
    EXPECT_LT(errs.back(), 5e-3);
    EXPECT_NEAR(errs[errs.size() - 2] / errs.back(), 2.0, 0.2);
}

TEST(Support, EmptyForZeroField) {
    const Grid g(1, 8, 1.0);
    EXPECT_TRUE(support(Field::Zero(8), 1e-12).empty());
    EXPECT_THROW(support(Field::Zero(8), 0.0), Error);
}

TEST(Support, MinkowskiSumWithOriginIsIdentity) {
    const Grid g(2, 8, 1.0);
    const SiteSet b = ball(g, g.index({3, 4, 0}), 2.0);
    EXPECT_EQ(minkowski_sum(g, {0}, b), b);
    EXPECT_EQ(ball(g, 0, 0.0), SiteSet{0});
}

TEST(Support, MinkowskiSumWraps) {
    const Grid g(1, 8, 1.0);
    EXPECT_EQ(minkowski_sum(g, {7}, {1, 2}), (SiteSet{0, 1}));
    EXPECT_TRUE(disjoint({1, 3, 5}, {0, 2, 4}));
    EXPECT_FALSE(disjoint({1, 3, 5}, {5}));
}

TEST(SmoothFields, PrescribedValuesMeanZeroNoNyquist) {
    const Grid g(2, 8, 0.5);
    std::vector<std::pair<std::size_t, double>> vals;
    for (std::size_t s : ball(g, g.index({2, 2, 0}), 1.0)) vals.emplace_back(s, 1.0);
    for (std::size_t s : ball(g, g.index({6, 6, 0}), 1.0)) vals.emplace_back(s, 0.0);
    const Field f = smooth_field_with_values(g, vals);
    for (const auto& [s, v] : vals) EXPECT_NEAR(f[static_cast<Eigen::Index>(s)], v, 1e-12);
    EXPECT_NEAR(f.mean(), 0.0, 1e-13);
    EXPECT_TRUE(is_smooth(g, f));
}

TEST(Export, KernelCsvHasOneRowPerSite) {
    const Grid g(2, 4, 0.5);
    std::ostringstream os;
    write_kernel_csv(os, TwistKernel::coulomb(g));
    const std::string s = os.str();
    EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 17);
    EXPECT_EQ(s.substr(0, 16), "site,x0,x1,value");
}

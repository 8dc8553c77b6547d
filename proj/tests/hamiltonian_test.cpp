// Copyright 2026 The twistfield Authors
// SPDX-License-Identifier: Apache-2.0

#include "twistfield/hamiltonian.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

namespace tf = twistfield;
using tf::cplx;
using tf::CMat;
using tf::CVec;
using tf::CutoffFunction;
using tf::MomentumGrid;

namespace {

double op_norm(const tf::KronOperator& a) { return a.norm(); }

class HamiltonianTest : public ::testing::Test {
protected:
    MomentumGrid mg{tf::Grid(1, 16, 0.5), 1.0};
    std::mt19937_64 rng{77};

    CVec random_wave() {
        CVec w = tf::testing::random_cvec(static_cast<Eigen::Index>(mg.size()), rng);
        return w / mg.norm(w);
    }
    std::size_t freq(int j) const { return mg.index_of({j, 0, 0}); }
};

} // namespace

TEST_F(HamiltonianTest, ShiftAndKernelConventions) {
    const CVec w = random_wave();
    const std::size_t k = freq(3);
    const CVec sw = mg.shift(k) * w;
    for (int j = -8; j < 8; ++j) EXPECT_EQ(sw[static_cast<Eigen::Index>(freq(j))], w[static_cast<Eigen::Index>(freq(j - 3))]);
    EXPECT_EQ(mg.negate(freq(5)), freq(-5));
    EXPECT_NEAR(mg.sigma_hat(freq(0)), 4.0 * tf::kPi, 1e-14);

    // The tabulated kernel reproduces 4 pi / varpi^2 under a naive DFT.
    const tf::TwistKernel sigma = mg.kernel();
    const CVec spec = tf::testing::naive_dft(mg.grid(), sigma.values().cast<cplx>());
    for (std::size_t q = 0; q < mg.size(); ++q) EXPECT_NEAR(std::abs(spec[static_cast<Eigen::Index>(q)] - mg.sigma_hat(q)), 0.0, 1e-12);
}

TEST_F(HamiltonianTest, MuHatAdjointAndAction) {
    const CVec w = random_wave();
    for (auto choice : {tf::ShiftChoice::Forward, tf::ShiftChoice::Mirrored})
        for (int j : {0, 1, -3, 8}) {
            const std::size_t k = freq(j);
            const CMat star = CMat(tf::mu_hat_star(mg, k, choice));
            EXPECT_LE((CMat(tf::mu_hat(mg, k, choice)) - star.adjoint()).norm(), 1e-14);
        }
    const std::size_t k = freq(2);
    const CVec out = tf::mu_hat_star(mg, k) * w;
    for (int j = -8; j < 8; ++j)
        EXPECT_NEAR(std::abs(out[static_cast<Eigen::Index>(freq(j))] + mg.sigma_hat(k) * w[static_cast<Eigen::Index>(freq(j - 2))]), 0.0, 1e-13);
}

TEST_F(HamiltonianTest, StrongContinuity) {
    const MomentumGrid light(tf::Grid(1, 16, 0.5), 0.2);
    CVec w = tf::testing::random_cvec(16, rng);
    for (auto [k, h] : {std::pair{0, 1}, std::pair{3, -2}, std::pair{7, 6}}) {
        const auto r = tf::mu_continuity(light, light.index_of({k, 0, 0}), light.index_of({h, 0, 0}), w);
        EXPECT_TRUE(r.exact_bound_holds());
        EXPECT_LE(r.identity_residual, 1e-10 * std::max(1.0, r.lhs));
    }
    // The bound without (4 pi)^2 fails near k = 0.
    EXPECT_FALSE(tf::mu_continuity(light, 0, light.index_of({1, 0, 0}), w).bare_bound_holds());
}

TEST_F(HamiltonianTest, OperatorIdentities) {
    const CutoffFunction g = CutoffFunction::gaussian(mg, freq(2), 0.4 * mg.grid().dual_spacing());
    ASSERT_EQ(g.support().size(), 5u);
    const tf::OneFermionBosonSpace space(mg, g, 3);
    const auto terms = space.build();
    const tf::KronOperator h = terms.total();
    EXPECT_LE(op_norm(h - h.adjoint()), 1e-12 * op_norm(h));

    const double hmu = space.hmu_scalar(g);
    EXPECT_LE(op_norm(terms.hmu - hmu * space.identity()), 1e-10 * hmu);
    EXPECT_LE(op_norm(tf::commutator(terms.hmu, terms.hmuphi)), 1e-11 * hmu);

    // [H0(g'), Hmuphi(g)] with g' a second profile on the same modes.
    CutoffFunction gp = g;
    for (std::size_t k : g.support()) gp.values[static_cast<Eigen::Index>(k)] = 0.3 + 0.1 * static_cast<double>(k % 5);
    const tf::KronOperator lhs = tf::commutator(space.h0(gp), space.hmuphi(g));
    EXPECT_LE(op_norm(lhs - space.density_commutator(gp, g)), 1e-10 * op_norm(lhs));
    EXPECT_GT(op_norm(lhs - space.density_commutator_single_varpi(gp, g)), 1e-3);

    // H does not conserve the boson number.
    EXPECT_GT(op_norm(tf::commutator(h, space.boson_number())), 1e-3);

    // A cutoff outside the modes is rejected.
    EXPECT_THROW(space.h0(CutoffFunction::point(mg, freq(7), 1.0)), tf::Error);
    EXPECT_THROW(tf::OneFermionBosonSpace(mg, CutoffFunction::flat(mg, 100.0), 1), tf::Error);
}

TEST_F(HamiltonianTest, ClosedFormMatchesMatrix) {
    const CutoffFunction g = CutoffFunction::gaussian(mg, freq(-3), 0.5 * mg.grid().dual_spacing());
    for (auto choice : {tf::ShiftChoice::Forward, tf::ShiftChoice::Mirrored}) {
        const tf::OneFermionBosonSpace space(mg, g, 2, choice);
        const tf::KronOperator h = space.build().total();
        for (int draw = 0; draw < 3; ++draw) {
            const CVec w = random_wave();
            const CMat got = h.apply(space.vacuum_state(w));
            EXPECT_LE((got - space.closed_form(w)).norm(), 1e-10 * got.norm());
        }
    }
}

TEST_F(HamiltonianTest, HmuGrowsWithFlatRadius) {
    const MomentumGrid big(tf::Grid(2, 8, 0.5), 0.5);
    double prev = 0.0;
    for (double r = 0.5; r <= 8.0; r += 0.5) {
        const double v = tf::OneFermionBosonSpace::hmu_scalar(big, CutoffFunction::flat(big, r));
        EXPECT_GE(v, prev);
        prev = v;
    }
    EXPECT_GT(prev, tf::OneFermionBosonSpace::hmu_scalar(big, CutoffFunction::flat(big, 1.0)));
}

TEST_F(HamiltonianTest, MomentumTransfer) {
    const MomentumGrid line(tf::Grid(1, 32, 0.5), 1.0);
    const double dk = line.grid().dual_spacing();
    const auto r = tf::momentum_transfer_demo(line, line.index_of({3, 0, 0}), line.index_of({8, 0, 0}), 0.3 * dk, 0.3 * dk);
    EXPECT_GE(r.overlap, 0.99);
    EXPECT_LE(r.derived_ratio_error(), 0.05);
    // The undamped ratio differs by sqrt 2.
    EXPECT_NEAR(r.bare_ratio / r.derived_ratio, std::sqrt(2.0), 1e-12);
}

TEST(UvScan, DivergenceRates) {
    const MomentumGrid mg(tf::Grid(3, 8, 0.5), 0.2);
    const double r_max = tf::kPi / 0.5;
    const auto scan = tf::uv_divergence_scan(mg, tf::geometric_radii(r_max, 8.0, 12));
    EXPECT_GE(scan.linear2.r2, 0.99);
    EXPECT_GT(scan.linear2.slope, 0.0);
    EXPECT_GE(scan.log3.r2, 0.99);
    EXPECT_LT(scan.increment4, 0.01);
    for (int p : {2, 3, 4}) EXPECT_TRUE(std::is_sorted(scan.values.at(p).begin(), scan.values.at(p).end()));
}

TEST(UvScan, LeastSquaresOnExactLine) {
    const auto fit = tf::least_squares({1, 2, 3, 4}, {3, 5, 7, 9});
    EXPECT_NEAR(fit.slope, 2.0, 1e-13);
    EXPECT_NEAR(fit.intercept, 1.0, 1e-13);
    EXPECT_NEAR(fit.r2, 1.0, 1e-13);
}

TEST(TwoFermion, PairStateShiftOperators) {
    const MomentumGrid mg(tf::Grid(1, 8, 0.5), 0.7);
    std::mt19937_64 rng(5);
    const tf::Field s0 = tf::testing::random_field(mg.grid(), rng, 0.4);
    const CVec w1 = tf::testing::random_cvec(8, rng), w2 = tf::testing::random_cvec(8, rng);
    const auto r = tf::two_fermion_check(mg, s0, w1, w2);
    EXPECT_LE(r.pair_residual, 1e-14);
    EXPECT_LE(r.position_residual, 1e-12);
    EXPECT_LE(r.momentum_residual, 1e-10 * r.scale);

    // At zero transfer the two terms cancel.
    const CMat c = tf::w_sym(w1, w2);
    EXPECT_LE(tf::two_fermion_mu(mg, 0, 0, c).norm(), 1e-13);

    // The two-argument transform against a naive DFT on each axis.
    const CMat f2 = tf::fft2_pair(mg.grid(), c);
    CMat t(8, 8), naive(8, 8);
    for (Eigen::Index j = 0; j < 8; ++j) t.col(j) = tf::testing::naive_dft(mg.grid(), CVec(c.col(j)));
    for (Eigen::Index i = 0; i < 8; ++i) naive.row(i) = tf::testing::naive_dft(mg.grid(), CVec(t.row(i).transpose())).transpose();
    EXPECT_LE((f2 - naive).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(TwoFermion, OneElectronMomentumForm) {
    const MomentumGrid mg(tf::Grid(2, 6, 0.5), 0.9);
    std::mt19937_64 rng(9);
    const tf::Field s0 = tf::testing::random_field(mg.grid(), rng, 0.4);
    const CVec w = tf::testing::random_cvec(36, rng);
    EXPECT_LE(tf::smeared_mu_residual(mg, s0, w), 1e-10);
}

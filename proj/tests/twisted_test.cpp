// Copyright 2026 The twistfield Authors
// SPDX-License-Identifier: Apache-2.0

#include "twistfield/twisted.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

namespace tf = twistfield;
using tf::cplx;
using tf::CMat;
using tf::CVec;
using tf::SpMat;
using tf::ScalarTestFunction;

namespace {

ScalarTestFunction scaled(const tf::Grid& g, std::mt19937_64& rng, double amp) {
    auto s = tf::testing::random_test_function(g, rng);
    const double n = std::sqrt(g.cell_volume() * s.smeared().squaredNorm());
    return (amp / n) * s;
}

CVec normalized_wave(const tf::Grid& g, std::mt19937_64& rng) {
    CVec w = tf::testing::random_cvec(static_cast<Eigen::Index>(g.size()), rng);
    return w / std::sqrt(g.cell_volume() * w.squaredNorm());
}

/// Wave function supported on the given sites.
CVec local_wave(const tf::Grid& g, const std::vector<std::size_t>& sites) {
    CVec w = CVec::Zero(static_cast<Eigen::Index>(g.size()));
    for (std::size_t k = 0; k < sites.size(); ++k) w[static_cast<Eigen::Index>(sites[k])] = cplx(1.0 + 0.3 * k, -0.2 * k);
    return w / std::sqrt(g.cell_volume() * w.squaredNorm());
}

class TwistedTest : public ::testing::Test {
protected:
    void SetUp() override {
        s = scaled(g, rng, 0.6);
        t = scaled(g, rng, 0.5);
        w = normalized_wave(g, rng);
    }

    tf::TwistedSystem system(const tf::TwistKernel& sigma, std::vector<ScalarTestFunction> fs, int n_max = 8,
                             std::optional<tf::DiffOp> p = std::nullopt) const {
        return {tf::FermionFockSpace(h, 3), tf::BosonSector::from_test_functions(g, fs, n_max), sigma, p};
    }
    tf::TwistKernel yukawa() const { return tf::TwistKernel::yukawa(g, 1.3); }

    tf::Grid g{1, 6, 0.5};
    tf::OneParticleSpace h{g, 1};
    std::mt19937_64 rng{2026};
    ScalarTestFunction s, t;
    CVec w;
};

} // namespace

TEST_F(TwistedTest, WeylRelation) {
    const auto sys = system(yukawa(), {s, t});
    EXPECT_LE(sys.verify_twisted_weyl_relation(s, w), 1e-12);
    EXPECT_LE(sys.verify_twisted_weyl_relation(t, w), 1e-12);
}

TEST_F(TwistedTest, InfinitesimalRelations) {
    const auto sys = system(yukawa(), {s, t});
    EXPECT_LE(sys.verify_infinitesimal(s, w), 1e-12);
    std::mt19937_64 r(7);
    const CVec v = tf::testing::random_cvec(static_cast<Eigen::Index>(h.modes()), r);
    EXPECT_LE(sys.verify_infinitesimal_selfdual(s, v), 1e-12);
    EXPECT_LE(sys.verify_one_electron_action(s, w), 1e-12);
}

TEST_F(TwistedTest, FieldCommutatorAndConservation) {
    const auto sys = system(yukawa(), {s, t});
    EXPECT_LE(sys.verify_field_commutator(s, t), 1e-12);
    EXPECT_LE(sys.verify_conservation(s), 1e-12);
}

TEST_F(TwistedTest, CocycleAndInverse) {
    const auto sys = system(yukawa(), {s, t});
    EXPECT_LE(sys.verify_cocycle(s, t, 12), 1e-12);
    EXPECT_LE(sys.verify_cocycle(t, s, 12), 1e-12);
    EXPECT_LE(sys.verify_weyl_inverse(s), 1e-12);
}

TEST_F(TwistedTest, ExponentialOfTwistedField) {
    const auto sys = system(yukawa(), {s, t});
    std::vector<Eigen::Index> blocks;
    for (Eigen::Index i = 0; i < sys.fermion_dim(); i += 7) blocks.push_back(i);
    EXPECT_LE(sys.verify_exponential(s, blocks), 1e-11);
}

TEST_F(TwistedTest, SectorShift) {
    const auto sys = system(yukawa(), {s});
    for (int q : {-1, 0, 1, 2}) EXPECT_LE(sys.verify_sector_shift(s, w, q), 1e-12) << q;
}

TEST_F(TwistedTest, TwistedAnnihilatorKillsVacuum) {
    const auto sys = system(yukawa(), {s});
    EXPECT_LE(sys.verify_annihilates_vacuum(s), 1e-13);
}

TEST_F(TwistedTest, ChargedStateTwoRoutes) {
    const auto sys = system(yukawa(), {s, t});
    std::mt19937_64 r(3);
    const CVec w2 = normalized_wave(g, r), w3 = normalized_wave(g, r);
    const tf::ChargedVector mixed(h, {h.electron(w), h.electron(w2), h.positron(w3)});
    EXPECT_EQ(mixed.charge(), -1);
    for (const auto& om : {tf::ChargedVector::electron(h, w), mixed}) {
        const auto v = sys.charged_state_eval(om, s);
        EXPECT_LE(v.difference(), 1e-11);
        EXPECT_LT(std::abs(v.matrix - sys.reference_value(s)), 1.0);
    }
    EXPECT_THROW(tf::ChargedVector(h, {CVec(h.electron(w) + h.positron(w2))}), tf::Error);
}

TEST_F(TwistedTest, StateDiffersFromVacuumValue) {
    const auto sys = system(yukawa(), {s});
    const auto v = sys.charged_state_eval(tf::ChargedVector::electron(h, w), s);
    EXPECT_GT(std::abs(v.matrix - sys.reference_value(s)), 1e-3);
}

TEST_F(TwistedTest, NPointMatchesPartitionSum) {
    std::vector<ScalarTestFunction> ss{s, t, scaled(g, rng, 0.4), scaled(g, rng, 0.3)};
    const auto sys = system(yukawa(), ss, 6);
    const auto om = tf::ChargedVector::electron(h, w);
    for (std::size_t m = 1; m <= ss.size(); ++m) {
        const std::vector<ScalarTestFunction> sub(ss.begin(), ss.begin() + static_cast<long>(m));
        EXPECT_LE(std::abs(sys.npoint(om, sub) - tf::npoint_oracle(sys, om, sub)), 1e-12) << m;
    }
}

TEST_F(TwistedTest, ExternalPotentialGap) {
    const auto om = tf::ChargedVector::electron(h, w);
    EXPECT_GT(tf::external_potential_gap(system(yukawa(), {s}), om, s, t), 1e-4);
    EXPECT_LE(tf::external_potential_gap(system(tf::TwistKernel::constant(g), {s}), om, s, t), 1e-13);
}

TEST_F(TwistedTest, GaugeGenerator) {
    const auto p = tf::DiffOp::helmholtz(1.1);
    const auto sigma = tf::fundamental_solution(p, g, tf::ZeroMode::Strict);
    const ScalarTestFunction ps = tf::apply_diffop(p, g, s);
    const auto sys = system(sigma, {s, ps}, 6, p);
    EXPECT_LE(sys.verify_gauge_commutator(s, w), 1e-12);
    EXPECT_LE(sys.verify_gauge_exponentiated(s, w), 1e-11);
    EXPECT_THROW(system(yukawa(), {s, ps}, 6, p), tf::Error);
}

TEST_F(TwistedTest, GaugeDetectsChargeAndLocality) {
    const auto p = tf::DiffOp::neg_laplacian();
    const auto sigma = tf::fundamental_solution(p, g, tf::ZeroMode::MeanZero);
    const CVec wl = local_wave(g, {1, 2});
    // s0 = 1 on the support of wl: [rho(s), psi(wl)] = -psi(wl).
    const ScalarTestFunction one{tf::smooth_field_with_values(g, {{1, 1.0}, {2, 1.0}}), tf::Field::Zero(6)};
    // s0 vanishing on the support: relative locality.
    const ScalarTestFunction far{tf::smooth_field_with_values(g, {{1, 0.0}, {2, 0.0}, {4, 1.0}}), tf::Field::Zero(6)};
    const auto sys = system(sigma, {tf::apply_diffop(p, g, one), tf::apply_diffop(p, g, far)}, 4, p);
    const auto comm = tf::commutator(sys.gauge_generator(one), sys.psi(wl)) + sys.psi(wl);
    EXPECT_LE(comm.norm({}, sys.safe_fermion()), 1e-12);
    EXPECT_LE(sys.gauge_commutator_norm(far, wl), 1e-12);
    EXPECT_GT(sys.gauge_commutator_norm(one, wl), 1.0);
}

TEST_F(TwistedTest, LocalizationOfDeltaAndConstantKernels) {
    const CVec wl = local_wave(g, {0});
    ScalarTestFunction away = tf::ScalarTestFunction::zero(g);
    away.s0[3] = 0.7;
    away.s1[4] = -0.4;
    for (const auto& [sigma, local] : {std::pair{tf::TwistKernel::delta(g), true}, std::pair{tf::TwistKernel::constant(g), false}}) {
        const auto sys = system(sigma, {away}, 4);
        const double c = tf::commutator(sys.twisted_weyl(away), sys.psi(wl)).norm({}, sys.safe_fermion());
        if (local)
            EXPECT_LE(c, 1e-12);
        else
            EXPECT_GT(c, 1e-2);
    }
}

TEST_F(TwistedTest, LebesgueModel) {
    const auto sys = system(tf::TwistKernel::constant(g), {s}, 6);
    const auto r = tf::model_lebesgue_check(sys, s, w);
    EXPECT_EQ(r.sign, +1);
    EXPECT_LE(r.field_residual, 1e-12);
    EXPECT_LE(r.q0_residual, 1e-12);
    EXPECT_LE(r.sector_residual, 1e-12);
    EXPECT_LE(r.commutator_residual, 1e-12);
    EXPECT_LE(r.intertwiner_residual, 1e-12);
}

TEST_F(TwistedTest, YukawaStateQuadrature) {
    const auto sys = system(yukawa(), {s});
    const auto v = tf::model_charged_state_quadrature(sys, w, s);
    EXPECT_LE(v.difference(), 1e-11);
    EXPECT_LE(tf::testing::sup_norm(tf::direct_convolution(sys.sigma(), s.s0) - sys.twist_phase(s)), 1e-12);
}

TEST(TwistedTranslation, Covariance) {
    const tf::Grid g(1, 6, 0.5);
    const tf::OneParticleSpace h(g, 1);
    const tf::BosonSector b(g, tf::fourier_generators(g, {1, 2, 5}), 4);
    const tf::TwistedSystem sys(tf::FermionFockSpace(h, 2), b, tf::TwistKernel::yukawa(g, 0.9));
    const CVec c = CVec::Constant(3, cplx(0.2, -0.1));
    const CVec f = b.basis().synthesize(c);
    const ScalarTestFunction s{f.real(), f.imag()};
    for (int a : {1, 2, 5}) EXPECT_LE(sys.verify_translation(s, {a, 0, 0}), 1e-12) << a;
}

TEST_F(TwistedTest, LocalizationReports) {
    const auto om = tf::ChargedVector::electron(h, local_wave(g, {0}));
    ScalarTestFunction away = tf::ScalarTestFunction::zero(g);
    away.s0[3] = 0.7;
    away.s1[4] = -0.4;
    const auto delta = tf::localization_report(system(tf::TwistKernel::delta(g), {away}, 6), om, away, 1e-14);
    EXPECT_TRUE(delta.premise);
    EXPECT_LE(delta.difference, 1e-12);
    const auto flat = tf::localization_report(system(tf::TwistKernel::constant(g), {away}, 6), om, away, 1e-14);
    EXPECT_FALSE(flat.premise);
    EXPECT_GT(flat.difference, 1e-3);

    const auto p = tf::DiffOp::helmholtz(1.0);
    const auto sigma = tf::fundamental_solution(p, g, tf::ZeroMode::Strict);
    const auto sys = system(sigma, {tf::apply_diffop(p, g, away)}, 6, p);
    const auto rp = tf::localization_report_p(sys, om, away, 1e-14);
    EXPECT_TRUE(rp.premise);
    EXPECT_LE(rp.difference, 1e-11);
    // The plain statement fails its premise: the kernel has full support.
    EXPECT_FALSE(tf::localization_report(sys, om, tf::apply_diffop(p, g, away), 1e-14).premise);
}

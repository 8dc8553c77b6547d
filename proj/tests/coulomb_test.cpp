// Copyright 2026 The twistfield Authors
// SPDX-License-Identifier: Apache-2.0

#include "twistfield/coulomb.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <sstream>

namespace tf = twistfield;
using tf::cplx;
using tf::CVec;
using tf::Field;
using tf::VectorField;
using tf::VectorTestFunction;

namespace {

VectorField random_vector_field(const tf::Grid& g, std::mt19937_64& rng, double scale = 1.0) {
    VectorField f(static_cast<Eigen::Index>(g.size()), g.dim);
    for (int a = 0; a < g.dim; ++a) f.col(a) = tf::testing::random_field(g, rng, scale);
    return f;
}

/// P_tr by a dense real-space kernel assembled from a naive inverse DFT of
/// the projector symbol.
VectorField naive_projector(const tf::Grid& g, const VectorField& f) {
    const std::size_t n = g.size();
    const double dv = g.cell_volume();
    VectorField out = VectorField::Zero(f.rows(), f.cols());
    for (std::size_t x = 0; x < n; ++x)
        for (std::size_t y = 0; y < n; ++y) {
            const auto cx = g.coords(x), cy = g.coords(y);
            for (int i = 0; i < g.dim; ++i)
                for (int j = 0; j < g.dim; ++j) {
                    cplx kern = 0.0;
                    for (std::size_t k = 0; k < n; ++k) {
                        const auto kv = g.derivative_wavevector(k);
                        const auto fr = g.frequencies(k);
                        double k2 = 0.0;
                        for (int a = 0; a < g.dim; ++a) k2 += kv[a] * kv[a];
                        double sym = i == j ? 1.0 : 0.0;
                        if (k2 > 0.0) sym -= kv[i] * kv[j] / k2;
                        double ph = 0.0;
                        for (int a = 0; a < g.dim; ++a) ph += 2.0 * tf::kPi * fr[a] * (cx[a] - cy[a]) / g.n;
                        kern += sym * std::polar(1.0, ph);
                    }
                    kern /= static_cast<double>(n) * dv;
                    out(static_cast<Eigen::Index>(x), i) += dv * kern.real() * f(static_cast<Eigen::Index>(y), j);
                }
        }
    return out;
}

class CoulombTest : public ::testing::Test {
protected:
    void SetUp() override {
        s0 = tf::smooth_projection(g, tf::testing::random_field(g, rng, 0.3));
        f = 0.3 * random_vector_field(g, rng);
        h = 0.3 * random_vector_field(g, rng);
        w = tf::testing::random_cvec(static_cast<Eigen::Index>(g.size()), rng);
        w /= std::sqrt(g.cell_volume() * w.squaredNorm());
    }

    tf::CoulombSystem system(const std::vector<tf::ScalarTestFunction>& sc, const std::vector<VectorTestFunction>& vs, int n_max = 4) const {
        return {tf::FermionFockSpace(hp, 2), sc, vs, n_max, sigma};
    }
    tf::ScalarTestFunction scalar(const Field& x) const { return {x, Field::Zero(x.size())}; }
    VectorField zero() const { return VectorField::Zero(static_cast<Eigen::Index>(g.size()), g.dim); }

    tf::Grid g{2, 4, 0.5};
    tf::OneParticleSpace hp{g, 1};
    tf::TwistKernel sigma = tf::fundamental_solution(tf::DiffOp::neg_laplacian(), g, tf::ZeroMode::MeanZero);
    std::mt19937_64 rng{31};
    Field s0;
    VectorField f, h;
    CVec w;
};

} // namespace

TEST_F(CoulombTest, ProjectorProperties) {
    EXPECT_LE(tf::transverse_projector(g, tf::gradient(g, s0)).cwiseAbs().maxCoeff(), 1e-12);
    const VectorField pf = tf::transverse_projector(g, f);
    EXPECT_LE((tf::transverse_projector(g, pf) - pf).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE(tf::divergence(g, pf).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(tf::vector_dot(g, pf, h), tf::vector_dot(g, f, tf::transverse_projector(g, h)), 1e-12);
    EXPECT_LE((pf - naive_projector(g, f)).cwiseAbs().maxCoeff(), 1e-12);
    // Constant fields pass through.
    const VectorField c = VectorField::Constant(static_cast<Eigen::Index>(g.size()), 2, 0.7);
    EXPECT_LE((tf::transverse_projector(g, c) - c).cwiseAbs().maxCoeff(), 1e-12);
    const tf::Grid line(1, 8, 0.5);
    EXPECT_THROW(tf::transverse_projector(line, VectorField::Zero(8, 1)), tf::Error);
}

TEST_F(CoulombTest, SymplecticForm) {
    const VectorTestFunction a{f, h}, b{h, 0.5 * f};
    const double naive = tf::vector_dot(g, a.f1, naive_projector(g, b.f0)) - tf::vector_dot(g, b.f1, naive_projector(g, a.f0));
    EXPECT_NEAR(tf::eta_tr(g, a, b), naive, 1e-13);
    EXPECT_NEAR(tf::eta_tr(g, a, b), -tf::eta_tr(g, b, a), 1e-13);
    EXPECT_NEAR(tf::eta_tr(g, a, a), 0.0, 1e-14);
    const VectorTestFunction grad{tf::gradient(g, s0), zero()};
    EXPECT_NEAR(tf::eta_tr(g, a, a + grad), tf::eta_tr(g, a, a), 1e-12);
}

TEST_F(CoulombTest, TransverseSectorIsDivergenceFree) {
    const tf::TransverseSector t(g, {{f, zero()}, {h, zero()}}, 4);
    EXPECT_EQ(t.basis().size(), 2);
    EXPECT_LE(t.max_divergence(), 1e-12);
    EXPECT_LE(tf::frobenius(t.a_field(tf::gradient(g, s0))), 1e-12);
    std::ostringstream csv;
    tf::write_transverse_basis_csv(csv, t);
    EXPECT_NE(csv.str().find("mode,site,component"), std::string::npos);
}

TEST_F(CoulombTest, VectorPotentialCommutators) {
    const auto sys = system({scalar(s0)}, {{f, zero()}, {h, zero()}});
    EXPECT_LE(sys.verify_a_ccr(f, h), 1e-12);
    EXPECT_LE(sys.verify_a_ccr(h, h), 1e-12);
    EXPECT_LE(sys.coulomb_condition(s0), 1e-12);
    EXPECT_LE(sys.verify_factor_independence(scalar(s0), {f, h}), 1e-13);
}

TEST_F(CoulombTest, WeylRelations) {
    const auto sys = system({scalar(tf::divergence(g, f)), scalar(tf::laplacian(g, s0))}, {{f, zero()}});
    EXPECT_LE(sys.verify_psi_transverse(w, {f, zero()}), 1e-13);
    EXPECT_LE(sys.verify_v_relation(f, w), 1e-12);
    EXPECT_LE(sys.verify_v_gauge(s0, w), 1e-11);
}

TEST_F(CoulombTest, ElectricFieldAndChargeDensity) {
    const auto sys = system({scalar(tf::divergence(g, f)), scalar(tf::laplacian(g, s0))}, {{f, zero()}, {h, zero()}});
    EXPECT_LE(sys.verify_e_commutator(f, w), 1e-12);
    EXPECT_LE(sys.verify_div_e_form(s0), 1e-11);
    EXPECT_LE(sys.verify_div_e_commutator(s0, w), 1e-11);
    EXPECT_LE(sys.verify_div_e_exponentiated(s0, w), 1e-10);
    EXPECT_LE(sys.verify_div_e_a(s0, h), 1e-12);
}

TEST_F(CoulombTest, ChargeDetectionAndRelativeLocality) {
    const std::size_t a = g.index({0, 0, 0}), b = g.index({1, 0, 0});
    CVec wl = CVec::Zero(static_cast<Eigen::Index>(g.size()));
    wl[static_cast<Eigen::Index>(a)] = cplx(1.0, 0.2);
    wl[static_cast<Eigen::Index>(b)] = cplx(-0.4, 0.5);
    wl /= std::sqrt(g.cell_volume() * wl.squaredNorm());

    const Field bump = tf::smooth_field_with_values(g, {{a, 1.0}, {b, 1.0}});
    const Field far = tf::smooth_field_with_values(g, {{a, 0.0}, {b, 0.0}, {g.index({2, 2, 0}), 1.0}});
    // A vector test function supported away from wl.
    VectorField fa = zero();
    fa(static_cast<Eigen::Index>(g.index({2, 2, 0})), 0) = 1.0;
    fa(static_cast<Eigen::Index>(g.index({2, 3, 0})), 1) = -0.6;

    const auto sys = system({scalar(tf::laplacian(g, bump)), scalar(tf::laplacian(g, far)), scalar(tf::divergence(g, fa))}, {{fa, zero()}});
    const auto detect = tf::commutator(sys.div_e(bump), sys.psi(wl)) + sys.psi(wl);
    EXPECT_LE(detect.norm({}, sys.safe_fermion()), 1e-11);
    EXPECT_LE(sys.div_e_commutator_norm(far, wl), 1e-11);
    EXPECT_GT(sys.e_commutator_norm(fa, wl), 1e-3);
}

// Copyright 2026 The twistfield Authors
// SPDX-License-Identifier: Apache-2.0

#include "twistfield/boson.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

namespace tf = twistfield;
using tf::cplx;
using tf::CMat;
using tf::CVec;
using tf::SpMat;

namespace {

/// Random test function rescaled to |s0 + i s1| = amp.
tf::ScalarTestFunction scaled(const tf::Grid& g, std::mt19937_64& rng, double amp) {
    auto s = tf::testing::random_test_function(g, rng);
    const double n = std::sqrt(g.cell_volume() * s.smeared().squaredNorm());
    return (amp / n) * s;
}

class BosonTest : public ::testing::Test {
protected:
    void SetUp() override {
        for (int i = 0; i < 3; ++i) fs.push_back(scaled(g, rng, 0.5));
    }
    tf::BosonSector sector() const { return tf::BosonSector::from_test_functions(g, fs, 8); }

    tf::Grid g{1, 16, 0.5};
    std::mt19937_64 rng{99};
    std::vector<tf::ScalarTestFunction> fs;
};

SpMat comm(const SpMat& a, const SpMat& b) { return SpMat(a * b - b * a); }

double block_norm(const SpMat& m, const tf::Mask& rows_cols) {
    return tf::frobenius(tf::restrict_sparse(m, rows_cols, rows_cols));
}

} // namespace

TEST_F(BosonTest, ModeBasisIsOrthonormal) {
    const auto b = sector();
    EXPECT_EQ(b.basis().size(), 3);
    EXPECT_LE((b.basis().gram() - CMat::Identity(3, 3)).norm(), 1e-12);
    for (const auto& s : fs) EXPECT_LE(b.basis().residual(s.smeared()), 1e-12);
    EXPECT_THROW(b.coefficients(tf::testing::random_test_function(g, rng)), tf::Error);
}

TEST_F(BosonTest, DependentGeneratorsAreDropped) {
    auto more = fs;
    more.push_back(0.5 * fs[0] + (-2.0) * fs[1]);
    EXPECT_EQ(tf::BosonSector::from_test_functions(g, more, 4).basis().size(), 3);
}

TEST(BosonFock, DimensionAndPrefix) {
    const tf::BosonFockSpace small(3, 8), big(3, 12);
    EXPECT_EQ(small.dim(), 165);
    for (Eigen::Index i = 0; i < small.dim(); ++i) EXPECT_EQ(small.state(i), big.state(i));
    for (Eigen::Index i = 1; i < big.dim(); ++i) EXPECT_LE(big.shell(i - 1), big.shell(i));
}

TEST(BosonFock, LadderFactors) {
    const tf::BosonFockSpace f(3, 8);
    const CVec st = f.mode_create(0) * (f.mode_create(0) * f.vacuum());
    const Eigen::Index i2 = f.index_of({2, 0, 0});
    EXPECT_NEAR(std::abs(st[i2] - std::sqrt(2.0)), 0.0, 1e-15);
    EXPECT_NEAR(st.norm(), std::sqrt(2.0), 1e-15);
    EXPECT_LE((f.annihilate(CVec::Ones(3)) * f.vacuum()).norm(), 1e-15);
}

TEST_F(BosonTest, CcrOnInteriorShells) {
    const auto b = sector();
    const auto& fk = b.fock();
    const auto interior = fk.shell_at_most(7);
    std::mt19937_64 r(5);
    const CVec c1 = tf::testing::random_cvec(3, r), c2 = tf::testing::random_cvec(3, r);
    SpMat ccr = comm(fk.annihilate(c1), fk.create(c2));
    ccr -= c1.dot(c2) * tf::sparse_identity(fk.dim());
    EXPECT_LE(block_norm(ccr, interior), 1e-13);
    EXPECT_LE(tf::frobenius(comm(fk.annihilate(c1), fk.annihilate(c2))), 1e-13);
    const SpMat bb = fk.create(c1) * fk.annihilate(c1);
    EXPECT_LE(tf::frobenius(comm(fk.number_operator(), bb)), 1e-13);
}

TEST_F(BosonTest, SegalCommutatorIsMinusIEta) {
    const auto b = sector();
    const auto interior = b.fock().shell_at_most(7);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            SpMat c = comm(b.segal(fs[i]), b.segal(fs[j]));
            c += tf::kI * tf::symplectic_form(fs[i], fs[j], g) * tf::sparse_identity(b.fock().dim());
            EXPECT_LE(block_norm(c, interior), 1e-12);
        }
    EXPECT_LE(tf::frobenius(b.segal(tf::ScalarTestFunction::zero(g))), 1e-15);
}

TEST_F(BosonTest, TwoPointFunction) {
    const auto b = sector();
    const CVec om = b.fock().vacuum();
    for (const auto& s : fs) {
        const SpMat p = b.segal(s);
        const cplx v = om.dot(p * (p * om));
        EXPECT_NEAR(std::abs(v - 0.5 * g.cell_volume() * s.smeared().squaredNorm()), 0.0, 1e-12);
    }
}

TEST_F(BosonTest, WeylBasics) {
    const auto b = sector();
    EXPECT_LE((b.weyl(tf::ScalarTestFunction::zero(g)) - CMat::Identity(165, 165)).norm(), 1e-13);
    const CMat w = b.weyl(fs[0]);
    EXPECT_LE(tf::unitary_defect(w), 1e-12);
    EXPECT_NEAR(std::abs(w(0, 0) - b.fock_functional(fs[0])), 0.0, 1e-12);
}

TEST(BosonOracle, DisplacementColumn) {
    // exp(i phi) Omega for one mode is the coherent state with alpha = i c / sqrt(2).
    const tf::BosonFockSpace f(1, 30);
    const cplx c(0.3, -0.4);
    const cplx alpha = tf::kI * c / std::sqrt(2.0);
    const CVec col = f.weyl_columns(CVec::Constant(1, c), 10, 0).col(0);
    double fact = 1.0;
    for (int n = 0; n <= 30; ++n) {
        if (n > 0) fact *= n;
        const cplx expect = std::exp(-0.5 * std::norm(alpha)) * std::pow(alpha, n) / std::sqrt(fact);
        EXPECT_NEAR(std::abs(col[n] - expect), 0.0, 1e-15) << n;
    }
}

TEST(BosonOracle, WeylColumnsMatchSparseExponential) {
    const tf::BosonFockSpace f(3, 6);
    const tf::BosonFockSpace ext(3, 20);
    std::mt19937_64 r(11);
    const CVec c = tf::testing::random_cvec(3, r, 0.2);
    const CMat cols = f.weyl_columns(c, 14, 4);
    const CMat ref = tf::expi_action(ext.segal(c), CMat::Identity(ext.dim(), f.shell_dim(4)));
    EXPECT_LE((cols - ref).norm(), 1e-13);
}

TEST_F(BosonTest, CocycleWithGuardBand) {
    const auto b = sector();
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            const double r = tf::weyl_cocycle_residual(b.fock(), b.coefficients(fs[i]), b.coefficients(fs[j]), 12, 6);
            EXPECT_LE(r, 1e-12) << i << "," << j;
        }
}

TEST_F(BosonTest, UnguardedTruncationDecreases) {
    // Plain truncated exponentials only satisfy the cocycle on low shells.
    std::vector<double> res;
    for (int nmax : {8, 10, 12}) {
        const auto b = tf::BosonSector::from_test_functions(g, fs, nmax);
        res.push_back(tf::weyl_cocycle_residual_unguarded(b.fock(), b.coefficients(fs[0]), b.coefficients(fs[1]), 3));
    }
    EXPECT_GT(res[0], res[1]);
    EXPECT_GT(res[1], res[2]);
    EXPECT_LE(res[2], 1e-12);
}

TEST_F(BosonTest, CharacteristicFunctionalConverges) {
    const auto s = fs[1];
    double prev = 1.0;
    for (int nmax : {2, 4, 6, 8}) {
        const auto b = tf::BosonSector::from_test_functions(g, fs, nmax);
        const double err = std::abs(b.weyl(s)(0, 0) - b.fock_functional(s));
        EXPECT_LT(err, prev);
        prev = err;
    }
    EXPECT_LE(prev, 1e-12);
}

TEST(BosonTranslation, FourierModesAreShiftClosed) {
    const tf::Grid g(1, 8, 0.5);
    const tf::BosonSector b(g, tf::fourier_generators(g, {1, 2, 7}), 4);
    const CMat t = b.translation({3, 0, 0});
    EXPECT_LE(tf::unitary_defect(t), 1e-12);
    const CVec c = CVec::Constant(3, cplx(0.2, 0.1));
    const CVec f = b.basis().synthesize(c);
    const CVec fa = tf::translate(g, f, tf::Shift{3, 0, 0});
    const CMat lhs = t * CMat(b.fock().segal(c)) * t.adjoint();
    EXPECT_LE((lhs - CMat(b.fock().segal(b.basis().coefficients(fa)))).norm(), 1e-12);

    std::mt19937_64 rng(1);
    const tf::BosonSector local(g, {tf::testing::random_cvec(8, rng)}, 4);
    EXPECT_THROW(local.translation({1, 0, 0}), tf::Error);
}

// Copyright 2026 The twistfield Authors
// SPDX-License-Identifier: Apache-2.0

#include "twistfield/kron.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

namespace tf = twistfield;
using tf::CMat;
using tf::CVec;
using tf::SpMat;

namespace {

CMat random_mat(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng) {
    CMat m(r, c);
    for (Eigen::Index j = 0; j < c; ++j) m.col(j) = tf::testing::random_cvec(r, rng);
    return m;
}

SpMat random_sparse(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng) {
    CMat m = random_mat(r, c, rng);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j)
            if ((i + 2 * j) % 3 == 0) m(i, j) = 0.0;
    return m.sparseView();
}

/// Kronecker product by definition.
CMat kron(const CMat& a, const CMat& b) {
    CMat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

tf::KronOperator random_op(Eigen::Index fr, Eigen::Index fc, Eigen::Index br, Eigen::Index bc, int terms, std::mt19937_64& rng,
                           CMat& ref) {
    tf::KronOperator op;
    ref = CMat::Zero(fr * br, fc * bc);
    for (int t = 0; t < terms; ++t) {
        const SpMat f = random_sparse(fr, fc, rng);
        const CMat b = random_mat(br, bc, rng);
        op.add(f, b);
        ref += kron(CMat(f), b);
    }
    return op;
}

} // namespace

TEST(Kron, DenseApplyAndProduct) {
    std::mt19937_64 rng(4);
    CMat ra, rb;
    const auto a = random_op(5, 4, 3, 2, 3, rng, ra);
    const auto b = random_op(4, 6, 2, 3, 2, rng, rb);
    EXPECT_LE((a.dense() - ra).norm(), 1e-12);
    EXPECT_LE(((a * b).dense() - ra * rb).norm(), 1e-11);
    EXPECT_LE((a.adjoint().dense() - ra.adjoint()).norm(), 1e-12);
    const CMat psi = random_mat(4, 2, rng);
    const CMat out = a.apply(psi);
    const CVec flat = ra * Eigen::Map<const CVec>(CMat(psi.transpose()).data(), 8);
    EXPECT_LE((Eigen::Map<const CVec>(CMat(out.transpose()).data(), 15) - flat).norm(), 1e-12);
}

TEST(Kron, MaskedNormResolvesCancellation) {
    std::mt19937_64 rng(8);
    CMat r;
    const auto a = random_op(6, 6, 4, 4, 4, rng, r);
    EXPECT_NEAR(a.norm(), r.norm(), 1e-11);
    tf::Mask fr{1, 0, 1, 1, 0, 1}, bc{0, 1, 1, 0};
    CMat masked = r;
    for (Eigen::Index i = 0; i < 6; ++i)
        for (Eigen::Index p = 0; p < 4; ++p) {
            if (!fr[static_cast<std::size_t>(i)]) masked.row(i * 4 + p).setZero();
            if (!bc[static_cast<std::size_t>(p)]) masked.col(i * 4 + p).setZero();
        }
    EXPECT_NEAR(a.norm(fr, {}, {}, bc), masked.norm(), 1e-11);
    // a - a written with reordered and rescaled terms is exactly zero.
    tf::KronOperator b;
    for (auto it = a.terms().rbegin(); it != a.terms().rend(); ++it) b.add(SpMat(2.0 * it->f), 0.5 * it->b);
    EXPECT_LE((a - b).norm(), 1e-14 * a.norm());
}

TEST(Kron, CompressedIsEquivalent) {
    std::mt19937_64 rng(15);
    CMat r;
    auto a = random_op(5, 5, 2, 2, 9, rng, r);
    const auto c = a.compressed();
    EXPECT_LE(c.terms().size(), 4u);
    EXPECT_LE((c.dense() - r).norm(), 1e-11);
}

TEST(Kron, Expectation) {
    std::mt19937_64 rng(23);
    CMat r;
    const auto a = random_op(3, 3, 4, 4, 2, rng, r);
    const CMat psi = random_mat(3, 4, rng);
    const CVec flat = Eigen::Map<const CVec>(CMat(psi.transpose()).data(), 12);
    EXPECT_LE(std::abs(tf::expectation(a, psi) - flat.dot(r * flat)), 1e-11);
}

// Copyright 2026 The twistfield Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file linalg.hpp
 * @brief Matrix exponentials of Hermitian generators and small sparse/dense
 *        helpers used across the operator code.
 */

#pragma once

#include "twistfield/core.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace twistfield {

inline SpMat sparse_identity(Eigen::Index n) {
    SpMat m(n, n);
    m.setIdentity();
    return m;
}

inline SpMat sparse_diagonal(const CVec& d) {
    std::vector<Eigen::Triplet<cplx>> t;
    t.reserve(static_cast<std::size_t>(d.size()));
    for (Eigen::Index i = 0; i < d.size(); ++i)
        if (d[i] != cplx(0.0)) t.emplace_back(i, i, d[i]);
    SpMat m(d.size(), d.size());
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

inline double frobenius(const SpMat& m) {
    double acc = 0.0;
    for (Eigen::Index k = 0; k < m.outerSize(); ++k)
        for (SpMat::InnerIterator it(m, k); it; ++it) acc += std::norm(it.value());
    return std::sqrt(acc);
}

/// Copy of m with entries outside the selected rows/columns dropped.
inline SpMat restrict_sparse(const SpMat& m, const Mask& rows, const Mask& cols) {
    if (rows.empty() && cols.empty()) return m;
    std::vector<Eigen::Triplet<cplx>> t;
    t.reserve(static_cast<std::size_t>(m.nonZeros()));
    for (Eigen::Index k = 0; k < m.outerSize(); ++k)
        for (SpMat::InnerIterator it(m, k); it; ++it)
            if (selected(rows, it.row()) && selected(cols, it.col())) t.emplace_back(it.row(), it.col(), it.value());
    SpMat out(m.rows(), m.cols());
    out.setFromTriplets(t.begin(), t.end());
    return out;
}

inline CMat restrict_dense(const CMat& m, const Mask& rows, const Mask& cols) {
    CMat out = m;
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        if (!selected(rows, r)) out.row(r).setZero();
    for (Eigen::Index c = 0; c < m.cols(); ++c)
        if (!selected(cols, c)) out.col(c).setZero();
    return out;
}

inline double hermitian_defect(const CMat& h) { return (h - h.adjoint()).norm(); }
inline double hermitian_defect(const SpMat& h) { return frobenius(SpMat(h - SpMat(h.adjoint()))); }

inline double unitary_defect(const CMat& u) {
    return (u.adjoint() * u - CMat::Identity(u.cols(), u.cols())).norm();
}

/// exp(i H) for Hermitian H by spectral decomposition.
inline CMat expi_hermitian(const CMat& h) {
    require(h.rows() == h.cols(), ErrorKind::DimensionMismatch, "generator must be square");
    const double scale = std::max(1.0, h.norm());
    require(hermitian_defect(h) <= 1e-10 * scale, ErrorKind::NotSelfAdjoint, "generator is not Hermitian");
    const CMat sym = 0.5 * (h + h.adjoint());
    Eigen::SelfAdjointEigenSolver<CMat> es(sym);
    const CVec phases = (kI * es.eigenvalues().cast<cplx>()).array().exp();
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

/// exp(i H) V for sparse Hermitian H, by Taylor series over substeps of
/// norm at most one.
inline CMat expi_action(const SpMat& h, const CMat& v) {
    require(h.rows() == h.cols() && h.cols() == v.rows(), ErrorKind::DimensionMismatch, "expi_action shapes");
    double norm1 = 0.0;
    for (Eigen::Index k = 0; k < h.outerSize(); ++k) {
        double col = 0.0;
        for (SpMat::InnerIterator it(h, k); it; ++it) col += std::abs(it.value());
        norm1 = std::max(norm1, col);
    }
    const int steps = std::max(1, static_cast<int>(std::ceil(norm1)));
    const cplx step = kI / static_cast<double>(steps);
    CMat out = v;
    for (int s = 0; s < steps; ++s) {
        CMat term = out;
        CMat acc = out;
        for (int j = 1; j < 60; ++j) {
            term = (step / static_cast<double>(j)) * (h * term);
            acc += term;
            if (term.norm() <= 1e-18 * acc.norm()) break;
        }
        out = acc;
    }
    return out;
}

} // namespace twistfield

// Copyright 2026 The twistfield Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file kron.hpp
 * @brief Operators on fermion ⊗ boson spaces as sums of Kronecker products.
 *
 * A composite state is an F x B matrix Psi (fermion index major), and
 * (X ⊗ Y) Psi = X Psi Y^T. Factors may be rectangular as long as every term
 * of one operator has the same shapes.
 */

#pragma once

#include "twistfield/linalg.hpp"

#include <Eigen/QR>

namespace twistfield {

class KronOperator {
public:
    struct Term {
        SpMat f;
        CMat b;
    };

    KronOperator() = default;
    KronOperator(SpMat f, CMat b) { add(std::move(f), std::move(b)); }

    static KronOperator fermion(const SpMat& f, Eigen::Index boson_dim) {
        return {f, CMat::Identity(boson_dim, boson_dim)};
    }
    static KronOperator boson(const CMat& b, Eigen::Index fermion_dim) { return {sparse_identity(fermion_dim), b}; }
    static KronOperator identity(Eigen::Index fermion_dim, Eigen::Index boson_dim) {
        return {sparse_identity(fermion_dim), CMat::Identity(boson_dim, boson_dim)};
    }

    void add(SpMat f, CMat b) {
        if (!terms_.empty()) {
            const Term& t = terms_.front();
            require(f.rows() == t.f.rows() && f.cols() == t.f.cols() && b.rows() == t.b.rows() && b.cols() == t.b.cols(),
                    ErrorKind::DimensionMismatch, "Kronecker term shapes differ");
        }
        terms_.push_back({std::move(f), std::move(b)});
    }

    const std::vector<Term>& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }
    Eigen::Index fermion_rows() const { return terms_.front().f.rows(); }
    Eigen::Index fermion_cols() const { return terms_.front().f.cols(); }
    Eigen::Index boson_rows() const { return terms_.front().b.rows(); }
    Eigen::Index boson_cols() const { return terms_.front().b.cols(); }

    KronOperator adjoint() const {
        KronOperator out;
        for (const Term& t : terms_) out.add(SpMat(t.f.adjoint()), t.b.adjoint());
        return out;
    }

    KronOperator& operator+=(const KronOperator& o) {
        for (const Term& t : o.terms_) add(t.f, t.b);
        return *this;
    }
    KronOperator& operator*=(cplx c) {
        for (Term& t : terms_) t.b *= c;
        return *this;
    }
    friend KronOperator operator+(KronOperator a, const KronOperator& b) { return a += b; }
    friend KronOperator operator-(KronOperator a, const KronOperator& b) {
        for (const Term& t : b.terms_) a.add(t.f, -t.b);
        return a;
    }
    friend KronOperator operator*(cplx c, KronOperator a) { return a *= c; }
    friend KronOperator operator*(double c, KronOperator a) { return a *= cplx(c); }

    friend KronOperator operator*(const KronOperator& a, const KronOperator& b) {
        require(!a.empty() && !b.empty(), ErrorKind::InvalidArgument, "product of empty Kronecker operators");
        require(a.fermion_cols() == b.fermion_rows() && a.boson_cols() == b.boson_rows(), ErrorKind::DimensionMismatch,
                "Kronecker product shapes");
        KronOperator out;
        for (const Term& x : a.terms_)
            for (const Term& y : b.terms_) out.add(SpMat(x.f * y.f), x.b * y.b);
        return out;
    }

    /// Sum_i F_i Psi B_i^T.
    CMat apply(const CMat& psi) const {
        require(!empty(), ErrorKind::InvalidArgument, "apply on empty Kronecker operator");
        require(psi.rows() == fermion_cols() && psi.cols() == boson_cols(), ErrorKind::DimensionMismatch, "state shape");
        CMat out = CMat::Zero(fermion_rows(), boson_rows());
        for (const Term& t : terms_) out.noalias() += CMat(t.f * psi) * t.b.transpose();
        return out;
    }

    /// Frobenius norm of the operator restricted to the selected rows and
    /// columns of each factor. The boson factors are orthonormalized first so
    /// cancellations between terms happen before any norm is taken.
    double norm(const Mask& f_rows = {}, const Mask& f_cols = {}, const Mask& b_rows = {}, const Mask& b_cols = {}) const {
        if (empty()) return 0.0;
        const auto nt = static_cast<Eigen::Index>(terms_.size());
        const Eigen::Index br = boson_rows(), bc = boson_cols();
        CMat flat(br * bc, nt);
        for (Eigen::Index i = 0; i < nt; ++i) {
            const CMat b = restrict_dense(terms_[static_cast<std::size_t>(i)].b, b_rows, b_cols);
            flat.col(i) = Eigen::Map<const CVec>(b.data(), br * bc);
        }
        const Eigen::HouseholderQR<CMat> qr(flat);
        const CMat r = qr.matrixQR().topRows(std::min(br * bc, nt)).triangularView<Eigen::Upper>();
        std::vector<SpMat> fs;
        fs.reserve(terms_.size());
        for (const Term& t : terms_) fs.push_back(restrict_sparse(t.f, f_rows, f_cols));
        double acc = 0.0;
        for (Eigen::Index k = 0; k < r.rows(); ++k) {
            SpMat sum(fermion_rows(), fermion_cols());
            for (Eigen::Index i = 0; i < nt; ++i)
                if (r(k, i) != cplx(0.0)) sum += r(k, i) * fs[static_cast<std::size_t>(i)];
            const double v = frobenius(sum);
            acc += v * v;
        }
        return std::sqrt(acc);
    }

    /// Equivalent operator with at most rank(boson factors) terms.
    KronOperator compressed(double tol = 1e-15) const {
        if (empty()) return *this;
        const auto nt = static_cast<Eigen::Index>(terms_.size());
        const Eigen::Index br = boson_rows(), bc = boson_cols();
        CMat flat(br * bc, nt);
        for (Eigen::Index i = 0; i < nt; ++i) flat.col(i) = Eigen::Map<const CVec>(terms_[static_cast<std::size_t>(i)].b.data(), br * bc);
        Eigen::ColPivHouseholderQR<CMat> qr(flat);
        qr.setThreshold(tol);
        const Eigen::Index rank = std::max<Eigen::Index>(1, qr.rank());
        const CMat q = qr.householderQ() * CMat::Identity(br * bc, rank);
        const CMat rp = CMat(qr.matrixR().topRows(rank).triangularView<Eigen::Upper>()) * qr.colsPermutation().transpose();
        KronOperator out;
        for (Eigen::Index k = 0; k < rank; ++k) {
            SpMat sum(fermion_rows(), fermion_cols());
            for (Eigen::Index i = 0; i < nt; ++i)
                if (rp(k, i) != cplx(0.0)) sum += rp(k, i) * terms_[static_cast<std::size_t>(i)].f;
            out.add(sum, Eigen::Map<const CMat>(q.col(k).data(), br, bc));
        }
        return out;
    }

    /// Full matrix in the fermion-major product basis; small spaces only.
    CMat dense() const {
        const Eigen::Index br = boson_rows(), bc = boson_cols();
        CMat out = CMat::Zero(fermion_rows() * br, fermion_cols() * bc);
        for (const Term& t : terms_)
            for (Eigen::Index k = 0; k < t.f.outerSize(); ++k)
                for (SpMat::InnerIterator it(t.f, k); it; ++it) out.block(it.row() * br, it.col() * bc, br, bc) += it.value() * t.b;
        return out;
    }

private:
    std::vector<Term> terms_;
};

inline KronOperator commutator(const KronOperator& a, const KronOperator& b) { return a * b - b * a; }
inline KronOperator anticommutator(const KronOperator& a, const KronOperator& b) { return a * b + b * a; }

/// <Psi, A Psi> for a composite state Psi.
inline cplx expectation(const KronOperator& a, const CMat& psi) {
    const CMat v = a.apply(psi);
    return (psi.conjugate().cwiseProduct(v)).sum();
}

/// Product state f ⊗ b as an F x B matrix.
inline CMat product_state(const CVec& f, const CVec& b) { return f * b.transpose(); }

} // namespace twistfield

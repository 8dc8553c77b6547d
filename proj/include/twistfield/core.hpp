// Copyright 2026 The twistfield Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file core.hpp
 * @brief Scalar and container aliases, error type and small numeric helpers
 *        shared by every twistfield header.
 */

#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace twistfield {

using cplx = std::complex<double>;
using RVec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;
using SpMat = Eigen::SparseMatrix<cplx>;
using Field = RVec;

/// Boolean selector over basis indices; empty means "all".
using Mask = std::vector<char>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr cplx kI{0.0, 1.0};

enum class ErrorKind {
    InvalidArgument,
    GridMismatch,
    DimensionMismatch,
    NonFinite,
    SingularSymbol,
    NotUnitary,
    NotSelfAdjoint,
    SpanResidual,
    Truncation,
    NotShiftClosed,
    Config,
};

inline const char* to_string(ErrorKind k) {
    switch (k) {
    case ErrorKind::InvalidArgument: return "invalid argument";
    case ErrorKind::GridMismatch: return "grid mismatch";
    case ErrorKind::DimensionMismatch: return "dimension mismatch";
    case ErrorKind::NonFinite: return "non-finite value";
    case ErrorKind::SingularSymbol: return "singular symbol";
    case ErrorKind::NotUnitary: return "operator not unitary";
    case ErrorKind::NotSelfAdjoint: return "operator not selfadjoint";
    case ErrorKind::SpanResidual: return "outside mode span";
    case ErrorKind::Truncation: return "truncation exceeded";
    case ErrorKind::NotShiftClosed: return "mode span not shift-closed";
    case ErrorKind::Config: return "configuration error";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline void require(bool cond, ErrorKind kind, const std::string& what) {
    if (!cond) throw Error(kind, what);
}

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& x) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
        for (Eigen::Index r = 0; r < x.rows(); ++r) {
            const auto v = x.derived().coeff(r, c);
            if constexpr (Eigen::NumTraits<typename Derived::Scalar>::IsComplex) {
                if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
            } else {
                if (!std::isfinite(v)) return false;
            }
        }
    }
    return true;
}

inline bool selected(const Mask& m, Eigen::Index i) {
    return m.empty() || m[static_cast<std::size_t>(i)] != 0;
}

inline Mask mask_and(const Mask& a, const Mask& b) {
    if (a.empty()) return b;
    if (b.empty()) return a;
    Mask out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = static_cast<char>(a[i] && b[i]);
    return out;
}

inline std::size_t mask_count(const Mask& m, std::size_t dim) {
    if (m.empty()) return dim;
    std::size_t c = 0;
    for (char v : m) c += v ? 1 : 0;
    return c;
}

} // namespace twistfield

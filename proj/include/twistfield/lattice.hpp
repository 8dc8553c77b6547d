// Copyright 2026 The twistfield Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file lattice.hpp
 * @brief Test functions, twisting kernels, spectral convolution,
 *        constant-coefficient differential operators and their exact
 *        discrete fundamental solutions on a periodic Grid.
 */

#pragma once

#include "twistfield/grid.hpp"
#include "twistfield/spectral.hpp"

#include <algorithm>
#include <optional>
#include <ostream>
#include <set>
#include <utility>

namespace twistfield {

// ---------------------------------------------------------------------------
// Test functions
// ---------------------------------------------------------------------------

/// Pair (s0, s1) of real grid fields labelling a Weyl generator.
struct ScalarTestFunction {
    Field s0;
    Field s1;

    ScalarTestFunction() = default;
    ScalarTestFunction(Field a, Field b) : s0(std::move(a)), s1(std::move(b)) {}

    static ScalarTestFunction zero(const Grid& g) {
        return {Field::Zero(static_cast<Eigen::Index>(g.size())), Field::Zero(static_cast<Eigen::Index>(g.size()))};
    }

    /// The complex one-particle vector s0 + i s1.
    CVec smeared() const {
        CVec f(s0.size());
        for (Eigen::Index i = 0; i < s0.size(); ++i) f[i] = cplx(s0[i], s1[i]);
        return f;
    }

    ScalarTestFunction operator-() const { return {-s0, -s1}; }
    ScalarTestFunction& operator+=(const ScalarTestFunction& o) {
        s0 += o.s0;
        s1 += o.s1;
        return *this;
    }
    friend ScalarTestFunction operator+(ScalarTestFunction a, const ScalarTestFunction& b) { return a += b; }
    friend ScalarTestFunction operator-(ScalarTestFunction a, const ScalarTestFunction& b) { return a += -b; }
    friend ScalarTestFunction operator*(double c, const ScalarTestFunction& a) { return {c * a.s0, c * a.s1}; }
};

inline void check_test_function(const Grid& g, const ScalarTestFunction& s) {
    check_field(g, s.s0, "s0");
    check_field(g, s.s1, "s1");
    require(all_finite(s.s0) && all_finite(s.s1), ErrorKind::NonFinite, "test function has non-finite entries");
}

/// eta(s, t) = dV * sum_x (s1 t0 - s0 t1).
inline double symplectic_form(const ScalarTestFunction& s, const ScalarTestFunction& t, const Grid& g) {
    check_test_function(g, s);
    check_test_function(g, t);
    return g.cell_volume() * (s.s1.dot(t.s0) - s.s0.dot(t.s1));
}

/// (T_a f)(x) = f(x - a).
inline Field translate(const Grid& g, const Field& f, const Shift& a) {
    check_field(g, f);
    Field out(f.size());
    for (std::size_t i = 0; i < g.size(); ++i) out[static_cast<Eigen::Index>(g.shifted(i, a))] = f[static_cast<Eigen::Index>(i)];
    return out;
}

inline CVec translate(const Grid& g, const CVec& f, const Shift& a) {
    check_field(g, f);
    CVec out(f.size());
    for (std::size_t i = 0; i < g.size(); ++i) out[static_cast<Eigen::Index>(g.shifted(i, a))] = f[static_cast<Eigen::Index>(i)];
    return out;
}

inline ScalarTestFunction translate(const Grid& g, const ScalarTestFunction& s, const Shift& a) {
    return {translate(g, s.s0, a), translate(g, s.s1, a)};
}

inline double integral(const Grid& g, const Field& f) {
    check_field(g, f);
    return g.cell_volume() * f.sum();
}

inline double grid_mean(const Grid& g, const Field& f) {
    check_field(g, f);
    return f.mean();
}

/// Removes the constant mode and every mode touching a Nyquist slot.
inline Field smooth_projection(const Grid& g, const Field& f) {
    return apply_symbol(g, f, [&](std::size_t k) { return (k == 0 || g.touches_nyquist(k)) ? 0.0 : 1.0; });
}

inline bool is_smooth(const Grid& g, const Field& f, double tol = 1e-12) {
    const double scale = std::max(1.0, f.cwiseAbs().maxCoeff());
    return (smooth_projection(g, f) - f).cwiseAbs().maxCoeff() <= tol * scale;
}

/**
 * Least-norm field in the mean-zero, Nyquist-free subspace that takes the
 * prescribed values on the given sites. Throws if the constraints are not
 * simultaneously satisfiable.
 */
inline Field smooth_field_with_values(const Grid& g, const std::vector<std::pair<std::size_t, double>>& values) {
    const auto m = static_cast<Eigen::Index>(values.size());
    std::vector<Field> rows;
    rows.reserve(values.size());
    for (const auto& [site, v] : values) {
        require(site < g.size(), ErrorKind::InvalidArgument, "prescribed site outside grid");
        Field e = Field::Zero(static_cast<Eigen::Index>(g.size()));
        e[static_cast<Eigen::Index>(site)] = 1.0;
        rows.push_back(smooth_projection(g, e));
    }
    RMat gram(m, m);
    RVec rhs(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        rhs[i] = values[static_cast<std::size_t>(i)].second;
        for (Eigen::Index j = 0; j < m; ++j)
            gram(i, j) = rows[static_cast<std::size_t>(j)][static_cast<Eigen::Index>(values[static_cast<std::size_t>(i)].first)];
    }
    Eigen::CompleteOrthogonalDecomposition<RMat> cod(gram);
    const RVec lambda = cod.solve(rhs);
    Field f = Field::Zero(static_cast<Eigen::Index>(g.size()));
    for (Eigen::Index j = 0; j < m; ++j) f += lambda[j] * rows[static_cast<std::size_t>(j)];
    for (const auto& [site, v] : values)
        require(std::abs(f[static_cast<Eigen::Index>(site)] - v) <= 1e-9 * std::max(1.0, std::abs(v)), ErrorKind::InvalidArgument,
                "prescribed values incompatible with a mean-zero Nyquist-free field");
    return f;
}

// ---------------------------------------------------------------------------
// Differential operators
// ---------------------------------------------------------------------------

enum class DiffOpKind { Identity, NegLaplacian, Helmholtz };

/// Constant-coefficient operator given by its spectral symbol.
struct DiffOp {
    DiffOpKind kind = DiffOpKind::Identity;
    double mass = 0.0;

    static DiffOp identity() { return {DiffOpKind::Identity, 0.0}; }
    static DiffOp neg_laplacian() { return {DiffOpKind::NegLaplacian, 0.0}; }
    static DiffOp helmholtz(double m) {
        require(std::isfinite(m) && m > 0.0, ErrorKind::InvalidArgument, "Helmholtz mass must be positive");
        return {DiffOpKind::Helmholtz, m};
    }

    double symbol(const Grid& g, std::size_t k) const {
        switch (kind) {
        case DiffOpKind::Identity: return 1.0;
        case DiffOpKind::NegLaplacian: return g.k_squared(k);
        case DiffOpKind::Helmholtz: return g.k_squared(k) + mass * mass;
        }
        return 1.0;
    }

    std::string name() const {
        switch (kind) {
        case DiffOpKind::Identity: return "identity";
        case DiffOpKind::NegLaplacian: return "neg_laplacian";
        case DiffOpKind::Helmholtz: return "helmholtz(" + std::to_string(mass) + ")";
        }
        return "?";
    }
};

inline Field apply_diffop(const DiffOp& p, const Grid& g, const Field& f) {
    check_field(g, f);
    if (p.kind == DiffOpKind::Identity) return f;
    return apply_symbol(g, f, [&](std::size_t k) { return p.symbol(g, k); });
}

inline ScalarTestFunction apply_diffop(const DiffOp& p, const Grid& g, const ScalarTestFunction& s) {
    return {apply_diffop(p, g, s.s0), apply_diffop(p, g, s.s1)};
}

// ---------------------------------------------------------------------------
// Twisting kernels
// ---------------------------------------------------------------------------

enum class KernelKind { Delta, Constant, Yukawa, Coulomb, Tabulated };
enum class Sampling { Pointwise, Spectral };
enum class ZeroMode { Strict, MeanZero };

inline const char* to_string(ZeroMode z) { return z == ZeroMode::Strict ? "strict" : "mean_zero"; }

class TwistKernel;
TwistKernel fundamental_solution(const DiffOp& p, const Grid& g, ZeroMode zm);

/**
 * Real kernel sigma sampled on the grid together with its spectrum
 * sigma_hat(k) = dV sum_x sigma(x) exp(-ik.x). Spectrally defined kernels
 * keep their exact symbol; pointwise ones derive it by FFT.
 */
class TwistKernel {
public:
    static TwistKernel delta(const Grid& g) {
        Field v = Field::Zero(static_cast<Eigen::Index>(g.size()));
        v[0] = 1.0 / g.cell_volume();
        return TwistKernel(g, KernelKind::Delta, "delta", v, CVec::Ones(static_cast<Eigen::Index>(g.size())));
    }

    static TwistKernel constant(const Grid& g) {
        const Field v = Field::Ones(static_cast<Eigen::Index>(g.size()));
        return from_values(g, KernelKind::Constant, "constant", v);
    }

    static TwistKernel zero(const Grid& g) {
        return tabulated(g, Field::Zero(static_cast<Eigen::Index>(g.size())), "zero");
    }

    static TwistKernel tabulated(const Grid& g, const Field& values, std::string label = "tabulated") {
        check_field(g, values, "kernel");
        require(all_finite(values), ErrorKind::NonFinite, "kernel values must be finite");
        return from_values(g, KernelKind::Tabulated, std::move(label), values);
    }

    /// Kernel with a prescribed real even spectrum.
    static TwistKernel from_spectrum(const Grid& g, const RVec& spectrum, std::string label, KernelKind kind = KernelKind::Tabulated) {
        check_field(g, spectrum, "spectrum");
        require(all_finite(spectrum), ErrorKind::NonFinite, "kernel spectrum must be finite");
        const CVec sh = spectrum.cast<cplx>();
        const Field v = fft_inverse(g, sh).real();
        return TwistKernel(g, kind, std::move(label), v, sh);
    }

    /// Spectral sampling is the Helmholtz fundamental solution exp(-m r)/(4 pi r);
    /// pointwise sampling is exp(-m r)/r with the origin averaged over a ball
    /// of volume dx^3.
    static TwistKernel yukawa(const Grid& g, double m, Sampling sampling = Sampling::Spectral) {
        require(std::isfinite(m) && m > 0.0, ErrorKind::InvalidArgument, "Yukawa mass must be positive");
        if (sampling == Sampling::Spectral) {
            TwistKernel k = fundamental_solution(DiffOp::helmholtz(m), g, ZeroMode::Strict);
            k.kind_ = KernelKind::Yukawa;
            k.mass_ = m;
            k.label_ = "yukawa(" + std::to_string(m) + ",spectral)";
            return k;
        }
        const double a = origin_ball_radius(g);
        Field v(static_cast<Eigen::Index>(g.size()));
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double r = g.distance_to_origin(i);
            v[static_cast<Eigen::Index>(i)] =
                (i == 0) ? 3.0 * (1.0 - std::exp(-m * a) * (1.0 + m * a)) / (m * m * a * a * a) : std::exp(-m * r) / r;
        }
        TwistKernel k = from_values(g, KernelKind::Yukawa, "yukawa(" + std::to_string(m) + ",pointwise)", v);
        k.mass_ = m;
        k.sampling_ = Sampling::Pointwise;
        return k;
    }

    /// 1/(4 pi r); spectral sampling is the mean-zero inverse of -Laplacian.
    static TwistKernel coulomb(const Grid& g, Sampling sampling = Sampling::Spectral) {
        if (sampling == Sampling::Spectral) {
            TwistKernel k = fundamental_solution(DiffOp::neg_laplacian(), g, ZeroMode::MeanZero);
            k.kind_ = KernelKind::Coulomb;
            k.label_ = "coulomb(spectral)";
            return k;
        }
        const double a = origin_ball_radius(g);
        Field v(static_cast<Eigen::Index>(g.size()));
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double r = g.distance_to_origin(i);
            v[static_cast<Eigen::Index>(i)] = (i == 0) ? 3.0 / (8.0 * kPi * a) : 1.0 / (4.0 * kPi * r);
        }
        TwistKernel k = from_values(g, KernelKind::Coulomb, "coulomb(pointwise)", v);
        k.sampling_ = Sampling::Pointwise;
        return k;
    }

    const Grid& grid() const { return grid_; }
    KernelKind kind() const { return kind_; }
    Sampling sampling() const { return sampling_; }
    double mass() const { return mass_; }
    const Field& values() const { return values_; }
    const CVec& spectrum() const { return spectrum_; }
    const std::string& label() const { return label_; }
    std::optional<ZeroMode> zero_mode() const { return zero_mode_; }

    /// sigma(x) == sigma(-x) within tol.
    bool is_even(double tol = 1e-12) const {
        const double scale = std::max(1.0, values_.cwiseAbs().maxCoeff());
        for (std::size_t i = 0; i < grid_.size(); ++i)
            if (std::abs(values_[static_cast<Eigen::Index>(i)] - values_[static_cast<Eigen::Index>(grid_.reflected(i))]) > tol * scale)
                return false;
        return true;
    }

    static double origin_ball_radius(const Grid& g) { return std::cbrt(3.0 * g.dx * g.dx * g.dx / (4.0 * kPi)); }

private:
    TwistKernel(Grid g, KernelKind kind, std::string label, Field values, CVec spectrum)
        : grid_(g), kind_(kind), label_(std::move(label)), values_(std::move(values)), spectrum_(std::move(spectrum)) {}

    static TwistKernel from_values(const Grid& g, KernelKind kind, std::string label, const Field& v) {
        return TwistKernel(g, kind, std::move(label), v, fft_forward(g, v));
    }

    friend TwistKernel fundamental_solution(const DiffOp& p, const Grid& g, ZeroMode zm);

    Grid grid_;
    KernelKind kind_ = KernelKind::Tabulated;
    Sampling sampling_ = Sampling::Spectral;
    double mass_ = 0.0;
    std::string label_;
    Field values_;
    CVec spectrum_;
    std::optional<ZeroMode> zero_mode_;
};

/// x -> dV sum_y sigma(x - y) f(y), periodic, evaluated spectrally.
inline Field convolve(const TwistKernel& sigma, const Field& f, const Grid& g) {
    check_same_grid(sigma.grid(), g);
    check_field(g, f);
    require(all_finite(sigma.values()) && all_finite(sigma.spectrum()), ErrorKind::NonFinite, "kernel has non-finite values");
    require(all_finite(f), ErrorKind::NonFinite, "field has non-finite values");
    CVec fh = fft_forward(g, f);
    fh = fh.cwiseProduct(sigma.spectrum());
    return fft_inverse(g, fh).real();
}

inline Field convolve(const TwistKernel& sigma, const Field& f) { return convolve(sigma, f, sigma.grid()); }

/**
 * Tabulated kernel with spectrum 1/p(k). Under ZeroMode::MeanZero the
 * vanishing symbol modes are set to zero instead of raising.
 */
inline TwistKernel fundamental_solution(const DiffOp& p, const Grid& g, ZeroMode zm) {
    RVec spec(static_cast<Eigen::Index>(g.size()));
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double s = p.symbol(g, k);
        if (s == 0.0) {
            require(zm == ZeroMode::MeanZero, ErrorKind::SingularSymbol,
                    p.name() + " symbol vanishes at a dual mode; request the mean-zero convention");
            spec[static_cast<Eigen::Index>(k)] = 0.0;
        } else {
            spec[static_cast<Eigen::Index>(k)] = 1.0 / s;
        }
    }
    TwistKernel out = TwistKernel::from_spectrum(g, spec, "fundamental_solution(" + p.name() + ")");
    out.zero_mode_ = zm;
    return out;
}

// ---------------------------------------------------------------------------
// Supports
// ---------------------------------------------------------------------------

/// Sorted list of site indices.
using SiteSet = std::vector<std::size_t>;

template <typename Derived>
SiteSet support(const Eigen::MatrixBase<Derived>& f, double tol) {
    require(tol > 0.0, ErrorKind::InvalidArgument, "support tolerance must be positive");
    SiteSet out;
    for (Eigen::Index i = 0; i < f.size(); ++i)
        if (std::abs(f.derived().coeff(i)) > tol) out.push_back(static_cast<std::size_t>(i));
    return out;
}

inline SiteSet support(const ScalarTestFunction& s, double tol) {
    require(tol > 0.0, ErrorKind::InvalidArgument, "support tolerance must be positive");
    SiteSet out;
    for (Eigen::Index i = 0; i < s.s0.size(); ++i)
        if (std::max(std::abs(s.s0[i]), std::abs(s.s1[i])) > tol) out.push_back(static_cast<std::size_t>(i));
    return out;
}

inline SiteSet minkowski_sum(const Grid& g, const SiteSet& a, const SiteSet& b) {
    std::set<std::size_t> out;
    for (std::size_t x : a) {
        const auto cx = g.coords(x);
        for (std::size_t y : b) {
            const auto cy = g.coords(y);
            out.insert(g.index({cx[0] + cy[0], cx[1] + cy[1], cx[2] + cy[2]}));
        }
    }
    return {out.begin(), out.end()};
}

inline bool disjoint(const SiteSet& a, const SiteSet& b) {
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] == b[j]) return false;
        if (a[i] < b[j]) ++i;
        else ++j;
    }
    return true;
}

/// Sites within minimum-image distance r of site c.
inline SiteSet ball(const Grid& g, std::size_t c, double r) {
    SiteSet out;
    const auto cc = g.coords(c);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto ci = g.coords(i);
        const std::size_t rel = g.index({ci[0] - cc[0], ci[1] - cc[1], ci[2] - cc[2]});
        if (g.distance_to_origin(rel) <= r + 1e-12) out.push_back(i);
    }
    return out;
}

/// CSV rows "site,x0[,x1[,x2]],value" with minimum-image coordinates.
inline void write_kernel_csv(std::ostream& os, const TwistKernel& k) {
    const Grid& g = k.grid();
    os << "site";
    for (int a = 0; a < g.dim; ++a) os << ",x" << a;
    os << ",value\n";
    os.precision(17);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto p = g.position(i);
        os << i;
        for (int a = 0; a < g.dim; ++a) os << ',' << p[a];
        os << ',' << k.values()[static_cast<Eigen::Index>(i)] << '\n';
    }
}

} // namespace twistfield

// Copyright 2026 The twistfield Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file hamiltonian.hpp
 * @brief Momentum-space shift operators, the cutoff Hamiltonian on the
 *        one-fermion sector, its closed-form action on w ⊗ Omega_b,
 *        the momentum-transfer demonstration, UV integrals and the
 *        electron-positron shift operators.
 *
 * Conventions. Momentum wave functions live on the dual grid with measure
 * dV_k = (2 pi / (n dx))^dim. The kernel transform is sigma^(k) =
 * 4 pi / varpi(k)^2 with varpi(k) = sqrt(|k|^2 + m^2). Boson modes are sharp
 * dual points with [b_j, b_l^*] = delta_jl; the continuum b(k) corresponds
 * to b_j / sqrt(dV_k), so every k-integral becomes a plain sum over modes
 * with a sqrt(dV_k) on each linear term.
 */

#pragma once

#include "twistfield/boson.hpp"
#include "twistfield/fermion.hpp"
#include "twistfield/kron.hpp"
#include "twistfield/lattice.hpp"

#include <map>

namespace twistfield {

/// Which shift the starred operator carries.
enum class ShiftChoice {
    Forward,   ///< (mu^*(k) w)(k') = -sigma^(k) w(k' - k)
    Mirrored,  ///< (mu^*(k) w)(k') = -sigma^(k) w(k' + k)
};

inline const char* to_string(ShiftChoice c) { return c == ShiftChoice::Forward ? "forward" : "mirrored"; }

class MomentumGrid {
public:
    MomentumGrid(Grid g, double m) : grid_(g), m_(m) {
        require(std::isfinite(m) && m > 0.0, ErrorKind::InvalidArgument, "Yukawa mass must be positive");
    }

    const Grid& grid() const { return grid_; }
    double mass() const { return m_; }
    std::size_t size() const { return grid_.size(); }
    double dvk() const { return grid_.dual_cell_volume(); }
    double varpi(std::size_t k) const { return std::sqrt(grid_.k_squared(k) + m_ * m_); }
    double norm_k(std::size_t k) const { return std::sqrt(grid_.k_squared(k)); }
    double sigma_hat(std::size_t k) const { return 4.0 * kPi / (varpi(k) * varpi(k)); }

    /// Dual index of k + sign * q, wrapped.
    std::size_t add(std::size_t k, std::size_t q, int sign = +1) const {
        auto a = grid_.frequencies(k);
        const auto b = grid_.frequencies(q);
        for (int d = 0; d < grid_.dim; ++d) a[d] += sign * b[d];
        return grid_.frequency_index(a);
    }
    std::size_t negate(std::size_t k) const { return add(0, k, -1); }
    std::size_t index_of(const std::array<int, 3>& freq) const { return grid_.frequency_index(freq); }

    /// (S_q w)(k') = w(k' - q): a permutation matrix.
    SpMat shift(std::size_t q) const {
        std::vector<Eigen::Triplet<cplx>> t;
        for (std::size_t k = 0; k < size(); ++k) t.emplace_back(static_cast<int>(k), static_cast<int>(add(k, q, -1)), 1.0);
        SpMat s(static_cast<Eigen::Index>(size()), static_cast<Eigen::Index>(size()));
        s.setFromTriplets(t.begin(), t.end());
        return s;
    }

    /// Parseval-consistent inner product dV_k / (2 pi)^dim sum conj(u) v.
    cplx dot(const CVec& u, const CVec& v) const { return dvk() / std::pow(2.0 * kPi, grid_.dim) * u.dot(v); }
    double norm(const CVec& u) const { return std::sqrt(dot(u, u).real()); }

    /// The kernel with spectrum 4 pi / varpi^2 as a position-space kernel.
    TwistKernel kernel() const {
        RVec spec(static_cast<Eigen::Index>(size()));
        for (std::size_t k = 0; k < size(); ++k) spec[static_cast<Eigen::Index>(k)] = sigma_hat(k);
        return TwistKernel::from_spectrum(grid_, spec, "yukawa_4pi(" + std::to_string(m_) + ")");
    }

private:
    Grid grid_;
    double m_;
};

// ---------------------------------------------------------------------------
// Cutoffs and wave packets
// ---------------------------------------------------------------------------

struct CutoffFunction {
    Field values;
    std::string label;

    /// Dual points where the cutoff is nonzero.
    std::vector<std::size_t> support() const {
        std::vector<std::size_t> out;
        for (Eigen::Index k = 0; k < values.size(); ++k)
            if (values[k] != 0.0) out.push_back(static_cast<std::size_t>(k));
        return out;
    }

    static CutoffFunction zero(const MomentumGrid& mg) { return {Field::Zero(static_cast<Eigen::Index>(mg.size())), "zero"}; }

    /// A single dual point with value v.
    static CutoffFunction point(const MomentumGrid& mg, std::size_t k, double v) {
        CutoffFunction c = zero(mg);
        c.values[static_cast<Eigen::Index>(k)] = v;
        c.label = "point";
        return c;
    }

    /// exp(-|k - c|^2 / (2 w^2)) on dual points within radius cells of the
    /// center, rescaled so that sum g dV_k = 1.
    static CutoffFunction gaussian(const MomentumGrid& mg, std::size_t center, double width, double radius_cells = 2.0) {
        require(width > 0.0, ErrorKind::InvalidArgument, "Gaussian width must be positive");
        CutoffFunction c = zero(mg);
        const double dk = mg.grid().dual_spacing();
        for (std::size_t k = 0; k < mg.size(); ++k) {
            const double d = mg.norm_k(mg.add(k, center, -1));
            if (d <= radius_cells * dk + 1e-12) c.values[static_cast<Eigen::Index>(k)] = std::exp(-0.5 * d * d / (width * width));
        }
        c.values /= c.values.sum() * mg.dvk();
        c.label = "gaussian";
        return c;
    }

    /// Indicator of |k| <= radius.
    static CutoffFunction flat(const MomentumGrid& mg, double radius) {
        CutoffFunction c = zero(mg);
        for (std::size_t k = 0; k < mg.size(); ++k)
            if (mg.norm_k(k) <= radius + 1e-12) c.values[static_cast<Eigen::Index>(k)] = 1.0;
        c.label = "flat";
        return c;
    }
};

/// Gaussian momentum packet around a dual point, normalized in the
/// Parseval inner product.
inline CVec momentum_packet(const MomentumGrid& mg, std::size_t center, double width, double radius_cells = 2.0) {
    const CutoffFunction g = CutoffFunction::gaussian(mg, center, width, radius_cells);
    CVec w = g.values.cast<cplx>();
    return w / mg.norm(w);
}

// ---------------------------------------------------------------------------
// Shift operators
// ---------------------------------------------------------------------------

/// mu^*(k) on electron momentum wave functions.
inline SpMat mu_hat_star(const MomentumGrid& mg, std::size_t k, ShiftChoice choice = ShiftChoice::Forward) {
    const std::size_t q = choice == ShiftChoice::Forward ? k : mg.negate(k);
    return SpMat(-mg.sigma_hat(k) * mg.shift(q));
}

/// mu(k) = mu^*(-k).
inline SpMat mu_hat(const MomentumGrid& mg, std::size_t k, ShiftChoice choice = ShiftChoice::Forward) {
    return mu_hat_star(mg, mg.negate(k), choice);
}

/// dV_k / (2 pi)^dim sum_k s0^(k) mu^*(k), the transform of the position
/// multiplier -(sigma * s0) on the electron sector.
inline SpMat mu_hat_smeared(const MomentumGrid& mg, const CVec& s0_hat) {
    SpMat out(static_cast<Eigen::Index>(mg.size()), static_cast<Eigen::Index>(mg.size()));
    const double c = mg.dvk() / std::pow(2.0 * kPi, mg.grid().dim);
    for (std::size_t k = 0; k < mg.size(); ++k)
        if (s0_hat[static_cast<Eigen::Index>(k)] != cplx(0.0)) out += (c * s0_hat[static_cast<Eigen::Index>(k)]) * mu_hat_star(mg, k);
    return out;
}

struct ContinuityReport {
    double lhs = 0.0;            ///< |mu(k) w - mu(h) w|^2
    double rhs_exact = 0.0;      ///< 16 pi^2 / m^4 times the shifted-difference integral
    double rhs_bare = 0.0;    ///< 1 / m^4 times the same integral
    double identity_residual = 0.0;  ///< |lhs - 16 pi^2 / varpi(k)^4 integral|
    bool exact_bound_holds() const { return lhs <= rhs_exact * (1.0 + 1e-12); }
    bool bare_bound_holds() const { return lhs <= rhs_bare * (1.0 + 1e-12); }
};

/// Strong-continuity estimate for mu(k) at two dual points k, h.
inline ContinuityReport mu_continuity(const MomentumGrid& mg, std::size_t k, std::size_t h, const CVec& w) {
    const CVec d = mu_hat(mg, k) * w - mu_hat(mg, h) * w;
    const double vk = mg.varpi(k), vh = mg.varpi(h);
    CVec r(w.size());
    for (std::size_t kp = 0; kp < mg.size(); ++kp)
        r[static_cast<Eigen::Index>(kp)] = w[static_cast<Eigen::Index>(mg.add(k, kp))] - (vk * vk) / (vh * vh) * w[static_cast<Eigen::Index>(mg.add(h, kp))];
    const double integral = std::pow(mg.norm(r), 2);
    const double m4 = std::pow(mg.mass(), 4);
    ContinuityReport out;
    out.lhs = std::pow(mg.norm(d), 2);
    out.rhs_exact = 16.0 * kPi * kPi / m4 * integral;
    out.rhs_bare = integral / m4;
    out.identity_residual = std::abs(out.lhs - 16.0 * kPi * kPi / std::pow(vk, 4) * integral);
    return out;
}

// ---------------------------------------------------------------------------
// One-fermion Hamiltonian
// ---------------------------------------------------------------------------

/// Electron momentum wave functions ⊗ truncated Fock space over the sharp
/// modes supp(g). Composite states are N x B matrices.
class OneFermionBosonSpace {
public:
    OneFermionBosonSpace(MomentumGrid mg, const CutoffFunction& g, int n_max, ShiftChoice choice = ShiftChoice::Forward)
        : mg_(std::move(mg)), g_(g), modes_(g.support()), choice_(choice),
          fock_(static_cast<int>(std::max<std::size_t>(modes_.size(), 1)), n_max) {
        check_field(mg_.grid(), g.values, "cutoff");
        require(modes_.size() <= 6, ErrorKind::InvalidArgument, "cutoff support exceeds the boson mode budget (6 sharp modes)");
    }

    const MomentumGrid& momentum() const { return mg_; }
    const CutoffFunction& cutoff() const { return g_; }
    const std::vector<std::size_t>& modes() const { return modes_; }
    const BosonFockSpace& fock() const { return fock_; }
    ShiftChoice choice() const { return choice_; }
    Eigen::Index fermion_dim() const { return static_cast<Eigen::Index>(mg_.size()); }
    Eigen::Index boson_dim() const { return fock_.dim(); }

    /// Boson mode carrying dual point k.
    int mode_of(std::size_t k) const {
        const auto it = std::find(modes_.begin(), modes_.end(), k);
        require(it != modes_.end(), ErrorKind::InvalidArgument, "dual point is not a boson mode");
        return static_cast<int>(it - modes_.begin());
    }

    /// b^*(k) Omega_b index.
    Eigen::Index one_boson_index(std::size_t k) const {
        BosonFockSpace::Occ o(static_cast<std::size_t>(fock_.modes()), 0);
        o[static_cast<std::size_t>(mode_of(k))] = 1;
        return fock_.index_of(o);
    }

    KronOperator identity() const { return KronOperator::identity(fermion_dim(), boson_dim()); }

    struct Terms {
        KronOperator h0, hmuphi, hmu;
        KronOperator total() const { return h0 + hmuphi + hmu; }
    };

    /// H0 = sum varpi g b^* b; Hmuphi = -2^{-1/2} sum varpi g (mu^* b + mu b^*)
    /// sqrt(dV_k); Hmu = sum varpi g mu^* mu / 2 dV_k.
    Terms build(const CutoffFunction& gp) const {
        return {h0(gp), hmuphi(gp), hmu(gp)};
    }
    Terms build() const { return build(g_); }

    KronOperator h0(const CutoffFunction& gp) const {
        CMat b = CMat::Zero(boson_dim(), boson_dim());
        for (std::size_t j = 0; j < modes_.size(); ++j) {
            const double c = mg_.varpi(modes_[j]) * gp.values[static_cast<Eigen::Index>(modes_[j])];
            if (c != 0.0) b += c * CMat(fock_.mode_create(static_cast<int>(j)) * fock_.mode_annihilate(static_cast<int>(j)));
        }
        check_covered(gp);
        return KronOperator::boson(b, fermion_dim());
    }

    KronOperator hmuphi(const CutoffFunction& gp) const {
        check_covered(gp);
        KronOperator out(SpMat(fermion_dim(), fermion_dim()), CMat::Zero(boson_dim(), boson_dim()));
        for (std::size_t j = 0; j < modes_.size(); ++j) {
            const std::size_t k = modes_[j];
            const double c = -std::sqrt(0.5 * mg_.dvk()) * mg_.varpi(k) * gp.values[static_cast<Eigen::Index>(k)];
            if (c == 0.0) continue;
            out.add(SpMat(c * mu_hat_star(mg_, k, choice_)), CMat(fock_.mode_annihilate(static_cast<int>(j))));
            out.add(SpMat(c * mu_hat(mg_, k, choice_)), CMat(fock_.mode_create(static_cast<int>(j))));
        }
        return out;
    }

    KronOperator hmu(const CutoffFunction& gp) const {
        SpMat f(fermion_dim(), fermion_dim());
        for (std::size_t k : gp.support()) {
            const double c = 0.5 * mg_.dvk() * mg_.varpi(k) * gp.values[static_cast<Eigen::Index>(k)];
            f += c * SpMat(mu_hat_star(mg_, k, choice_) * mu_hat(mg_, k, choice_));
        }
        return KronOperator::fermion(f, boson_dim());
    }

    /// sum 8 pi^2 g / varpi^3 dV_k.
    double hmu_scalar(const CutoffFunction& gp) const { return hmu_scalar(mg_, gp); }
    static double hmu_scalar(const MomentumGrid& mg, const CutoffFunction& gp) {
        double acc = 0.0;
        for (std::size_t k : gp.support()) acc += 8.0 * kPi * kPi * gp.values[static_cast<Eigen::Index>(k)] / std::pow(mg.varpi(k), 3) * mg.dvk();
        return acc;
    }

    /// [H0(g'), Hmuphi(g)] re-derived: 2^{-1/2} sum varpi^2 g' g sqrt(dV_k)
    /// (mu^* b - mu b^*).
    KronOperator density_commutator(const CutoffFunction& gp, const CutoffFunction& g) const {
        KronOperator out(SpMat(fermion_dim(), fermion_dim()), CMat::Zero(boson_dim(), boson_dim()));
        for (std::size_t j = 0; j < modes_.size(); ++j) {
            const std::size_t k = modes_[j];
            const double v = mg_.varpi(k);
            const double c = std::sqrt(0.5 * mg_.dvk()) * v * v * gp.values[static_cast<Eigen::Index>(k)] * g.values[static_cast<Eigen::Index>(k)];
            if (c == 0.0) continue;
            out.add(SpMat(c * mu_hat_star(mg_, k, choice_)), CMat(fock_.mode_annihilate(static_cast<int>(j))));
            out.add(SpMat(-c * mu_hat(mg_, k, choice_)), CMat(fock_.mode_create(static_cast<int>(j))));
        }
        return out;
    }

    /// The single-varpi form 2^{-1/2} sum varpi g' g sqrt(dV_k) (mu b^* - mu^* b).
    KronOperator density_commutator_single_varpi(const CutoffFunction& gp, const CutoffFunction& g) const {
        KronOperator out(SpMat(fermion_dim(), fermion_dim()), CMat::Zero(boson_dim(), boson_dim()));
        for (std::size_t j = 0; j < modes_.size(); ++j) {
            const std::size_t k = modes_[j];
            const double c = std::sqrt(0.5 * mg_.dvk()) * mg_.varpi(k) * gp.values[static_cast<Eigen::Index>(k)] * g.values[static_cast<Eigen::Index>(k)];
            if (c == 0.0) continue;
            out.add(SpMat(-c * mu_hat_star(mg_, k, choice_)), CMat(fock_.mode_annihilate(static_cast<int>(j))));
            out.add(SpMat(c * mu_hat(mg_, k, choice_)), CMat(fock_.mode_create(static_cast<int>(j))));
        }
        return out;
    }

    KronOperator boson_number() const { return KronOperator::boson(CMat(fock_.number_operator()), fermion_dim()); }

    /// w ⊗ Omega_b.
    CMat vacuum_state(const CVec& w) const { return product_state(w, fock_.vacuum()); }

    /// Closed form of H (w ⊗ Omega_b):
    /// sum_j 2^{-1/2} sqrt(dV_k) 4 pi g / varpi w_k ⊗ b_j^* Omega + Hmu w ⊗ Omega,
    /// w_k(k') = w(k' + k) (forward shift choice).
    CMat closed_form(const CVec& w) const {
        CMat out = CMat::Zero(fermion_dim(), boson_dim());
        out.col(0) = hmu_scalar(g_) * w;
        for (std::size_t k : modes_) {
            const double gk = g_.values[static_cast<Eigen::Index>(k)];
            out.col(one_boson_index(k)) += std::sqrt(0.5 * mg_.dvk()) * 4.0 * kPi * gk / mg_.varpi(k) * shifted_wave(w, k);
        }
        return out;
    }

    /// w_k: the electron wave function after emitting momentum k.
    CVec shifted_wave(const CVec& w, std::size_t k) const {
        return mg_.shift(choice_ == ShiftChoice::Forward ? mg_.negate(k) : k) * w;
    }

private:
    void check_covered(const CutoffFunction& gp) const {
        for (std::size_t k : gp.support())
            require(std::find(modes_.begin(), modes_.end(), k) != modes_.end(), ErrorKind::InvalidArgument,
                    "cutoff support is not covered by the boson modes");
    }

    MomentumGrid mg_;
    CutoffFunction g_;
    std::vector<std::size_t> modes_;
    ShiftChoice choice_;
    BosonFockSpace fock_;
};

// ---------------------------------------------------------------------------
// Momentum-transfer demonstration
// ---------------------------------------------------------------------------

struct TransferReport {
    double overlap = 0.0;         ///< normalized overlap of the one-boson part with w_{k*} ⊗ a^*(g) Omega
    cplx one_boson_amplitude;     ///< projection coefficient on w_{k*} ⊗ a^*(g) Omega
    cplx vacuum_amplitude;        ///< projection coefficient on w ⊗ Omega
    double ratio = 0.0;           ///< |one_boson / vacuum|
    double bare_ratio = 0.0;   ///< varpi(k*)^2 / (2 pi)
    double derived_ratio = 0.0;   ///< varpi(k*)^2 / (2 sqrt2 pi)
    double bare_ratio_error() const { return std::abs(ratio / bare_ratio - 1.0); }
    double derived_ratio_error() const { return std::abs(ratio / derived_ratio - 1.0); }
};

/// Applies H^lambda_g (Gaussian cutoff at k*) to a Gaussian packet at k_e
/// tensored with the boson vacuum.
inline TransferReport momentum_transfer_demo(const MomentumGrid& mg, std::size_t k_star, std::size_t k_e, double g_width, double w_width,
                                             double radius_cells = 2.0) {
    const CutoffFunction g = CutoffFunction::gaussian(mg, k_star, g_width, radius_cells);
    const OneFermionBosonSpace space(mg, g, 2);
    const CVec w = momentum_packet(mg, k_e, w_width, radius_cells);
    const CMat out = space.build().total().apply(space.vacuum_state(w));

    // Reference one-boson vector w_{k*} ⊗ a^*(g) Omega, a^*(g) = sum sqrt(dV_k) g_j b_j^*.
    CMat ref = CMat::Zero(out.rows(), out.cols());
    CMat one = CMat::Zero(out.rows(), out.cols());
    const CVec wk = space.shifted_wave(w, k_star);
    for (std::size_t k : space.modes()) {
        const Eigen::Index c = space.one_boson_index(k);
        ref.col(c) = std::sqrt(mg.dvk()) * g.values[static_cast<Eigen::Index>(k)] * wk;
        one.col(c) = out.col(c);
    }
    TransferReport r;
    const cplx proj = (ref.conjugate().cwiseProduct(one)).sum();
    r.overlap = std::abs(proj) / (ref.norm() * one.norm());
    r.one_boson_amplitude = proj / ref.squaredNorm();
    r.vacuum_amplitude = w.dot(out.col(0)) / w.squaredNorm();
    r.ratio = std::abs(r.one_boson_amplitude / r.vacuum_amplitude);
    const double v = mg.varpi(k_star);
    r.bare_ratio = v * v / (2.0 * kPi);
    r.derived_ratio = v * v / (2.0 * std::sqrt(2.0) * kPi);
    return r;
}

// ---------------------------------------------------------------------------
// UV integrals
// ---------------------------------------------------------------------------

/// I_p(R) = sum_{|k| <= R} varpi^{-p} dV_k.
inline double uv_integral(const MomentumGrid& mg, int p, double radius) {
    double acc = 0.0;
    for (std::size_t k = 0; k < mg.size(); ++k)
        if (mg.norm_k(k) <= radius + 1e-12) acc += std::pow(mg.varpi(k), -p);
    return acc * mg.dvk();
}

struct LinearFit {
    double slope = 0.0, intercept = 0.0, r2 = 0.0;
};

/// Ordinary least squares y = a x + b.
inline LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
    require(x.size() == y.size() && x.size() >= 2, ErrorKind::InvalidArgument, "least squares needs two or more points");
    const auto n = static_cast<Eigen::Index>(x.size());
    RMat a(n, 2);
    RVec b(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        a(i, 0) = x[static_cast<std::size_t>(i)];
        a(i, 1) = 1.0;
        b[i] = y[static_cast<std::size_t>(i)];
    }
    const RVec c = a.colPivHouseholderQr().solve(b);
    const double ss_res = (a * c - b).squaredNorm();
    const double ss_tot = (b.array() - b.mean()).matrix().squaredNorm();
    return {c[0], c[1], ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0};
}

struct UvScan {
    std::vector<double> radii;
    std::map<int, std::vector<double>> values;  ///< p -> I_p(R)
    LinearFit linear2;     ///< I_2 against R, upper half
    LinearFit log3;        ///< I_3 against ln R, upper half
    double increment4 = 0.0;  ///< |I_4(R_max) - I_4(R_max / 2)| / I_4(R_max)
};

/// Geometric radii from r_max / ratio to r_max, fits over the upper half.
inline std::vector<double> geometric_radii(double r_max, double ratio, int count) {
    std::vector<double> out;
    for (int i = 0; i < count; ++i) out.push_back(r_max / ratio * std::pow(ratio, static_cast<double>(i) / (count - 1)));
    return out;
}

inline UvScan uv_divergence_scan(const MomentumGrid& mg, const std::vector<double>& radii) {
    require(radii.size() >= 4, ErrorKind::InvalidArgument, "the UV scan needs at least four radii");
    require(std::is_sorted(radii.begin(), radii.end()), ErrorKind::InvalidArgument, "radii must increase");
    const double k_max = mg.grid().dual_spacing() * (mg.grid().n / 2) * std::sqrt(static_cast<double>(mg.grid().dim));
    require(radii.back() <= k_max + 1e-12, ErrorKind::InvalidArgument, "radii exceed the dual grid");
    UvScan s;
    s.radii = radii;
    for (int p : {2, 3, 4})
        for (double r : radii) s.values[p].push_back(uv_integral(mg, p, r));
    const std::size_t h = radii.size() / 2;
    std::vector<double> x, lx, y2, y3;
    for (std::size_t i = h; i < radii.size(); ++i) {
        x.push_back(radii[i]);
        lx.push_back(std::log(radii[i]));
        y2.push_back(s.values[2][i]);
        y3.push_back(s.values[3][i]);
    }
    s.linear2 = least_squares(x, y2);
    s.log3 = least_squares(lx, y3);
    const double top = s.values[4].back();
    s.increment4 = std::abs(top - uv_integral(mg, 4, radii.back() / 2.0)) / top;
    return s;
}

// ---------------------------------------------------------------------------
// Electron-positron sector
// ---------------------------------------------------------------------------

/// w_sym(y1, y2) = w1(y1) w2(y2) + w1(y2) w2(y1) as an N x N array.
inline CMat w_sym(const CVec& w1, const CVec& w2) { return w1 * w2.transpose() + w2 * w1.transpose(); }

/// The four-term shift operator mu^-(k1, k2bar) applied to a two-argument
/// array c(k1', k2'): sigma^(k2bar) c(k1', k2' + k2bar) - sigma^(k1) c(k1' + k1, k2').
inline CMat two_fermion_mu(const MomentumGrid& mg, std::size_t k1, std::size_t k2bar, const CMat& c) {
    const auto n = static_cast<Eigen::Index>(mg.size());
    require(c.rows() == n && c.cols() == n, ErrorKind::DimensionMismatch, "two-fermion array must be N x N");
    CMat out(n, n);
    for (std::size_t a = 0; a < mg.size(); ++a)
        for (std::size_t b = 0; b < mg.size(); ++b)
            out(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
                mg.sigma_hat(k2bar) * c(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(mg.add(b, k2bar))) -
                mg.sigma_hat(k1) * c(static_cast<Eigen::Index>(mg.add(a, k1)), static_cast<Eigen::Index>(b));
    return out;
}

/// Forward transform in both arguments.
inline CMat fft2_pair(const Grid& g, const CMat& c) {
    CMat t(c.rows(), c.cols());
    for (Eigen::Index j = 0; j < c.cols(); ++j) t.col(j) = fft_forward(g, CVec(c.col(j)));
    CMat out(c.rows(), c.cols());
    for (Eigen::Index i = 0; i < c.rows(); ++i) out.row(i) = fft_forward(g, CVec(t.row(i).transpose())).transpose();
    return out;
}

/// dV_k / (2 pi)^dim sum_k s0^(-k) mu^-(k, k) c: the smeared two-fermion
/// operator in momentum space.
inline CMat two_fermion_mu_smeared(const MomentumGrid& mg, const CVec& s0_hat, const CMat& c) {
    CMat out = CMat::Zero(c.rows(), c.cols());
    const double w = mg.dvk() / std::pow(2.0 * kPi, mg.grid().dim);
    for (std::size_t k = 0; k < mg.size(); ++k) {
        const cplx s = s0_hat[static_cast<Eigen::Index>(mg.negate(k))];
        if (s != cplx(0.0)) out += (w * s) * two_fermion_mu(mg, k, k, c);
    }
    return out;
}

/// Position-space multiplier -(sigma * s0) on one electron against its
/// momentum form: |F(-(sigma * s0) w) - mu_hat_smeared F(w)|_max.
inline double smeared_mu_residual(const MomentumGrid& mg, const Field& s0, const CVec& w) {
    const Field c = convolve(mg.kernel(), s0);
    const CVec lhs = fft_forward(mg.grid(), CVec(-(c.cast<cplx>().array() * w.array()).matrix()));
    const CVec rhs = mu_hat_smeared(mg, fft_forward(mg.grid(), s0)) * fft_forward(mg.grid(), w);
    return (lhs - rhs).cwiseAbs().maxCoeff();
}

struct TwoFermionReport {
    double pair_residual = 0.0;      ///< |C - dV w_sym|: the pair state carries w_sym
    double position_residual = 0.0;  ///< |dGamma(mu) pair - (c(y2) - c(y1)) C|
    double momentum_residual = 0.0;  ///< |F2(dGamma(mu) pair) - sum s0^ mu^-(k, k) F2(C)|
    double scale = 0.0;              ///< |F2(dGamma(mu) pair)|_max
};

/// dGamma(mu) on the electron-positron pair a*(w1 ⊕ 0) a*(0 ⊕ w2) +
/// a*(w2 ⊕ 0) a*(0 ⊕ w1), read off as a two-argument array and compared in
/// position space and after a two-argument transform.
inline TwoFermionReport two_fermion_check(const MomentumGrid& mg, const Field& s0, const CVec& w1, const CVec& w2) {
    const Grid& g = mg.grid();
    const OneParticleSpace h(g, 1);
    const FermionFockSpace fock(h, 2);
    const TwistKernel sigma = mg.kernel();
    const auto raw_positron = [&](const CVec& w) {
        CVec v = CVec::Zero(static_cast<Eigen::Index>(h.modes()));
        v.tail(w.size()) = w;
        return v;
    };
    const CVec vac = fock.vacuum();
    const CVec pair = fock.create(h.electron(w1)) * (fock.create(raw_positron(w2)) * vac) +
                      fock.create(h.electron(w2)) * (fock.create(raw_positron(w1)) * vac);
    const CVec out = fock.dgamma(stone_generator(h, sigma, {s0, Field::Zero(s0.size())})) * pair;

    const auto n = static_cast<Eigen::Index>(g.size());
    CMat c(n, n), d(n, n);
    for (std::size_t y1 = 0; y1 < g.size(); ++y1)
        for (std::size_t y2 = 0; y2 < g.size(); ++y2) {
            Occupation o;
            o.set(h.mode(Sector::Electron, 0, y1));
            o.set(h.mode(Sector::Positron, 0, y2));
            const Eigen::Index i = fock.index_of(o);
            c(static_cast<Eigen::Index>(y1), static_cast<Eigen::Index>(y2)) = pair[i];
            d(static_cast<Eigen::Index>(y1), static_cast<Eigen::Index>(y2)) = out[i];
        }
    const Field cs = convolve(sigma, s0);
    CMat expect(n, n);
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = 0; b < n; ++b) expect(a, b) = (cs[b] - cs[a]) * c(a, b);

    TwoFermionReport r;
    r.pair_residual = (c - g.cell_volume() * w_sym(w1, w2)).cwiseAbs().maxCoeff();
    r.position_residual = (d - expect).cwiseAbs().maxCoeff();
    const CMat dh = fft2_pair(g, d);
    r.momentum_residual = (dh - two_fermion_mu_smeared(mg, fft_forward(g, s0), fft2_pair(g, c))).cwiseAbs().maxCoeff();
    r.scale = dh.cwiseAbs().maxCoeff();
    return r;
}

} // namespace twistfield

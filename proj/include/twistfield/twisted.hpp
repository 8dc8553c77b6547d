// Copyright 2026 The twistfield Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file twisted.hpp
 * @brief The composite representation on F_a(h) ⊗ F_s(h0): twisted Weyl
 *        operators and fields, charged states, gauge generators and the
 *        identities relating them to the Dirac field.
 *
 * Every verify_* function returns the Frobenius norm of the difference of
 * the two sides of an operator identity, restricted to the sectors named in
 * its comment.
 */

#pragma once

#include "twistfield/boson.hpp"
#include "twistfield/fermion.hpp"
#include "twistfield/kron.hpp"

#include <algorithm>
#include <functional>
#include <iterator>
#include <optional>

namespace twistfield {

/// Pointwise product c(x) w(d, x) on a wave function of length D N.
inline CVec multiply(const Grid& g, const Field& c, const CVec& w) {
    require(w.size() % static_cast<Eigen::Index>(g.size()) == 0, ErrorKind::DimensionMismatch, "wave function length");
    CVec out = w;
    for (Eigen::Index i = 0; i < w.size(); ++i) out[i] *= c[i % static_cast<Eigen::Index>(g.size())];
    return out;
}

inline CVec multiply_phase(const Grid& g, const Field& c, const CVec& w) {
    CVec out = w;
    for (Eigen::Index i = 0; i < w.size(); ++i) out[i] *= std::polar(1.0, -c[i % static_cast<Eigen::Index>(g.size())]);
    return out;
}

/// Sites where some component of a wave function exceeds tol.
inline SiteSet wave_support(const Grid& g, const CVec& w, double tol) {
    std::vector<char> hit(g.size(), 0);
    for (Eigen::Index i = 0; i < w.size(); ++i)
        if (std::abs(w[i]) > tol) hit[static_cast<std::size_t>(i) % g.size()] = 1;
    SiteSet out;
    for (std::size_t x = 0; x < g.size(); ++x)
        if (hit[x]) out.push_back(x);
    return out;
}

// ---------------------------------------------------------------------------
// Charged vectors
// ---------------------------------------------------------------------------

/// Normalized antisymmetrized product a*(v_1) ... a*(v_n) Omega_f of
/// one-particle vectors, each lying in a single charge sector.
class ChargedVector {
public:
    ChargedVector(const OneParticleSpace& h, std::vector<CVec> vs) : vectors_(std::move(vs)) {
        for (const CVec& v : vectors_) {
            h.check(v);
            const double e = h.norm(h.electron(h.electron_part(v)));
            const double p = h.norm(h.electron(h.positron_part(v)));
            require(e == 0.0 || p == 0.0, ErrorKind::InvalidArgument, "charged vector factor mixes electron and positron sectors");
            require(e + p > 0.0, ErrorKind::InvalidArgument, "charged vector factor is zero");
            charge_ += e > 0.0 ? -1 : +1;
        }
        gram_ = gram(h, vectors_, vectors_);
        require(std::abs(gram_.determinant()) > 1e-14, ErrorKind::InvalidArgument, "charged vector factors are linearly dependent");
    }

    /// One electron with wave function w (length D N).
    static ChargedVector electron(const OneParticleSpace& h, const CVec& w) { return ChargedVector(h, {h.electron(w)}); }

    const std::vector<CVec>& vectors() const { return vectors_; }
    int charge() const { return charge_; }
    std::size_t particles() const { return vectors_.size(); }

    /// Normalized Fock vector.
    CVec fock_vector(const FermionFockSpace& f) const {
        require(vectors_.size() <= static_cast<std::size_t>(f.f_max()), ErrorKind::Truncation, "charged vector exceeds F_max");
        CVec v = f.product_state(vectors_);
        const double n = v.norm();
        require(std::abs(n * n - std::abs(gram_.determinant())) <= 1e-10 * std::max(1.0, n * n), ErrorKind::InvalidArgument,
                "charged vector normalization failed");
        return v / n;
    }

    /// det <v_i, U v_j> / det <v_i, v_j>.
    cplx determinant_ratio(const OneParticleSpace& h, const OneParticleOperator& u) const {
        std::vector<CVec> uv;
        for (const CVec& v : vectors_) uv.push_back(u.apply(v));
        return gram(h, vectors_, uv).determinant() / gram_.determinant();
    }

    SiteSet support(const Grid& g, double tol) const {
        SiteSet out;
        for (const CVec& v : vectors_) {
            const SiteSet s = wave_support(g, v, tol);
            SiteSet merged;
            std::set_union(out.begin(), out.end(), s.begin(), s.end(), std::back_inserter(merged));
            out = merged;
        }
        return out;
    }

private:
    static CMat gram(const OneParticleSpace& h, const std::vector<CVec>& a, const std::vector<CVec>& b) {
        CMat m(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(b.size()));
        for (std::size_t i = 0; i < a.size(); ++i)
            for (std::size_t j = 0; j < b.size(); ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = h.dot(a[i], b[j]);
        return m;
    }

    std::vector<CVec> vectors_;
    int charge_ = 0;
    CMat gram_;
};

// ---------------------------------------------------------------------------
// Twisted system
// ---------------------------------------------------------------------------

class TwistedSystem {
public:
    /// If p is given, sigma must be its discrete fundamental solution.
    TwistedSystem(FermionFockSpace fermi, BosonSector bose, TwistKernel sigma, std::optional<DiffOp> p = std::nullopt)
        : fermi_(std::move(fermi)), bose_(std::move(bose)), sigma_(std::move(sigma)), p_(p) {
        check_same_grid(grid(), bose_.grid());
        check_same_grid(grid(), sigma_.grid());
        if (p_) require(fundamental_defect() <= 1e-12, ErrorKind::InvalidArgument, "kernel is not a fundamental solution of " + p_->name());
    }

    const Grid& grid() const { return fermi_.one_particle().grid(); }
    const OneParticleSpace& one_particle() const { return fermi_.one_particle(); }
    const FermionFockSpace& fermi() const { return fermi_; }
    const BosonSector& bose() const { return bose_; }
    const TwistKernel& sigma() const { return sigma_; }
    const std::optional<DiffOp>& diffop() const { return p_; }
    Eigen::Index fermion_dim() const { return fermi_.dim(); }
    Eigen::Index boson_dim() const { return bose_.fock().dim(); }

    /// sup |P(sigma * f) - f| on a fixed probe (f minus its mean under the
    /// mean-zero convention).
    double fundamental_defect() const {
        require(p_.has_value(), ErrorKind::InvalidArgument, "no differential operator configured");
        Field f(static_cast<Eigen::Index>(grid().size()));
        for (std::size_t i = 0; i < grid().size(); ++i) f[static_cast<Eigen::Index>(i)] = std::sin(1.0 + 0.37 * static_cast<double>(i * i % 17));
        Field expect = f;
        if (sigma_.zero_mode() == ZeroMode::MeanZero) expect.array() -= f.mean();
        return (apply_diffop(*p_, grid(), convolve(sigma_, f)) - expect).cwiseAbs().maxCoeff();
    }

    // -- one-particle and fermionic pieces ---------------------------------

    Field twist_phase(const ScalarTestFunction& s) const { return convolve(sigma_, s.s0); }
    OneParticleOperator stone(const ScalarTestFunction& s) const { return stone_generator(one_particle(), sigma_, s); }
    OneParticleOperator twist(const ScalarTestFunction& s) const { return twist_unitary(one_particle(), sigma_, s); }
    SpMat mu_fock(const ScalarTestFunction& s) const { return fermi_.dgamma(stone(s)); }
    SpMat gamma_twist(const ScalarTestFunction& s) const { return fermi_.gamma(twist(s)); }

    // -- composite operators --------------------------------------------------

    KronOperator fermion_op(const SpMat& f) const { return KronOperator::fermion(f, boson_dim()); }
    KronOperator boson_op(const CMat& b) const { return KronOperator::boson(b, fermion_dim()); }
    KronOperator identity() const { return KronOperator::identity(fermion_dim(), boson_dim()); }

    KronOperator psi(const CVec& w) const { return fermion_op(fermi_.psi(w)); }
    KronOperator psi_selfdual(const CVec& v) const { return fermion_op(fermi_.psi_selfdual(v)); }
    KronOperator number() const { return fermion_op(fermi_.number_operator()); }
    KronOperator charge() const { return fermion_op(fermi_.charge_operator()); }

    /// W^lambda(s) = Gamma_a(u_{sigma,s}) ⊗ W(s).
    KronOperator twisted_weyl(const ScalarTestFunction& s) const { return {gamma_twist(s), bose_.weyl(s)}; }

    /// phi^lambda(s) = I ⊗ phi(s) + dGamma(mu_{sigma,s}) ⊗ I.
    KronOperator twisted_field(const ScalarTestFunction& s) const {
        return boson_op(CMat(bose_.segal(s))) + fermion_op(mu_fock(s));
    }

    /// a_{b,sigma}(s) = I ⊗ b(f) + 2^{-1/2} dGamma(mu) ⊗ I.
    KronOperator twisted_annihilator(const ScalarTestFunction& s) const {
        return boson_op(CMat(bose_.fock().annihilate(bose_.coefficients(s)))) +
               (1.0 / std::sqrt(2.0)) * fermion_op(mu_fock(s));
    }

    ScalarTestFunction apply_p(const ScalarTestFunction& s) const {
        require(p_.has_value(), ErrorKind::InvalidArgument, "gauge generator needs a differential operator");
        return apply_diffop(*p_, grid(), s);
    }

    /// rho(s) = phi^lambda(P s).
    KronOperator gauge_generator(const ScalarTestFunction& s) const { return twisted_field(apply_p(s)); }

    // -- sector masks ---------------------------------------------------------

    Mask safe_fermion() const { return fermi_.safe(); }
    Mask safe_boson() const { return bose_.fock().shell_at_most(bose_.fock().n_max() - 2); }
    Mask interior_boson() const { return bose_.fock().shell_at_most(bose_.fock().n_max() - 1); }

    // -- identities -------------------------------------------------------------

    /// W^lambda(s) psi(w) - psi(e^{-i sigma*s0} w) W^lambda(s) on n_f <= F_max - 1.
    double verify_twisted_weyl_relation(const ScalarTestFunction& s, const CVec& w) const {
        const KronOperator W = twisted_weyl(s);
        const CVec uw = multiply_phase(grid(), twist_phase(s), w);
        return (W * psi(w) - psi(uw) * W).norm({}, safe_fermion());
    }

    /// [phi^lambda(s), psi(w)] + psi((sigma*s0) w) on n_f <= F_max - 1.
    double verify_infinitesimal(const ScalarTestFunction& s, const CVec& w) const {
        const CVec cw = multiply(grid(), twist_phase(s), w);
        return (commutator(twisted_field(s), psi(w)) + psi(cw)).norm({}, safe_fermion());
    }

    /// [dGamma(mu), psi_hat(v)] - psi_hat(mu v) on n_f <= F_max - 1.
    double verify_infinitesimal_selfdual(const ScalarTestFunction& s, const CVec& v) const {
        const SpMat mu = mu_fock(s);
        const SpMat lhs = SpMat(mu * fermi_.psi_selfdual(v) - fermi_.psi_selfdual(v) * mu);
        const SpMat rhs = fermi_.psi_selfdual(stone(s).apply(v));
        return frobenius(restrict_sparse(SpMat(lhs - rhs), {}, safe_fermion()));
    }

    /// [phi^lambda(s), phi^lambda(t)] + i eta(s,t) on boson shells <= N_max - 1.
    double verify_field_commutator(const ScalarTestFunction& s, const ScalarTestFunction& t) const {
        const KronOperator c = commutator(twisted_field(s), twisted_field(t)) +
                               cplx(0.0, symplectic_form(s, t, grid())) * identity();
        return c.norm({}, {}, {}, interior_boson());
    }

    /**
     * W^lambda(s) W^lambda(t) e^{-i eta(s,t)/2} - W^lambda(s+t) on boson
     * shells <= N_max - 2, with the boson Weyl columns evaluated on a guard
     * band of extra shells.
     */
    double verify_cocycle(const ScalarTestFunction& s, const ScalarTestFunction& t, int guard) const {
        const auto& fk = bose_.fock();
        const int cs = fk.n_max() - 2;
        const CVec a = bose_.coefficients(s), b = bose_.coefficients(t);
        const Eigen::Index nl = fk.shell_dim(cs);
        const CMat lhs = fk.weyl_columns(-a, guard, cs).adjoint() * fk.weyl_columns(b, guard, cs) *
                         std::polar(1.0, -0.5 * symplectic_form(s, t, grid()));
        const CMat rhs = fk.weyl_columns(a + b, guard, cs).topRows(nl);
        KronOperator r(SpMat(gamma_twist(s) * gamma_twist(t)), lhs);
        r.add(gamma_twist(s + t), -rhs);
        return r.norm();
    }

    /// W^lambda(s) W^lambda(-s) - I.
    double verify_weyl_inverse(const ScalarTestFunction& s) const {
        return (twisted_weyl(s) * twisted_weyl(-s) - identity()).norm();
    }

    /**
     * exp(i phi^lambda(s)) - W^lambda(s). The generator is block diagonal
     * over fermion basis states (dGamma(mu) is diagonal there); the listed
     * fermion states' blocks are exponentiated independently.
     */
    double verify_exponential(const ScalarTestFunction& s, const std::vector<Eigen::Index>& fermion_states) const {
        const SpMat mu = mu_fock(s);
        const CMat phi = CMat(bose_.segal(s));
        const CMat wb = bose_.weyl(s);
        const SpMat gu = gamma_twist(s);
        double acc = 0.0;
        for (Eigen::Index i : fermion_states) {
            const CMat gen = phi + mu.coeff(i, i) * CMat::Identity(phi.rows(), phi.cols());
            const double r = (expi_hermitian(gen) - gu.coeff(i, i) * wb).norm();
            acc += r * r;
        }
        return std::sqrt(acc);
    }

    /// [phi^lambda(s), N_f ⊗ I] and [phi^lambda(s), Q ⊗ I].
    double verify_conservation(const ScalarTestFunction& s) const {
        const KronOperator f = twisted_field(s);
        return std::hypot(commutator(f, number()).norm(), commutator(f, charge()).norm());
    }

    /**
     * psi(e^{-i sigma*s0} w) W^{lambda,q}(s) - W^{lambda,q-1}(s) psi(w),
     * with W^{lambda,q} the restriction to the charge-q fermion sector.
     */
    double verify_sector_shift(const ScalarTestFunction& s, const CVec& w, int q) const {
        const SpMat pq = charge_projector(q), pq1 = charge_projector(q - 1);
        const CMat wb = bose_.weyl(s);
        const SpMat gu = gamma_twist(s);
        const CVec uw = multiply_phase(grid(), twist_phase(s), w);
        const KronOperator lhs = psi(uw) * KronOperator(SpMat(gu * pq), wb);
        const KronOperator rhs = KronOperator(SpMat(pq1 * gu), wb) * psi(w);
        return (lhs - rhs).norm({}, safe_fermion());
    }

    /// a_{b,sigma}(s) (Omega_f ⊗ Omega_b).
    double verify_annihilates_vacuum(const ScalarTestFunction& s) const {
        return twisted_annihilator(s).apply(vacuum()).norm();
    }

    /// On the one-electron sector dGamma(mu) is multiplication by -(sigma*s0).
    double verify_one_electron_action(const ScalarTestFunction& s, const CVec& w) const {
        const CVec st = fermi_.one_particle_state(one_particle().electron(w));
        const CVec expect = fermi_.one_particle_state(one_particle().electron(multiply(grid(), -twist_phase(s), w)));
        return (mu_fock(s) * st - expect).norm();
    }

    /// [rho(s), psi(w)] + psi(s0 w) on n_f <= F_max - 1.
    double verify_gauge_commutator(const ScalarTestFunction& s, const CVec& w) const {
        return (commutator(gauge_generator(s), psi(w)) + psi(multiply(grid(), s.s0, w))).norm({}, safe_fermion());
    }

    /// e^{i rho(s)} psi(w) e^{-i rho(s)} - psi(e^{-i s0} w).
    double verify_gauge_exponentiated(const ScalarTestFunction& s, const CVec& w) const {
        const ScalarTestFunction ps = apply_p(s);
        const KronOperator u = twisted_weyl(ps);
        return (u * psi(w) * u.adjoint() - psi(multiply_phase(grid(), s.s0, w))).norm({}, safe_fermion());
    }

    /// [rho(s), psi(w)] itself, for locality witnesses.
    double gauge_commutator_norm(const ScalarTestFunction& s, const CVec& w) const {
        return commutator(gauge_generator(s), psi(w)).norm({}, safe_fermion());
    }

    // -- states -----------------------------------------------------------------

    CMat vacuum() const { return product_state(fermi_.vacuum(), bose_.fock().vacuum()); }
    CMat state(const ChargedVector& omega) const { return product_state(omega.fock_vector(fermi_), bose_.fock().vacuum()); }

    struct StateValue {
        cplx matrix;
        cplx closed_form;
        double difference() const { return std::abs(matrix - closed_form); }
    };

    /// <Omega^q, W^lambda(s) Omega^q> as a matrix expectation and as
    /// det <v_i, u v_j> / det <v_i, v_j> times the Fock functional.
    StateValue charged_state_eval(const ChargedVector& omega, const ScalarTestFunction& s) const {
        const cplx m = expectation(twisted_weyl(s), state(omega));
        const cplx c = omega.determinant_ratio(one_particle(), twist(s)) * bose_.fock_functional(s);
        return {m, c};
    }

    /// Untwisted value <Omega_b, W(s) Omega_b>, from the matrix.
    cplx reference_value(const ScalarTestFunction& s) const { return bose_.weyl(s)(0, 0); }

    /// <Omega^q, phi^lambda(s^1) ... phi^lambda(s^m) Omega^q>.
    cplx npoint(const ChargedVector& omega, const std::vector<ScalarTestFunction>& ss) const {
        require(ss.size() <= static_cast<std::size_t>(bose_.fock().n_max()), ErrorKind::Truncation, "m exceeds N_max");
        const CMat psi0 = state(omega);
        CMat v = psi0;
        for (std::size_t j = ss.size(); j-- > 0;) v = twisted_field(ss[j]).apply(v);
        return (psi0.conjugate().cwiseProduct(v)).sum();
    }

    // -- translations -------------------------------------------------------------

    /// pi(W(s_a)) - V_a pi(W(s)) V_a^*, V_a = Gamma_a(U_a) ⊗ U^omega_a.
    double verify_translation(const ScalarTestFunction& s, const Shift& a) const {
        const SpMat ta = fermi_.translate(a);
        const KronOperator v(ta, bose_.translation(a));
        return (twisted_weyl(translate(grid(), s, a)) - v * twisted_weyl(s) * v.adjoint()).norm();
    }

    SpMat charge_projector(int q) const {
        CVec d(fermion_dim());
        for (Eigen::Index i = 0; i < fermion_dim(); ++i) d[i] = fermi_.charge(i) == q ? 1.0 : 0.0;
        return sparse_diagonal(d);
    }

private:
    FermionFockSpace fermi_;
    BosonSector bose_;
    TwistKernel sigma_;
    std::optional<DiffOp> p_;
};

// ---------------------------------------------------------------------------
// Localization
// ---------------------------------------------------------------------------

struct LocalizationReport {
    bool premise = false;     ///< support condition of the localization statement
    double difference = 0.0;  ///< |omega_{sigma,q}(W) - omega(W)|
    bool holds(double tol) const { return !premise || difference <= tol; }
};

/// Premise supp(s) ∩ (supp(Omega) + supp(sigma)) = ∅, compared at W(s).
inline LocalizationReport localization_report(const TwistedSystem& sys, const ChargedVector& omega, const ScalarTestFunction& s,
                                              double tol) {
    const Grid& g = sys.grid();
    const SiteSet reach = minkowski_sum(g, omega.support(g, tol), support(sys.sigma().values(), tol));
    LocalizationReport r;
    r.premise = disjoint(support(s, tol), reach);
    r.difference = std::abs(sys.charged_state_eval(omega, s).matrix - sys.reference_value(s));
    return r;
}

/// Premise supp(s) ∩ supp(Omega) = ∅, compared at W(P s).
inline LocalizationReport localization_report_p(const TwistedSystem& sys, const ChargedVector& omega, const ScalarTestFunction& s,
                                                double tol) {
    const ScalarTestFunction ps = sys.apply_p(s);
    LocalizationReport r;
    r.premise = disjoint(support(s, tol), omega.support(sys.grid(), tol));
    r.difference = std::abs(sys.charged_state_eval(omega, ps).matrix - sys.reference_value(ps));
    return r;
}

// ---------------------------------------------------------------------------
// m-point functions
// ---------------------------------------------------------------------------

/// <Omega_b, phi(s^1) ... phi(s^m) Omega_b> for the Fock state by Wick's
/// theorem with <phi(a) phi(b)> = <f_a, f_b> / 2.
inline cplx fock_moment(const Grid& g, const std::vector<ScalarTestFunction>& ss) {
    if (ss.empty()) return 1.0;
    if (ss.size() % 2) return 0.0;
    const double dv = g.cell_volume();
    const CVec f0 = ss.front().smeared();
    cplx acc = 0.0;
    for (std::size_t j = 1; j < ss.size(); ++j) {
        std::vector<ScalarTestFunction> rest;
        for (std::size_t k = 1; k < ss.size(); ++k)
            if (k != j) rest.push_back(ss[k]);
        acc += 0.5 * dv * f0.dot(ss[j].smeared()) * fock_moment(g, rest);
    }
    return acc;
}

/// <Omega^1_f, mu_{s^1} ... mu_{s^k} Omega^1_f> for a normalized single
/// particle vector v.
inline cplx multiplier_moment(const TwistedSystem& sys, const CVec& v, const std::vector<ScalarTestFunction>& ss) {
    const auto& h = sys.one_particle();
    CVec x = v;
    for (std::size_t j = ss.size(); j-- > 0;) x = sys.stone(ss[j]).apply(x);
    return h.dot(v, x) / h.dot(v, v);
}

/// Sum over splittings m = i ∪ j of w_{|i|}(s^i) w^sigma_{|j|}(s^j).
inline cplx npoint_oracle(const TwistedSystem& sys, const ChargedVector& omega, const std::vector<ScalarTestFunction>& ss) {
    require(omega.particles() == 1, ErrorKind::InvalidArgument, "the partition oracle is for one-particle states");
    const std::size_t m = ss.size();
    cplx acc = 0.0;
    for (std::size_t mask = 0; mask < (std::size_t{1} << m); ++mask) {
        std::vector<ScalarTestFunction> bi, fj;
        for (std::size_t k = 0; k < m; ++k) ((mask >> k) & 1 ? fj : bi).push_back(ss[k]);
        const cplx wb = fock_moment(sys.grid(), bi);
        if (wb == cplx(0.0)) continue;
        acc += wb * multiplier_moment(sys, omega.vectors().front(), fj);
    }
    return acc;
}

/// |w^sigma_2(s1, s2) - w^sigma_1(s1) w^sigma_1(s2)|.
inline double external_potential_gap(const TwistedSystem& sys, const ChargedVector& omega, const ScalarTestFunction& s1,
                                      const ScalarTestFunction& s2) {
    require(omega.particles() == 1, ErrorKind::InvalidArgument, "the external potential comparison is for one-particle states");
    const CVec& v = omega.vectors().front();
    return std::abs(multiplier_moment(sys, v, {s1, s2}) - multiplier_moment(sys, v, {s1}) * multiplier_moment(sys, v, {s2}));
}

// ---------------------------------------------------------------------------
// Worked models
// ---------------------------------------------------------------------------

/// Constant kernel: phi^lambda(s) - I ⊗ phi(s) = sign <s0> Q ⊗ I.
struct LebesgueReport {
    int sign = +1;                  ///< sign relating phi^lambda - phi to <s0> Q
    double field_residual = 0.0;    ///< |phi^lambda - phi - sign <s0> Q|
    double q0_residual = 0.0;       ///< |phi^lambda - phi| on the q = 0 sector
    double sector_residual = 0.0;   ///< |phi^lambda - phi - sign q <s0>| on every sector
    double commutator_residual = 0.0;  ///< |[phi^lambda, psi] + sign <s0> psi|
    double intertwiner_residual = 0.0; ///< |psi W^lambda - e^{i sign <s0>} W^lambda psi|
};

inline LebesgueReport model_lebesgue_check(const TwistedSystem& sys, const ScalarTestFunction& s, const CVec& w) {
    require(sys.sigma().kind() == KernelKind::Constant, ErrorKind::InvalidArgument, "model_lebesgue_check needs the constant kernel");
    const double mean = integral(sys.grid(), s.s0);
    LebesgueReport r;
    // The constant kernel integrates: sigma*s0 = +<s0>, so mu = <s0> Q.
    const double c = sys.twist_phase(s).mean();
    r.sign = c * mean >= 0.0 ? +1 : -1;
    const KronOperator diff = sys.twisted_field(s) - sys.boson_op(CMat(sys.bose().segal(s)));
    r.field_residual = (diff - (r.sign * mean) * sys.charge()).norm();
    r.q0_residual = diff.norm({}, sys.fermi().charge_equals(0));
    double acc = 0.0;
    for (int q = -sys.fermi().f_max(); q <= sys.fermi().f_max(); ++q) {
        const double v = (diff - (r.sign * q * mean) * sys.identity()).norm({}, sys.fermi().charge_equals(q));
        acc += v * v;
    }
    r.sector_residual = std::sqrt(acc);
    r.commutator_residual = (commutator(sys.twisted_field(s), sys.psi(w)) + (r.sign * mean) * sys.psi(w)).norm({}, sys.safe_fermion());
    const KronOperator W = sys.twisted_weyl(s);
    r.intertwiner_residual = (sys.psi(w) * W - std::polar(1.0, r.sign * mean) * (W * sys.psi(w))).norm({}, sys.safe_fermion());
    return r;
}

/// sigma * s0 by direct double summation of the kernel samples.
inline Field direct_convolution(const TwistKernel& sigma, const Field& f) {
    const Grid& g = sigma.grid();
    Field out = Field::Zero(f.size());
    for (std::size_t x = 0; x < g.size(); ++x) {
        double acc = 0.0;
        for (std::size_t y = 0; y < g.size(); ++y) {
            auto c = g.coords(x);
            const auto cy = g.coords(y);
            for (int k = 0; k < g.dim; ++k) c[k] = ((c[k] - cy[k]) % g.n + g.n) % g.n;
            const std::size_t d = g.index(c);
            acc += sigma.values()[static_cast<Eigen::Index>(d)] * f[static_cast<Eigen::Index>(y)];
        }
        out[static_cast<Eigen::Index>(x)] = g.cell_volume() * acc;
    }
    return out;
}

/// One-electron state: matrix expectation versus dV sum |w|^2 e^{-i sigma*s0}
/// times the Fock functional, with sigma*s0 summed directly.
inline TwistedSystem::StateValue model_charged_state_quadrature(const TwistedSystem& sys, const CVec& w, const ScalarTestFunction& s) {
    const auto omega = ChargedVector::electron(sys.one_particle(), w);
    const cplx m = expectation(sys.twisted_weyl(s), sys.state(omega));
    const Field c = direct_convolution(sys.sigma(), s.s0);
    const Grid& g = sys.grid();
    cplx q = 0.0;
    double norm = 0.0;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        const double p = std::norm(w[i]);
        q += p * std::polar(1.0, -c[i % static_cast<Eigen::Index>(g.size())]);
        norm += p;
    }
    return {m, q / norm * sys.bose().fock_functional(s)};
}

} // namespace twistfield

// Copyright 2026 The twistfield Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file coulomb.hpp
 * @brief Transverse photon sector of the Coulomb-gauge model: projector,
 *        symplectic form, vector potential, electric field and charge density.
 *
 * Vector fields are N x dim real matrices, one column per component. All
 * derivatives are spectral with the Nyquist component zeroed, so
 * P_tr grad = 0 and div P_tr = 0 hold to roundoff.
 *
 * The composite space F_a(h) ⊗ h_0 ⊗ h_tr is realized with one bosonic Fock
 * space over the orthogonal sum of the scalar and transverse mode spans;
 * F_s(A ⊕ B) = F_s(A) ⊗ F_s(B), truncated by total occupation.
 */

#pragma once

#include "twistfield/twisted.hpp"

#include <ostream>

namespace twistfield {

using VectorField = RMat;

inline void check_vector_field(const Grid& g, const VectorField& f, const char* what = "vector field") {
    require(f.rows() == static_cast<Eigen::Index>(g.size()) && f.cols() == g.dim, ErrorKind::DimensionMismatch,
            std::string(what) + " must be N x dim");
    require(all_finite(f), ErrorKind::NonFinite, std::string(what) + " has non-finite entries");
}

struct VectorTestFunction {
    VectorField f0, f1;

    static VectorTestFunction zero(const Grid& g) {
        const auto n = static_cast<Eigen::Index>(g.size());
        return {VectorField::Zero(n, g.dim), VectorField::Zero(n, g.dim)};
    }
    VectorTestFunction operator-() const { return {-f0, -f1}; }
    friend VectorTestFunction operator+(const VectorTestFunction& a, const VectorTestFunction& b) { return {a.f0 + b.f0, a.f1 + b.f1}; }
    friend VectorTestFunction operator*(double c, const VectorTestFunction& a) { return {c * a.f0, c * a.f1}; }
};

// ---------------------------------------------------------------------------
// Spectral vector calculus
// ---------------------------------------------------------------------------

inline VectorField gradient(const Grid& g, const Field& s) {
    check_field(g, s);
    const CVec sh = fft_forward(g, s);
    VectorField out(s.size(), g.dim);
    for (int a = 0; a < g.dim; ++a) {
        CVec d(sh.size());
        for (std::size_t k = 0; k < g.size(); ++k) d[static_cast<Eigen::Index>(k)] = kI * g.derivative_wavevector(k)[a] * sh[static_cast<Eigen::Index>(k)];
        out.col(a) = fft_inverse(g, d).real();
    }
    return out;
}

inline Field divergence(const Grid& g, const VectorField& f) {
    check_vector_field(g, f);
    CVec acc = CVec::Zero(f.rows());
    for (int a = 0; a < g.dim; ++a) {
        const CVec fh = fft_forward(g, Field(f.col(a)));
        for (std::size_t k = 0; k < g.size(); ++k) acc[static_cast<Eigen::Index>(k)] += kI * g.derivative_wavevector(k)[a] * fh[static_cast<Eigen::Index>(k)];
    }
    return fft_inverse(g, acc).real();
}

/// div grad, consistent with the first derivatives above.
inline Field laplacian(const Grid& g, const Field& s) { return divergence(g, gradient(g, s)); }

/// delta_ij - k_i k_j / |k|^2 spectrally; modes with vanishing derivative
/// wavevector (k = 0 in particular) pass through unchanged.
inline VectorField transverse_projector(const Grid& g, const VectorField& f) {
    require(g.dim >= 2, ErrorKind::InvalidArgument, "the transverse projector needs dim >= 2");
    check_vector_field(g, f);
    std::vector<CVec> fh;
    for (int a = 0; a < g.dim; ++a) fh.push_back(fft_forward(g, Field(f.col(a))));
    for (std::size_t k = 0; k < g.size(); ++k) {
        const auto kv = g.derivative_wavevector(k);
        double k2 = 0.0;
        for (int a = 0; a < g.dim; ++a) k2 += kv[a] * kv[a];
        if (k2 == 0.0) continue;
        const auto i = static_cast<Eigen::Index>(k);
        cplx kf = 0.0;
        for (int a = 0; a < g.dim; ++a) kf += kv[a] * fh[static_cast<std::size_t>(a)][i];
        for (int a = 0; a < g.dim; ++a) fh[static_cast<std::size_t>(a)][i] -= kv[a] * kf / k2;
    }
    VectorField out(f.rows(), g.dim);
    for (int a = 0; a < g.dim; ++a) out.col(a) = fft_inverse(g, fh[static_cast<std::size_t>(a)]).real();
    return out;
}

inline double vector_dot(const Grid& g, const VectorField& a, const VectorField& b) { return g.cell_volume() * a.cwiseProduct(b).sum(); }

/// dV sum (f1 . P g0 - g1 . P f0).
inline double eta_tr(const Grid& g, const VectorTestFunction& f, const VectorTestFunction& h) {
    return vector_dot(g, f.f1, transverse_projector(g, h.f0)) - vector_dot(g, h.f1, transverse_projector(g, f.f0));
}

/// P_tr(f0 + i f1), flattened component-major.
inline CVec transverse_smeared(const Grid& g, const VectorTestFunction& f) {
    const VectorField p0 = transverse_projector(g, f.f0), p1 = transverse_projector(g, f.f1);
    CVec out(p0.size());
    for (Eigen::Index i = 0; i < p0.size(); ++i) out[i] = cplx(p0.data()[i], p1.data()[i]);
    return out;
}

// ---------------------------------------------------------------------------
// Transverse sector on its own
// ---------------------------------------------------------------------------

class TransverseSector {
public:
    /// Modes spanned by P_tr(f0 + i f1) of the given test functions.
    TransverseSector(const Grid& g, const std::vector<VectorTestFunction>& fs, int n_max, double span_tol = 1e-10)
        : grid_(g), basis_(g.cell_volume(), generators(g, fs), span_tol), fock_(basis_.size(), n_max) {}

    const Grid& grid() const { return grid_; }
    const BosonModeBasis& basis() const { return basis_; }
    const BosonFockSpace& fock() const { return fock_; }

    CVec coefficients(const VectorTestFunction& f) const { return basis_.coefficients(transverse_smeared(grid_, f), "transverse test function"); }
    SpMat segal(const VectorTestFunction& f) const { return fock_.segal(coefficients(f)); }
    SpMat a_field(const VectorField& f0) const { return segal({f0, zero_field()}); }
    SpMat a_dot(const VectorField& f1) const { return segal({zero_field(), f1}); }
    CMat weyl(const VectorTestFunction& f) const { return fock_.weyl(coefficients(f)); }

    /// Largest spectral divergence among the mode vectors.
    double max_divergence() const {
        double worst = 0.0;
        for (int j = 0; j < basis_.size(); ++j) {
            const CVec& v = basis_.mode(j);
            VectorField re(static_cast<Eigen::Index>(grid_.size()), grid_.dim), im = re;
            for (Eigen::Index i = 0; i < v.size(); ++i) {
                re.data()[i] = v[i].real();
                im.data()[i] = v[i].imag();
            }
            worst = std::max({worst, divergence(grid_, re).cwiseAbs().maxCoeff(), divergence(grid_, im).cwiseAbs().maxCoeff()});
        }
        return worst;
    }

    static std::vector<CVec> generators(const Grid& g, const std::vector<VectorTestFunction>& fs) {
        std::vector<CVec> out;
        for (const auto& f : fs) out.push_back(transverse_smeared(g, f));
        return out;
    }

private:
    VectorField zero_field() const { return VectorField::Zero(static_cast<Eigen::Index>(grid_.size()), grid_.dim); }

    Grid grid_;
    BosonModeBasis basis_;
    BosonFockSpace fock_;
};

/// CSV rows: mode, site, component, re, im.
inline void write_transverse_basis_csv(std::ostream& os, const TransverseSector& t) {
    const auto n = static_cast<Eigen::Index>(t.grid().size());
    os << "mode,site,component,re,im\n";
    for (int j = 0; j < t.basis().size(); ++j)
        for (Eigen::Index i = 0; i < t.basis().length(); ++i) {
            const cplx v = t.basis().mode(j)[i];
            os << j << ',' << i % n << ',' << i / n << ',' << v.real() << ',' << v.imag() << '\n';
        }
}

// ---------------------------------------------------------------------------
// Coulomb-gauge composite system
// ---------------------------------------------------------------------------

class CoulombSystem {
public:
    /// The bosonic span is generated by the scalar test functions and the
    /// transverse parts of the vector test functions.
    CoulombSystem(FermionFockSpace fermi, const std::vector<ScalarTestFunction>& scalars, const std::vector<VectorTestFunction>& vectors,
                  int n_max, TwistKernel sigma, std::optional<DiffOp> p = DiffOp::neg_laplacian())
        : fermi_(std::move(fermi)), sigma_(std::move(sigma)), p_(p), basis_(make_basis(grid(), scalars, vectors)), fock_(basis_.size(), n_max) {
        require(grid().dim >= 2, ErrorKind::InvalidArgument, "the Coulomb-gauge model needs dim >= 2");
        check_same_grid(grid(), sigma_.grid());
        if (p_) {
            // Same probe as TwistedSystem::fundamental_defect.
            Field f(static_cast<Eigen::Index>(grid().size()));
            for (std::size_t i = 0; i < grid().size(); ++i) f[static_cast<Eigen::Index>(i)] = std::sin(1.0 + 0.37 * static_cast<double>(i * i % 17));
            Field expect = f;
            if (sigma_.zero_mode() == ZeroMode::MeanZero) expect.array() -= f.mean();
            require((apply_diffop(*p_, grid(), convolve(sigma_, f)) - expect).cwiseAbs().maxCoeff() <= 1e-12, ErrorKind::InvalidArgument,
                    "kernel is not a fundamental solution of " + p_->name());
        }
    }

    const Grid& grid() const { return fermi_.one_particle().grid(); }
    const FermionFockSpace& fermi() const { return fermi_; }
    const BosonFockSpace& fock() const { return fock_; }
    const BosonModeBasis& basis() const { return basis_; }
    const TwistKernel& sigma() const { return sigma_; }
    Eigen::Index fermion_dim() const { return fermi_.dim(); }
    Eigen::Index boson_dim() const { return fock_.dim(); }

    // -- coefficients in the joint mode basis ----------------------------------

    CVec scalar_coefficients(const ScalarTestFunction& s) const {
        check_test_function(grid(), s);
        CVec v = CVec::Zero(basis_.length());
        v.head(static_cast<Eigen::Index>(grid().size())) = s.smeared();
        return basis_.coefficients(v, "scalar test function");
    }
    CVec transverse_coefficients(const VectorTestFunction& f) const {
        CVec v = CVec::Zero(basis_.length());
        v.tail(basis_.length() - static_cast<Eigen::Index>(grid().size())) = transverse_smeared(grid(), f);
        return basis_.coefficients(v, "transverse test function");
    }

    // -- operators ---------------------------------------------------------------

    KronOperator fermion_op(const SpMat& f) const { return KronOperator::fermion(f, boson_dim()); }
    KronOperator boson_op(const SpMat& b) const { return KronOperator::boson(CMat(b), fermion_dim()); }
    KronOperator identity() const { return KronOperator::identity(fermion_dim(), boson_dim()); }
    KronOperator psi(const CVec& w) const { return fermion_op(fermi_.psi(w)); }

    KronOperator phi(const ScalarTestFunction& s) const { return boson_op(fock_.segal(scalar_coefficients(s))); }
    KronOperator a_field(const VectorField& f0) const { return boson_op(fock_.segal(transverse_coefficients({f0, zero_vector()}))); }
    KronOperator a_dot(const VectorField& f1) const { return boson_op(fock_.segal(transverse_coefficients({zero_vector(), f1}))); }

    OneParticleOperator stone(const ScalarTestFunction& s) const { return stone_generator(fermi_.one_particle(), sigma_, s); }
    OneParticleOperator twist(const ScalarTestFunction& s) const { return twist_unitary(fermi_.one_particle(), sigma_, s); }

    /// phi^lambda(s0, 0) on the composite space.
    KronOperator phi_lambda(const Field& s0) const {
        const ScalarTestFunction s{s0, Field::Zero(s0.size())};
        return phi(s) + fermion_op(fermi_.dgamma(stone(s)));
    }

    /// W^lambda(s) ⊗ I_tr.
    KronOperator twisted_weyl(const ScalarTestFunction& s) const { return {fermi_.gamma(twist(s)), fock_.weyl(scalar_coefficients(s))}; }
    /// I ⊗ I ⊗ W_tr(f).
    KronOperator weyl_tr(const VectorTestFunction& f) const { return KronOperator::boson(fock_.weyl(transverse_coefficients(f)), fermion_dim()); }

    /// V^lambda(f) = W^lambda(div f, 0) W_tr(-f, 0).
    KronOperator v_lambda(const VectorField& f) const {
        const ScalarTestFunction d{divergence(grid(), f), Field::Zero(f.rows())};
        return twisted_weyl(d) * weyl_tr({-f, zero_vector()});
    }

    /// E^lambda(f) = phi^lambda(div f) - A_dot(f).
    KronOperator e_lambda(const VectorField& f) const { return phi_lambda(divergence(grid(), f)) - a_dot(f); }

    /// div E^lambda(s0) = -E^lambda(grad s0).
    KronOperator div_e(const Field& s0) const { return -1.0 * e_lambda(gradient(grid(), s0)); }

    Mask safe_fermion() const { return fermi_.safe(); }
    Mask interior_boson() const { return fock_.shell_at_most(fock_.n_max() - 1); }

    // -- identities ----------------------------------------------------------------

    /// [A(f0), A_dot(f1)] - i dV sum f0 . P_tr f1 on interior shells.
    double verify_a_ccr(const VectorField& f0, const VectorField& f1) const {
        const double expect = vector_dot(grid(), f0, transverse_projector(grid(), f1));
        return (commutator(a_field(f0), a_dot(f1)) - cplx(0.0, expect) * identity()).norm({}, {}, {}, interior_boson());
    }

    /// |A(grad s0)| + |A_dot(grad s0)|.
    double coulomb_condition(const Field& s0) const {
        const VectorField gs = gradient(grid(), s0);
        return a_field(gs).norm() + a_dot(gs).norm();
    }

    /// [phi(s), A(f0)] and [phi(s), A_dot(f1)] on interior shells; the joint
    /// truncation couples the factors only on the top shell.
    double verify_factor_independence(const ScalarTestFunction& s, const VectorTestFunction& f) const {
        const Mask in = interior_boson();
        return std::hypot(commutator(phi(s), a_field(f.f0)).norm({}, {}, {}, in), commutator(phi(s), a_dot(f.f1)).norm({}, {}, {}, in));
    }

    /// [psi(w), W_tr(f)].
    double verify_psi_transverse(const CVec& w, const VectorTestFunction& f) const { return commutator(psi(w), weyl_tr(f)).norm(); }

    /// V(f) psi(w) - psi(e^{-i sigma * div f} w) V(f) on safe fermion sectors.
    double verify_v_relation(const VectorField& f, const CVec& w) const {
        const KronOperator v = v_lambda(f);
        const CVec uw = multiply_phase(grid(), convolve(sigma_, divergence(grid(), f)), w);
        return (v * psi(w) - psi(uw) * v).norm({}, safe_fermion());
    }

    /// V(-grad s0) psi(w) - psi(e^{-i s0} w) V(-grad s0) on safe fermion sectors.
    double verify_v_gauge(const Field& s0, const CVec& w) const {
        const KronOperator v = v_lambda(-gradient(grid(), s0));
        return (v * psi(w) - psi(multiply_phase(grid(), s0, w)) * v).norm({}, safe_fermion());
    }

    /// [E(f), psi(w)] + psi((sigma * div f) w).
    double verify_e_commutator(const VectorField& f, const CVec& w) const {
        const CVec cw = multiply(grid(), convolve(sigma_, divergence(grid(), f)), w);
        return (commutator(e_lambda(f), psi(w)) + psi(cw)).norm({}, safe_fermion());
    }

    /// |[E(f), psi(w)]|, for locality witnesses.
    double e_commutator_norm(const VectorField& f, const CVec& w) const { return commutator(e_lambda(f), psi(w)).norm({}, safe_fermion()); }

    /// div E(s0) + phi^lambda(Laplacian s0).
    double verify_div_e_form(const Field& s0) const { return (div_e(s0) + phi_lambda(laplacian(grid(), s0))).norm(); }

    /// [div E(s0), psi(w)] + psi(s0 w).
    double verify_div_e_commutator(const Field& s0, const CVec& w) const {
        return (commutator(div_e(s0), psi(w)) + psi(multiply(grid(), s0, w))).norm({}, safe_fermion());
    }

    double div_e_commutator_norm(const Field& s0, const CVec& w) const { return commutator(div_e(s0), psi(w)).norm({}, safe_fermion()); }

    /// e^{i div E(s0)} psi(w) e^{-i div E(s0)} - psi(e^{-i s0} w), with
    /// e^{i div E(s0)} = W^lambda(-Laplacian s0, 0) under the Coulomb condition.
    double verify_div_e_exponentiated(const Field& s0, const CVec& w) const {
        const KronOperator u = twisted_weyl({-laplacian(grid(), s0), Field::Zero(s0.size())});
        return (u * psi(w) * u.adjoint() - psi(multiply_phase(grid(), s0, w))).norm({}, safe_fermion());
    }

    /// [div E(s0), A(f)] on interior shells.
    double verify_div_e_a(const Field& s0, const VectorField& f) const {
        return commutator(div_e(s0), a_field(f)).norm({}, {}, {}, interior_boson());
    }

private:
    VectorField zero_vector() const { return VectorField::Zero(static_cast<Eigen::Index>(grid().size()), grid().dim); }

    static BosonModeBasis make_basis(const Grid& g, const std::vector<ScalarTestFunction>& scalars, const std::vector<VectorTestFunction>& vectors) {
        const auto n = static_cast<Eigen::Index>(g.size());
        const Eigen::Index len = n * (1 + g.dim);
        std::vector<CVec> gens;
        for (const auto& s : scalars) {
            CVec v = CVec::Zero(len);
            v.head(n) = s.smeared();
            gens.push_back(v);
        }
        for (const auto& f : vectors) {
            CVec v = CVec::Zero(len);
            v.tail(len - n) = transverse_smeared(g, f);
            gens.push_back(v);
        }
        return BosonModeBasis(g.cell_volume(), gens);
    }

    FermionFockSpace fermi_;
    TwistKernel sigma_;
    std::optional<DiffOp> p_;
    BosonModeBasis basis_;
    BosonFockSpace fock_;
};

} // namespace twistfield

// Copyright 2026 The twistfield Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file boson.hpp
 * @brief Truncated bosonic Fock space over a small orthonormal mode set,
 *        with Segal fields and Weyl operators.
 *
 * A one-particle vector f is represented through its coefficients
 * c_j = <e_j, f> in the mode basis; b(f) = sum_j conj(c_j) b_j, so that
 * [b(f), b*(g)] = <f, g> and phi(s) = (b(f) + b*(f)) / sqrt(2) with
 * f = s0 + i s1.
 */

#pragma once

#include "twistfield/lattice.hpp"
#include "twistfield/linalg.hpp"

#include <Eigen/Eigenvalues>

#include <map>

namespace twistfield {

class BosonModeBasis {
public:
    static constexpr int kMaxModes = 6;

    /**
     * Gram-Schmidt (with one reorthogonalization pass) over the generators
     * under <u, v> = weight * u^dagger v. Generators whose residual falls
     * below drop_tol times their norm are skipped.
     */
    BosonModeBasis(double weight, const std::vector<CVec>& generators, double span_tol = 1e-10, double drop_tol = 1e-10)
        : weight_(weight), span_tol_(span_tol) {
        require(weight > 0.0, ErrorKind::InvalidArgument, "mode weight must be positive");
        require(!generators.empty(), ErrorKind::InvalidArgument, "mode basis needs at least one generator");
        length_ = generators.front().size();
        for (const CVec& g : generators) {
            require(g.size() == length_, ErrorKind::DimensionMismatch, "mode generators differ in length");
            require(all_finite(g), ErrorKind::NonFinite, "mode generator has non-finite entries");
            const double n0 = norm(g);
            if (n0 == 0.0) continue;
            CVec r = g;
            for (int pass = 0; pass < 2; ++pass)
                for (const CVec& e : modes_) r -= dot(e, r) * e;
            const double nr = norm(r);
            if (nr <= drop_tol * n0) continue;
            modes_.push_back(r / nr);
        }
        require(!modes_.empty(), ErrorKind::InvalidArgument, "mode generators span nothing");
        require(static_cast<int>(modes_.size()) <= kMaxModes, ErrorKind::InvalidArgument, "at most 6 boson modes are supported");
    }

    static BosonModeBasis scalar(const Grid& g, const std::vector<CVec>& generators, double span_tol = 1e-10) {
        for (const CVec& v : generators) check_field(g, v, "mode generator");
        return BosonModeBasis(g.cell_volume(), generators, span_tol);
    }

    int size() const { return static_cast<int>(modes_.size()); }
    Eigen::Index length() const { return length_; }
    double weight() const { return weight_; }
    double span_tol() const { return span_tol_; }
    const CVec& mode(int j) const { return modes_[static_cast<std::size_t>(j)]; }

    cplx dot(const CVec& u, const CVec& v) const { return weight_ * u.dot(v); }
    double norm(const CVec& v) const { return std::sqrt(weight_ * v.squaredNorm()); }

    CMat gram() const {
        CMat gm(size(), size());
        for (int i = 0; i < size(); ++i)
            for (int j = 0; j < size(); ++j) gm(i, j) = dot(mode(i), mode(j));
        return gm;
    }

    /// c_j = <e_j, f> without a span check.
    CVec project(const CVec& f) const {
        require(f.size() == length_, ErrorKind::DimensionMismatch, "vector length differs from mode length");
        CVec c(size());
        for (int j = 0; j < size(); ++j) c[j] = dot(mode(j), f);
        return c;
    }

    CVec synthesize(const CVec& c) const {
        CVec f = CVec::Zero(length_);
        for (int j = 0; j < size(); ++j) f += c[j] * mode(j);
        return f;
    }

    double residual(const CVec& f) const { return norm(f - synthesize(project(f))); }

    /// Coefficients of f, which must lie in the span up to span_tol * max(1, |f|).
    CVec coefficients(const CVec& f, const std::string& what = "vector") const {
        const CVec c = project(f);
        const double r = norm(f - synthesize(c));
        require(r <= span_tol_ * std::max(1.0, norm(f)), ErrorKind::SpanResidual,
                what + " lies outside the boson mode span (residual " + std::to_string(r) + ")");
        return c;
    }

    /// Matrix <e_i, T e_j> of a linear map T restricted to the span; throws
    /// if the span is not T-invariant.
    template <typename Map>
    CMat restricted(Map&& t, ErrorKind kind = ErrorKind::NotShiftClosed) const {
        CMat v(size(), size());
        for (int j = 0; j < size(); ++j) {
            const CVec img = t(mode(j));
            const CVec c = project(img);
            require(norm(img - synthesize(c)) <= span_tol_ * std::max(1.0, norm(img)), kind, "mode span not invariant");
            v.col(j) = c;
        }
        return v;
    }

private:
    double weight_;
    double span_tol_;
    Eigen::Index length_ = 0;
    std::vector<CVec> modes_;
};

class BosonFockSpace {
public:
    using Occ = std::vector<int>;

    static constexpr std::size_t kMaxDimension = 200'000;

    /// Basis ordered by shell, then lexicographically descending within a
    /// shell, so a smaller N_max gives a prefix of a larger one.
    BosonFockSpace(int modes, int n_max) : k_(modes), n_max_(n_max) {
        require(k_ >= 1 && k_ <= BosonModeBasis::kMaxModes, ErrorKind::InvalidArgument, "boson mode count must be in 1..6");
        require(n_max_ >= 0, ErrorKind::InvalidArgument, "N_max must be >= 0");
        for (int n = 0; n <= n_max_; ++n) {
            Occ o(static_cast<std::size_t>(k_), 0);
            fill_shell(o, 0, n);
            require(basis_.size() <= kMaxDimension, ErrorKind::InvalidArgument, "boson Fock dimension too large");
        }
        for (std::size_t i = 0; i < basis_.size(); ++i) index_.emplace(basis_[i], static_cast<Eigen::Index>(i));
    }

    int modes() const { return k_; }
    int n_max() const { return n_max_; }
    Eigen::Index dim() const { return static_cast<Eigen::Index>(basis_.size()); }
    const Occ& state(Eigen::Index i) const { return basis_[static_cast<std::size_t>(i)]; }
    int shell(Eigen::Index i) const { return shell_[static_cast<std::size_t>(i)]; }

    Eigen::Index index_of(const Occ& o) const {
        auto it = index_.find(o);
        return it == index_.end() ? -1 : it->second;
    }

    /// Number of basis states with shell <= s.
    Eigen::Index shell_dim(int s) const {
        Eigen::Index c = 0;
        for (int v : shell_) c += v <= s;
        return c;
    }

    Mask shell_at_most(int s) const {
        Mask m(basis_.size());
        for (std::size_t i = 0; i < basis_.size(); ++i) m[i] = shell_[i] <= s;
        return m;
    }

    CVec vacuum() const {
        CVec v = CVec::Zero(dim());
        v[0] = 1.0;
        return v;
    }

    /// b_j; creation (its adjoint) out of the top shell gives 0.
    SpMat mode_annihilate(int j) const {
        require(j >= 0 && j < k_, ErrorKind::InvalidArgument, "boson mode index");
        std::vector<Eigen::Triplet<cplx>> t;
        for (std::size_t i = 0; i < basis_.size(); ++i) {
            const int nj = basis_[i][static_cast<std::size_t>(j)];
            if (nj == 0) continue;
            Occ o = basis_[i];
            --o[static_cast<std::size_t>(j)];
            t.emplace_back(index_of(o), static_cast<Eigen::Index>(i), std::sqrt(static_cast<double>(nj)));
        }
        SpMat out(dim(), dim());
        out.setFromTriplets(t.begin(), t.end());
        return out;
    }

    SpMat mode_create(int j) const { return SpMat(mode_annihilate(j).adjoint()); }

    /// b(f) = sum_j conj(c_j) b_j.
    SpMat annihilate(const CVec& c) const {
        check(c);
        SpMat out(dim(), dim());
        for (int j = 0; j < k_; ++j)
            if (c[j] != cplx(0.0)) out += std::conj(c[j]) * mode_annihilate(j);
        return out;
    }

    SpMat create(const CVec& c) const { return SpMat(annihilate(c).adjoint()); }

    SpMat segal(const CVec& c) const {
        const SpMat b = annihilate(c);
        return SpMat((b + SpMat(b.adjoint())) * (1.0 / std::sqrt(2.0)));
    }

    SpMat number_operator() const {
        CVec d(dim());
        for (Eigen::Index i = 0; i < dim(); ++i) d[i] = static_cast<double>(shell(i));
        return sparse_diagonal(d);
    }

    /// dGamma_s(A) = sum_{lj} A_lj b_l^dagger b_j, shell preserving.
    SpMat dgamma(const CMat& a) const {
        require(a.rows() == k_ && a.cols() == k_, ErrorKind::DimensionMismatch, "mode operator size");
        SpMat out(dim(), dim());
        for (int l = 0; l < k_; ++l)
            for (int j = 0; j < k_; ++j)
                if (a(l, j) != cplx(0.0)) out += a(l, j) * SpMat(mode_create(l) * mode_annihilate(j));
        return out;
    }

    /// exp(i phi(f)) on the truncated space.
    CMat weyl(const CVec& c) const { return expi_hermitian(CMat(segal(c))); }

    /**
     * Columns of exp(i phi(f)) for the basis states of shell <= col_shell,
     * with rows indexed by the space of N_max + guard shells (whose first
     * dim() entries coincide with this basis). The field splits into
     * commuting single-mode parts, so each entry is a product of single-mode
     * exponentials, each computed on a chain of N_max + 2 guard levels.
     */
    CMat weyl_columns(const CVec& c, int guard, int col_shell) const {
        check(c);
        require(guard >= 0 && col_shell <= n_max_, ErrorKind::InvalidArgument, "weyl_columns shells");
        const int chain = n_max_ + 2 * guard + 1;
        std::vector<CMat> single;
        for (int j = 0; j < k_; ++j) {
            CMat phi = CMat::Zero(chain, chain);
            for (int n = 1; n < chain; ++n) {
                const double r = std::sqrt(static_cast<double>(n) / 2.0);
                phi(n - 1, n) = std::conj(c[j]) * r;
                phi(n, n - 1) = c[j] * r;
            }
            single.push_back(expi_hermitian(phi));
        }
        const BosonFockSpace ext(k_, n_max_ + guard);
        const Eigen::Index ncols = shell_dim(col_shell);
        CMat out(ext.dim(), ncols);
        for (Eigen::Index col = 0; col < ncols; ++col)
            for (Eigen::Index row = 0; row < ext.dim(); ++row) {
                cplx v = 1.0;
                for (int j = 0; j < k_; ++j)
                    v *= single[static_cast<std::size_t>(j)](ext.state(row)[static_cast<std::size_t>(j)], state(col)[static_cast<std::size_t>(j)]);
                out(row, col) = v;
            }
        return out;
    }

    /// Gamma_s(V) for a unitary V on the mode span.
    CMat gamma(const CMat& v) const {
        require(v.rows() == k_ && v.cols() == k_, ErrorKind::DimensionMismatch, "mode operator size");
        require(unitary_defect(v) <= 1e-12 * k_, ErrorKind::NotUnitary, "Gamma_s needs a unitary");
        const CMat off = v - CMat(v.diagonal().asDiagonal());
        if (off.norm() <= 1e-14) {
            CVec d(dim());
            for (Eigen::Index i = 0; i < dim(); ++i) {
                cplx p = 1.0;
                for (int j = 0; j < k_; ++j) p *= std::pow(v(j, j), state(i)[static_cast<std::size_t>(j)]);
                d[i] = p;
            }
            return CMat(d.asDiagonal());
        }
        // A unitary is normal; its Schur form is diagonal.
        Eigen::ComplexSchur<CMat> schur(v);
        const CMat& q = schur.matrixU();
        CVec phases(k_);
        for (int j = 0; j < k_; ++j) phases[j] = std::arg(schur.matrixT()(j, j));
        const CMat gen = q * phases.asDiagonal() * q.adjoint();
        return expi_hermitian(CMat(dgamma(0.5 * (gen + gen.adjoint()))));
    }

private:
    void fill_shell(Occ& o, int pos, int remaining) {
        if (pos == k_ - 1) {
            o[static_cast<std::size_t>(pos)] = remaining;
            basis_.push_back(o);
            int s = 0;
            for (int v : o) s += v;
            shell_.push_back(s);
            return;
        }
        for (int v = remaining; v >= 0; --v) {
            o[static_cast<std::size_t>(pos)] = v;
            fill_shell(o, pos + 1, remaining - v);
        }
    }

    void check(const CVec& c) const {
        require(c.size() == k_, ErrorKind::DimensionMismatch, "boson coefficient vector length");
    }

    int k_;
    int n_max_;
    std::vector<Occ> basis_;
    std::vector<int> shell_;
    std::map<Occ, Eigen::Index> index_;
};

/// eta(s, t) from mode coefficients: -Im <f, g>.
inline double coefficient_eta(const CVec& cs, const CVec& ct) { return -cs.dot(ct).imag(); }

/**
 * Frobenius norm of W(s) W(t) e^{-i eta(s,t)/2} - W(s+t) on the block of
 * shells <= col_shell, with every Weyl column evaluated on an extended space
 * of N_max + guard shells. W(s) restricted to the block is W(-s)^dagger.
 */
inline double weyl_cocycle_residual(const BosonFockSpace& fs, const CVec& cs, const CVec& ct, int guard, int col_shell) {
    const Eigen::Index nl = fs.shell_dim(col_shell);
    const CMat wms = fs.weyl_columns(-cs, guard, col_shell);
    const CMat wt = fs.weyl_columns(ct, guard, col_shell);
    const CMat wst = fs.weyl_columns(cs + ct, guard, col_shell);
    const cplx phase = std::polar(1.0, -0.5 * coefficient_eta(cs, ct));
    return (wms.adjoint() * wt * phase - wst.topRows(nl)).norm();
}

/// Same residual with the plain truncated exponentials of this space.
inline double weyl_cocycle_residual_unguarded(const BosonFockSpace& fs, const CVec& cs, const CVec& ct, int col_shell) {
    const Eigen::Index nl = fs.shell_dim(col_shell);
    const CMat r = fs.weyl(cs) * fs.weyl(ct) * std::polar(1.0, -0.5 * coefficient_eta(cs, ct)) - fs.weyl(cs + ct);
    return r.topLeftCorner(nl, nl).norm();
}

/// Mode basis and Fock space for scalar test functions s -> f = s0 + i s1.
class BosonSector {
public:
    BosonSector(const Grid& g, const std::vector<CVec>& generators, int n_max, double span_tol = 1e-10)
        : grid_(g), basis_(BosonModeBasis::scalar(g, generators, span_tol)), fock_(basis_.size(), n_max) {}

    /// Span of the given test functions' smeared vectors.
    static BosonSector from_test_functions(const Grid& g, const std::vector<ScalarTestFunction>& fs, int n_max,
                                           double span_tol = 1e-10) {
        std::vector<CVec> gens;
        for (const auto& s : fs) gens.push_back(s.smeared());
        return BosonSector(g, gens, n_max, span_tol);
    }

    const Grid& grid() const { return grid_; }
    const BosonModeBasis& basis() const { return basis_; }
    const BosonFockSpace& fock() const { return fock_; }

    CVec coefficients(const ScalarTestFunction& s) const {
        check_test_function(grid_, s);
        return basis_.coefficients(s.smeared(), "test function");
    }

    SpMat segal(const ScalarTestFunction& s) const { return fock_.segal(coefficients(s)); }
    CMat weyl(const ScalarTestFunction& s) const { return fock_.weyl(coefficients(s)); }
    SpMat annihilate(const CVec& f) const { return fock_.annihilate(basis_.coefficients(f)); }
    SpMat create(const CVec& f) const { return fock_.create(basis_.coefficients(f)); }

    /// Gamma_s of the lattice translation T_a; the span must be shift-closed.
    CMat translation(const Shift& a) const {
        const CMat v = basis_.restricted([&](const CVec& e) { return translate(grid_, e, a); });
        return fock_.gamma(v);
    }

    /// The Fock-state characteristic functional exp(-|f|^2 / 4).
    double fock_functional(const ScalarTestFunction& s) const {
        const CVec f = s.smeared();
        return std::exp(-0.25 * grid_.cell_volume() * f.squaredNorm());
    }

private:
    Grid grid_;
    BosonModeBasis basis_;
    BosonFockSpace fock_;
};

/// Plane-wave generators exp(i k.x) for the listed dual indices, a
/// translation-closed mode set.
inline std::vector<CVec> fourier_generators(const Grid& g, const std::vector<std::size_t>& dual_indices) {
    std::vector<CVec> out;
    for (std::size_t k : dual_indices) {
        const auto kv = g.wavevector(k);
        CVec v(static_cast<Eigen::Index>(g.size()));
        for (std::size_t i = 0; i < g.size(); ++i) {
            const auto c = g.coords(i);
            double ph = 0.0;
            for (int a = 0; a < g.dim; ++a) ph += kv[a] * c[a] * g.dx;
            v[static_cast<Eigen::Index>(i)] = std::polar(1.0, ph);
        }
        out.push_back(v);
    }
    return out;
}

} // namespace twistfield

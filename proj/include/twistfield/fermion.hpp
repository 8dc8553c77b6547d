// Copyright 2026 The twistfield Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file fermion.hpp
 * @brief Charged one-particle Dirac space and its number-truncated
 *        fermionic Fock space.
 *
 * Mode m = sector * (D N) + d * N + site, electron sector first (q = -1),
 * positron sector second (q = +1). Positron components of a vector store the
 * conjugated wave function. Creation operators carry the sign
 * (-1)^{#occupied modes below m}.
 */

#pragma once

#include "twistfield/lattice.hpp"
#include "twistfield/linalg.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <map>
#include <optional>

namespace twistfield {

// ---------------------------------------------------------------------------
// Antilinear maps
// ---------------------------------------------------------------------------

/// J v = L conj(v).
template <typename Mat>
struct Antilinear {
    Mat L;

    template <typename Vec>
    auto apply(const Vec& v) const {
        return (L * v.conjugate()).eval();
    }
};

/// X J + J X, returned as the linear part of (X L + L conj(X)) conj.
template <typename Mat>
Mat anticommutator(const Mat& x, const Antilinear<Mat>& j) {
    return Mat(x * j.L + j.L * Mat(x.conjugate()));
}

template <typename Mat>
Mat commutator(const Mat& x, const Antilinear<Mat>& j) {
    return Mat(x * j.L - j.L * Mat(x.conjugate()));
}

/// J J, which is linear.
template <typename Mat>
Mat square(const Antilinear<Mat>& j) {
    return Mat(j.L * Mat(j.L.conjugate()));
}

// ---------------------------------------------------------------------------
// One-particle space
// ---------------------------------------------------------------------------

enum class Sector { Electron = 0, Positron = 1 };

class OneParticleSpace {
public:
    OneParticleSpace(Grid g, int internal_dim = 1) : grid_(g), d_(internal_dim) {
        require(d_ >= 1, ErrorKind::InvalidArgument, "internal dimension must be >= 1");
        require(modes() <= 256, ErrorKind::InvalidArgument, "at most 256 one-particle modes are supported");
    }

    const Grid& grid() const { return grid_; }
    int internal_dim() const { return d_; }
    std::size_t sector_size() const { return static_cast<std::size_t>(d_) * grid_.size(); }
    std::size_t modes() const { return 2 * sector_size(); }

    std::size_t mode(Sector s, int d, std::size_t site) const {
        return static_cast<std::size_t>(s) * sector_size() + static_cast<std::size_t>(d) * grid_.size() + site;
    }
    std::size_t site_of(std::size_t m) const { return m % grid_.size(); }
    int internal_of(std::size_t m) const { return static_cast<int>((m % sector_size()) / grid_.size()); }
    Sector sector_of(std::size_t m) const { return m < sector_size() ? Sector::Electron : Sector::Positron; }
    int charge_of(std::size_t m) const { return sector_of(m) == Sector::Electron ? -1 : +1; }

    cplx dot(const CVec& v, const CVec& w) const {
        check(v);
        check(w);
        return grid_.cell_volume() * v.dot(w);
    }
    double norm(const CVec& v) const { return std::sqrt(std::max(0.0, dot(v, v).real())); }

    /// w ⊕ 0 for an electron wave function w of length D N.
    CVec electron(const CVec& w) const {
        require(static_cast<std::size_t>(w.size()) == sector_size(), ErrorKind::DimensionMismatch, "electron wave function length");
        CVec v = CVec::Zero(static_cast<Eigen::Index>(modes()));
        v.head(w.size()) = w;
        return v;
    }

    /// 0 ⊕ w̄.
    CVec positron(const CVec& w) const {
        require(static_cast<std::size_t>(w.size()) == sector_size(), ErrorKind::DimensionMismatch, "positron wave function length");
        CVec v = CVec::Zero(static_cast<Eigen::Index>(modes()));
        v.tail(w.size()) = w.conjugate();
        return v;
    }

    CVec electron_part(const CVec& v) const {
        check(v);
        return v.head(static_cast<Eigen::Index>(sector_size()));
    }
    CVec positron_part(const CVec& v) const {
        check(v);
        return v.tail(static_cast<Eigen::Index>(sector_size()));
    }

    /// Sector swap K; the conjugation is kappa = K conj.
    CMat sector_swap() const {
        const auto h = static_cast<Eigen::Index>(sector_size());
        CMat k = CMat::Zero(2 * h, 2 * h);
        k.topRightCorner(h, h).setIdentity();
        k.bottomLeftCorner(h, h).setIdentity();
        return k;
    }
    Antilinear<CMat> kappa() const { return {sector_swap()}; }
    CVec apply_kappa(const CVec& v) const { return kappa().apply(v); }

    /// Site permutation v(x) -> v(x - a) on every sector and internal index.
    CMat translation(const Shift& a) const {
        const auto m = static_cast<Eigen::Index>(modes());
        CMat u = CMat::Zero(m, m);
        for (std::size_t i = 0; i < modes(); ++i) {
            const std::size_t site = site_of(i);
            const std::size_t j = i - site + grid_.shifted(site, a);
            u(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = 1.0;
        }
        return u;
    }

    /// Diagonal one-particle operator with entries -c on electrons, +c on
    /// positrons, for a per-site real field c.
    RVec charged_multiplier(const Field& c) const {
        check_field(grid_, c, "multiplier");
        RVec d(static_cast<Eigen::Index>(modes()));
        for (std::size_t m = 0; m < modes(); ++m)
            d[static_cast<Eigen::Index>(m)] = charge_of(m) * c[static_cast<Eigen::Index>(site_of(m))];
        return d;
    }

    void check(const CVec& v) const {
        require(static_cast<std::size_t>(v.size()) == modes(), ErrorKind::DimensionMismatch, "one-particle vector length");
    }

    bool operator==(const OneParticleSpace& o) const { return grid_ == o.grid_ && d_ == o.d_; }

private:
    Grid grid_;
    int d_;
};

class OneParticleOperator {
public:
    OneParticleOperator() = default;
    explicit OneParticleOperator(CMat m, double tol = 1e-14) : mat_(std::move(m)) {
        require(mat_.rows() == mat_.cols(), ErrorKind::DimensionMismatch, "one-particle operator must be square");
        require(all_finite(mat_), ErrorKind::NonFinite, "one-particle operator has non-finite entries");
        const Eigen::Index n = mat_.rows();
        const Eigen::Index h = n / 2;
        const double scale = std::max(1.0, mat_.cwiseAbs().maxCoeff());
        diagonal_ = true;
        sector_preserving_ = true;
        for (Eigen::Index c = 0; c < n; ++c)
            for (Eigen::Index r = 0; r < n; ++r) {
                if (std::abs(mat_(r, c)) <= tol * scale) continue;
                if (r != c) diagonal_ = false;
                if ((r < h) != (c < h)) sector_preserving_ = false;
            }
    }

    static OneParticleOperator diagonal(const CVec& d) { return OneParticleOperator(CMat(d.asDiagonal())); }

    const CMat& matrix() const { return mat_; }
    Eigen::Index size() const { return mat_.rows(); }
    bool is_diagonal() const { return diagonal_; }
    bool is_sector_preserving() const { return sector_preserving_; }
    bool is_unitary(double tol = 1e-12) const { return unitary_defect(mat_) <= tol * std::sqrt(static_cast<double>(size())); }
    bool is_selfadjoint(double tol = 1e-12) const {
        return hermitian_defect(mat_) <= tol * std::max(1.0, mat_.norm());
    }

    CVec apply(const CVec& v) const { return mat_ * v; }

private:
    CMat mat_;
    bool diagonal_ = true;
    bool sector_preserving_ = true;
};

/// Stone generator: -(sigma*s0)(x) on electron modes, +(sigma*s0)(x) on positron modes.
inline OneParticleOperator stone_generator(const OneParticleSpace& h, const TwistKernel& sigma, const ScalarTestFunction& s) {
    check_same_grid(h.grid(), sigma.grid());
    check_test_function(h.grid(), s);
    return OneParticleOperator::diagonal(h.charged_multiplier(convolve(sigma, s.s0)).cast<cplx>());
}

inline OneParticleOperator twist_unitary(const OneParticleSpace& h, const TwistKernel& sigma, const ScalarTestFunction& s) {
    const CVec gen = stone_generator(h, sigma, s).matrix().diagonal();
    return OneParticleOperator::diagonal((kI * gen.array()).exp().matrix());
}

// ---------------------------------------------------------------------------
// Occupation bitsets
// ---------------------------------------------------------------------------

class Occupation {
public:
    bool test(std::size_t m) const { return (w_[m >> 6] >> (m & 63)) & 1u; }
    void set(std::size_t m) { w_[m >> 6] |= (std::uint64_t{1} << (m & 63)); }
    void reset(std::size_t m) { w_[m >> 6] &= ~(std::uint64_t{1} << (m & 63)); }

    int count() const {
        int c = 0;
        for (auto x : w_) c += std::popcount(x);
        return c;
    }

    /// Number of occupied modes strictly below m.
    int count_below(std::size_t m) const {
        int c = 0;
        const std::size_t word = m >> 6;
        for (std::size_t i = 0; i < word; ++i) c += std::popcount(w_[i]);
        const std::uint64_t low = (m & 63) ? (w_[word] & ((std::uint64_t{1} << (m & 63)) - 1)) : 0;
        return c + std::popcount(low);
    }

    std::vector<std::size_t> occupied() const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < w_.size(); ++i) {
            std::uint64_t x = w_[i];
            while (x) {
                out.push_back(i * 64 + static_cast<std::size_t>(std::countr_zero(x)));
                x &= x - 1;
            }
        }
        return out;
    }

    /// Orders by bitset value.
    friend bool operator<(const Occupation& a, const Occupation& b) {
        for (std::size_t i = a.w_.size(); i-- > 0;)
            if (a.w_[i] != b.w_[i]) return a.w_[i] < b.w_[i];
        return false;
    }
    friend bool operator==(const Occupation& a, const Occupation& b) { return a.w_ == b.w_; }

private:
    std::array<std::uint64_t, 4> w_{};
};

// ---------------------------------------------------------------------------
// Fock space
// ---------------------------------------------------------------------------

class FermionFockSpace {
public:
    static constexpr std::size_t kMaxDimension = 4'000'000;

    FermionFockSpace(OneParticleSpace h, int f_max) : h_(std::move(h)), f_max_(f_max) {
        require(f_max_ >= 0, ErrorKind::InvalidArgument, "F_max must be >= 0");
        const std::size_t m = h_.modes();
        const auto kmax = static_cast<std::size_t>(std::min<std::size_t>(static_cast<std::size_t>(f_max_), m));
        binom_.assign(m + 1, std::vector<std::uint64_t>(kmax + 2, 0));
        for (std::size_t n = 0; n <= m; ++n) {
            binom_[n][0] = 1;
            for (std::size_t k = 1; k <= std::min(n, kmax + 1); ++k) {
                const std::uint64_t v = binom_[n - 1][k - 1] + (k <= n - 1 ? binom_[n - 1][k] : 0);
                binom_[n][k] = std::min<std::uint64_t>(v, kMaxDimension + 1);
            }
        }
        offset_.assign(kmax + 2, 0);
        for (std::size_t k = 0; k <= kmax; ++k) {
            offset_[k + 1] = offset_[k] + binom_[m][k];
            require(offset_[k + 1] <= kMaxDimension, ErrorKind::InvalidArgument, "fermion Fock dimension too large");
        }
        f_max_ = static_cast<int>(kmax);
        basis_.reserve(offset_.back());
        number_.reserve(offset_.back());
        charge_.reserve(offset_.back());
        for (std::size_t k = 0; k <= kmax; ++k) enumerate(k);
    }

    const OneParticleSpace& one_particle() const { return h_; }
    int f_max() const { return f_max_; }
    Eigen::Index dim() const { return static_cast<Eigen::Index>(basis_.size()); }
    const Occupation& state(Eigen::Index i) const { return basis_[static_cast<std::size_t>(i)]; }
    int number(Eigen::Index i) const { return number_[static_cast<std::size_t>(i)]; }
    int charge(Eigen::Index i) const { return charge_[static_cast<std::size_t>(i)]; }

    /// Basis index of an occupation with at most F_max particles.
    Eigen::Index index_of(const Occupation& o) const {
        const auto occ = o.occupied();
        require(occ.size() <= static_cast<std::size_t>(f_max_), ErrorKind::Truncation, "occupation above F_max");
        std::uint64_t r = offset_[occ.size()];
        for (std::size_t i = 0; i < occ.size(); ++i) r += binom_[occ[i]][i + 1];
        return static_cast<Eigen::Index>(r);
    }

    CVec vacuum() const {
        CVec v = CVec::Zero(dim());
        v[0] = 1.0;
        return v;
    }

    // -- masks ------------------------------------------------------------

    Mask number_at_most(int n) const {
        Mask m(basis_.size());
        for (std::size_t i = 0; i < basis_.size(); ++i) m[i] = number_[i] <= n;
        return m;
    }
    Mask number_equals(int n) const {
        Mask m(basis_.size());
        for (std::size_t i = 0; i < basis_.size(); ++i) m[i] = number_[i] == n;
        return m;
    }
    Mask charge_equals(int q) const {
        Mask m(basis_.size());
        for (std::size_t i = 0; i < basis_.size(); ++i) m[i] = charge_[i] == q;
        return m;
    }
    /// States on which one creation or annihilation stays inside the truncation.
    Mask safe() const { return number_at_most(f_max_ - 1); }

    // -- ladder operators ---------------------------------------------------

    /// a*(w) = sum_m sqrt(dV) w_m c_m^dagger; creation out of the top sector gives 0.
    SpMat create(const CVec& w) const {
        h_.check(w);
        const double scale = std::sqrt(h_.grid().cell_volume());
        std::vector<Eigen::Triplet<cplx>> t;
        for (std::size_t i = 0; i < basis_.size(); ++i) {
            if (number_[i] >= f_max_) continue;
            const Occupation& o = basis_[i];
            for (std::size_t m = 0; m < h_.modes(); ++m) {
                const cplx c = w[static_cast<Eigen::Index>(m)];
                if (c == cplx(0.0) || o.test(m)) continue;
                Occupation p = o;
                p.set(m);
                const double sign = (o.count_below(m) & 1) ? -1.0 : 1.0;
                t.emplace_back(index_of(p), static_cast<Eigen::Index>(i), sign * scale * c);
            }
        }
        SpMat out(dim(), dim());
        out.setFromTriplets(t.begin(), t.end());
        return out;
    }

    SpMat annihilate(const CVec& w) const { return SpMat(create(w).adjoint()); }

    /// Bare c_m^dagger.
    SpMat mode_create(std::size_t m) const {
        CVec e = CVec::Zero(static_cast<Eigen::Index>(h_.modes()));
        e[static_cast<Eigen::Index>(m)] = 1.0 / std::sqrt(h_.grid().cell_volume());
        return create(e);
    }

    /// psi(w) = 2^{-1/2} (a*(w ⊕ 0) + a(0 ⊕ w̄)) for an electron wave function w.
    SpMat psi(const CVec& w) const {
        return SpMat((create(h_.electron(w)) + annihilate(h_.positron(w))) * (1.0 / std::sqrt(2.0)));
    }

    /// Self-dual field 2^{-1/2} (a*(v) + a(kappa v)).
    SpMat psi_selfdual(const CVec& v) const {
        return SpMat((create(v) + annihilate(h_.apply_kappa(v))) * (1.0 / std::sqrt(2.0)));
    }

    // -- second quantization ------------------------------------------------

    /// dGamma(A) = sum_{lm} A_lm c_l^dagger c_m.
    SpMat dgamma(const OneParticleOperator& a) const {
        check_size(a);
        require(a.is_selfadjoint(), ErrorKind::NotSelfAdjoint, "dGamma needs a selfadjoint generator");
        return bilinear(a.matrix());
    }

    SpMat number_operator() const {
        CVec d(dim());
        for (Eigen::Index i = 0; i < dim(); ++i) d[i] = static_cast<double>(number(i));
        return sparse_diagonal(d);
    }

    SpMat charge_operator() const {
        CVec d(dim());
        for (Eigen::Index i = 0; i < dim(); ++i) d[i] = static_cast<double>(charge(i));
        return sparse_diagonal(d);
    }

    /// Gamma_a(U), mode by mode.
    SpMat gamma(const OneParticleOperator& u) const {
        check_size(u);
        require(u.is_unitary(), ErrorKind::NotUnitary, "Gamma_a needs a unitary");
        const CMat& U = u.matrix();
        if (u.is_diagonal()) {
            CVec d(dim());
            for (std::size_t i = 0; i < basis_.size(); ++i) {
                cplx p = 1.0;
                for (std::size_t m : basis_[i].occupied()) p *= U(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
                d[static_cast<Eigen::Index>(i)] = p;
            }
            return sparse_diagonal(d);
        }
        std::vector<Eigen::Triplet<cplx>> t;
        if (auto perm = monomial_columns(U)) {
            for (std::size_t i = 0; i < basis_.size(); ++i) {
                const auto occ = basis_[i].occupied();
                cplx amp = 1.0;
                std::vector<std::size_t> img;
                img.reserve(occ.size());
                for (std::size_t m : occ) {
                    const std::size_t l = (*perm)[m];
                    img.push_back(l);
                    amp *= U(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(m));
                }
                Occupation p;
                for (std::size_t l : img) p.set(l);
                t.emplace_back(index_of(p), static_cast<Eigen::Index>(i), amp * permutation_sign(img));
            }
        } else {
            for (std::size_t i = 0; i < basis_.size(); ++i) {
                const auto occ = basis_[i].occupied();
                std::map<Occupation, cplx> st{{Occupation{}, cplx(1.0)}};
                for (std::size_t j = occ.size(); j-- > 0;) st = apply_creation_column(st, U, occ[j]);
                for (const auto& [o, c] : st)
                    if (c != cplx(0.0)) t.emplace_back(index_of(o), static_cast<Eigen::Index>(i), c);
            }
        }
        SpMat out(dim(), dim());
        out.setFromTriplets(t.begin(), t.end());
        return out;
    }

    /// Gamma_a(kappa) = Gamma_a(K) ∘ conj.
    Antilinear<SpMat> kappa() const { return {gamma(OneParticleOperator(h_.sector_swap()))}; }

    SpMat translate(const Shift& a) const { return gamma(OneParticleOperator(h_.translation(a))); }

    /// a*(v_1) ... a*(v_k) Omega.
    CVec product_state(const std::vector<CVec>& vs) const {
        require(vs.size() <= static_cast<std::size_t>(f_max_), ErrorKind::Truncation, "more particles than F_max");
        CVec out = vacuum();
        for (std::size_t j = vs.size(); j-- > 0;) out = create(vs[j]) * out;
        return out;
    }

    /// Fock vector of a one-particle vector in the n = 1 sector.
    CVec one_particle_state(const CVec& v) const {
        h_.check(v);
        require(f_max_ >= 1, ErrorKind::Truncation, "F_max must be >= 1");
        CVec out = CVec::Zero(dim());
        const double scale = std::sqrt(h_.grid().cell_volume());
        for (std::size_t m = 0; m < h_.modes(); ++m) out[static_cast<Eigen::Index>(1 + m)] = scale * v[static_cast<Eigen::Index>(m)];
        return out;
    }

    /// Inverse of one_particle_state on the n = 1 sector.
    CVec one_particle_part(const CVec& psi) const {
        CVec out(static_cast<Eigen::Index>(h_.modes()));
        const double scale = std::sqrt(h_.grid().cell_volume());
        for (std::size_t m = 0; m < h_.modes(); ++m) out[static_cast<Eigen::Index>(m)] = psi[static_cast<Eigen::Index>(1 + m)] / scale;
        return out;
    }

private:
    void enumerate(std::size_t k) {
        const std::size_t m = h_.modes();
        std::vector<std::size_t> c(k);
        for (std::size_t i = 0; i < k; ++i) c[i] = i;
        while (true) {
            Occupation o;
            int q = 0;
            for (std::size_t x : c) {
                o.set(x);
                q += h_.charge_of(x);
            }
            basis_.push_back(o);
            number_.push_back(static_cast<int>(k));
            charge_.push_back(q);
            // Colex successor: bump the lowest element that can move up.
            std::size_t i = 0;
            while (i < k && c[i] + 1 == (i + 1 < k ? c[i + 1] : m)) ++i;
            if (i == k) break;
            ++c[i];
            for (std::size_t j = 0; j < i; ++j) c[j] = j;
        }
    }

    void check_size(const OneParticleOperator& a) const {
        require(static_cast<std::size_t>(a.size()) == h_.modes(), ErrorKind::DimensionMismatch, "one-particle operator size");
    }

    SpMat bilinear(const CMat& A) const {
        std::vector<Eigen::Triplet<cplx>> t;
        const std::size_t M = h_.modes();
        for (std::size_t i = 0; i < basis_.size(); ++i) {
            const Occupation& o = basis_[i];
            for (std::size_t m : o.occupied()) {
                Occupation mid = o;
                mid.reset(m);
                const int s1 = o.count_below(m);
                for (std::size_t l = 0; l < M; ++l) {
                    const cplx c = A(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(m));
                    if (c == cplx(0.0) || mid.test(l)) continue;
                    Occupation p = mid;
                    p.set(l);
                    const int s = s1 + mid.count_below(l);
                    t.emplace_back(index_of(p), static_cast<Eigen::Index>(i), (s & 1) ? -c : c);
                }
            }
        }
        SpMat out(dim(), dim());
        out.setFromTriplets(t.begin(), t.end());
        return out;
    }

    static std::optional<std::vector<std::size_t>> monomial_columns(const CMat& U) {
        std::vector<std::size_t> perm(static_cast<std::size_t>(U.cols()));
        for (Eigen::Index c = 0; c < U.cols(); ++c) {
            int nz = 0;
            for (Eigen::Index r = 0; r < U.rows(); ++r)
                if (U(r, c) != cplx(0.0)) {
                    ++nz;
                    perm[static_cast<std::size_t>(c)] = static_cast<std::size_t>(r);
                }
            if (nz != 1) return std::nullopt;
        }
        return perm;
    }

    /// Sign of the permutation sorting v ascending (inversion count parity).
    static double permutation_sign(const std::vector<std::size_t>& v) {
        int inv = 0;
        for (std::size_t i = 0; i < v.size(); ++i)
            for (std::size_t j = i + 1; j < v.size(); ++j) inv += v[i] > v[j];
        return (inv & 1) ? -1.0 : 1.0;
    }

    /// Applies sum_l U_lm c_l^dagger to a sparse state.
    std::map<Occupation, cplx> apply_creation_column(const std::map<Occupation, cplx>& st, const CMat& U, std::size_t m) const {
        std::map<Occupation, cplx> out;
        for (const auto& [o, c] : st)
            for (Eigen::Index l = 0; l < U.rows(); ++l) {
                const cplx u = U(l, static_cast<Eigen::Index>(m));
                const auto ll = static_cast<std::size_t>(l);
                if (u == cplx(0.0) || o.test(ll)) continue;
                Occupation p = o;
                p.set(ll);
                out[p] += ((o.count_below(ll) & 1) ? -1.0 : 1.0) * u * c;
            }
        return out;
    }

    OneParticleSpace h_;
    int f_max_;
    std::vector<std::vector<std::uint64_t>> binom_;
    std::vector<std::uint64_t> offset_;
    std::vector<Occupation> basis_;
    std::vector<int> number_;
    std::vector<int> charge_;
};

} // namespace twistfield

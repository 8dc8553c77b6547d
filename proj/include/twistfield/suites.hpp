// Copyright 2026 The twistfield Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file suites.hpp
 * @brief Verification suites: every module invariant as a CheckRecord, plus
 *        a bounded parallel runner with ordered report assembly.
 *
 * Each task seeds its own generator from the run seed and the task key, so
 * results do not depend on scheduling.
 */

#pragma once

#include "twistfield/config.hpp"
#include "twistfield/coulomb.hpp"
#include "twistfield/hamiltonian.hpp"
#include "twistfield/twisted.hpp"

#include <atomic>
#include <chrono>
#include <functional>
#include <random>
#include <sstream>
#include <thread>

namespace twistfield {

namespace conv {
inline const std::string kCocycle = "weyl cocycle W(s)W(t) = exp(+i eta(s,t)/2) W(s+t)";
inline const std::string kConvolution = "(sigma*s0)(x) = dV sum_y sigma(x-y) s0(y); electron multiplier -(sigma*s0), positron +(sigma*s0)";
inline const std::string kProjector = "P_tr passes through dual points with vanishing derivative wavevector";
inline const std::string kNyquist = "spectral derivatives zero the Nyquist component";
inline const std::string kGuard = "boson Weyl columns evaluated with a guard band of extra shells";
inline const std::string kRelative = "operator residual relative to the Frobenius norm of the reference operator";
inline const std::string kMixed = "mixed term carries -2^{-1/2}";
inline const std::string kDualMeasure = "dual measure dV_k = (2 pi / (n dx))^dim; b_j sharp modes with [b_j, b_l^*] = delta_jl";
inline std::string shift(ShiftChoice c) { return std::string("mu^* shift: ") + to_string(c); }
} // namespace conv

namespace restrict {
inline std::string safe(int f_max, int n_max) {
    return "fermion n <= " + std::to_string(f_max - 1) + "; boson shell <= " + std::to_string(n_max);
}
inline std::string fermion(int f_max) { return "fermion n <= " + std::to_string(f_max - 1); }
inline std::string interior(int n_max) { return "boson shell <= " + std::to_string(n_max - 1); }
} // namespace restrict

struct TaskOutput {
    std::vector<CheckRecord> records;
    std::map<std::string, std::string> artifacts;  ///< file name -> content
};

struct Task {
    std::string suite;
    std::string name;
    std::function<TaskOutput(const RunConfig&, std::mt19937_64&)> run;
};

/// FNV-1a; stable across platforms, unlike std::hash.
inline std::uint64_t stable_hash(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::mt19937_64 task_rng(std::uint64_t seed, const std::string& key) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stable_hash(key)), static_cast<std::uint32_t>(stable_hash(key) >> 32)};
    return std::mt19937_64(seq);
}

// ---------------------------------------------------------------------------
// Random inputs
// ---------------------------------------------------------------------------

namespace draw {

inline Field field(const Grid& g, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> nd(0.0, scale);
    Field f(static_cast<Eigen::Index>(g.size()));
    for (Eigen::Index i = 0; i < f.size(); ++i) f[i] = nd(rng);
    return f;
}

inline CVec cvec(Eigen::Index n, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> nd(0.0, scale);
    CVec v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = cplx(nd(rng), nd(rng));
    return v;
}

inline double uniform(std::mt19937_64& rng, double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }

/// Test function with |s0 + i s1| = amp.
inline ScalarTestFunction test_function(const Grid& g, std::mt19937_64& rng, double amp) {
    ScalarTestFunction s{field(g, rng), field(g, rng)};
    return (amp / std::sqrt(g.cell_volume() * s.smeared().squaredNorm())) * s;
}

/// Random element of a boson span with |f| = amp.
inline ScalarTestFunction in_span(const BosonModeBasis& b, std::mt19937_64& rng, double amp) {
    const CVec f = b.synthesize(cvec(b.size(), rng));
    const CVec g = f * (amp / b.norm(f));
    return {g.real(), g.imag()};
}

inline CVec wave(const Grid& g, std::mt19937_64& rng, int internal_dim = 1) {
    const CVec w = cvec(static_cast<Eigen::Index>(g.size()) * internal_dim, rng);
    return w / std::sqrt(g.cell_volume() * w.squaredNorm());
}

/// Normalized wave function on the listed sites.
inline CVec local_wave(const Grid& g, const std::vector<std::size_t>& sites) {
    CVec w = CVec::Zero(static_cast<Eigen::Index>(g.size()));
    for (std::size_t k = 0; k < sites.size(); ++k) w[static_cast<Eigen::Index>(sites[k])] = cplx(1.0 + 0.3 * k, -0.2 * k);
    return w / std::sqrt(g.cell_volume() * w.squaredNorm());
}

} // namespace draw

namespace detail {

inline double sup(const Field& f) { return f.size() ? f.cwiseAbs().maxCoeff() : 0.0; }
inline SpMat anti(const SpMat& a, const SpMat& b) { return SpMat(a * b + b * a); }
inline SpMat comm(const SpMat& a, const SpMat& b) { return SpMat(a * b - b * a); }

inline TwistedSystem reference_system(const RunConfig& c, const TwistKernel& sigma, const std::vector<ScalarTestFunction>& fs, int n_max,
                                      std::optional<DiffOp> p = std::nullopt) {
    const Grid g = c.grid.grid();
    return {FermionFockSpace(OneParticleSpace(g, c.internal_dim), c.f_max), BosonSector::from_test_functions(g, fs, n_max), sigma, p};
}

inline std::vector<ScalarTestFunction> generators(const RunConfig& c, std::mt19937_64& rng) {
    std::vector<ScalarTestFunction> fs;
    for (int i = 0; i < c.boson_modes; ++i) fs.push_back(draw::test_function(c.grid.grid(), rng, c.amplitude));
    return fs;
}

/// Electron wave function padded to the internal dimension.
inline CVec electron_wave(const RunConfig& c, const CVec& w) {
    CVec out = CVec::Zero(w.size() * c.internal_dim);
    out.head(w.size()) = w;
    return out;
}

/// Named kernels of the twisted suite, evaluated on g.
inline std::vector<std::pair<std::string, TwistKernel>> named_kernels(const Grid& g, std::mt19937_64& rng) {
    return {{"delta", TwistKernel::delta(g)},
            {"constant", TwistKernel::constant(g)},
            {"zero", TwistKernel::zero(g)},
            {"yukawa", TwistKernel::yukawa(g, 1.0)},
            {"yukawa_pointwise", TwistKernel::yukawa(g, 1.0, Sampling::Pointwise)},
            {"coulomb", TwistKernel::coulomb(g)},
            {"tabulated", TwistKernel::tabulated(g, draw::field(g, rng))}};
}

} // namespace detail

// ---------------------------------------------------------------------------
// lattice
// ---------------------------------------------------------------------------

inline TaskOutput lattice_checks(const RunConfig& c, std::mt19937_64& rng) {
    TaskOutput out;
    const auto rec = [&](std::string name, std::string anchor, double r, double tol, std::vector<std::string> cv = {}) {
        out.records.push_back(make_record("lattice", std::move(name), std::move(anchor), r, tol, Comparison::AtMost, "none", std::move(cv)));
    };
    const Grid g = c.grid.grid();
    double anti = 0.0, bil = 0.0;
    for (int i = 0; i < c.draws; ++i) {
        const auto s = draw::test_function(g, rng, 1.0), t = draw::test_function(g, rng, 1.0), u = draw::test_function(g, rng, 1.0);
        const double a = draw::uniform(rng, -2.0, 2.0), b = draw::uniform(rng, -2.0, 2.0);
        anti = std::max(anti, std::abs(symplectic_form(s, t, g) + symplectic_form(t, s, g)));
        bil = std::max(bil, std::abs(symplectic_form(a * s + b * t, u, g) - a * symplectic_form(s, u, g) - b * symplectic_form(t, u, g)));
    }
    rec("symplectic_antisymmetry", "eta(s,t) = -eta(t,s)", anti, 1e-13);
    rec("symplectic_bilinearity", "eta(as+bt,u) = a eta(s,u) + b eta(t,u)", bil, 1e-13);

    const auto sigma = TwistKernel::tabulated(g, draw::field(g, rng));
    double lin = 0.0, trans = 0.0;
    for (int i = 0; i < 5; ++i) {
        const Field f = draw::field(g, rng), h = draw::field(g, rng);
        const Shift a{1 + i, (g.dim > 1) ? i : 0, 0};
        lin = std::max(lin, detail::sup(convolve(sigma, 2.0 * f - 3.0 * h) - (2.0 * convolve(sigma, f) - 3.0 * convolve(sigma, h))));
        trans = std::max(trans, detail::sup(convolve(sigma, translate(g, f, a)) - translate(g, convolve(sigma, f), a)));
    }
    rec("convolve_linearity", "sigma*(af+bh) = a sigma*f + b sigma*h", lin, 1e-12, {conv::kConvolution});
    rec("convolve_translation", "sigma*(T_a f) = T_a (sigma*f)", trans, 1e-13, {conv::kConvolution});

    std::mt19937_64 krng = rng;
    for (const auto& [label, k] : detail::named_kernels(g, krng)) {
        if (label == "tabulated") continue;
        const Field f = draw::field(g, rng), h = draw::field(g, rng);
        const double lhs = g.cell_volume() * h.dot(convolve(k, f));
        const double rhs = g.cell_volume() * convolve(k, h).dot(f);
        rec("kernel_symmetry[" + label + "]", "<g, sigma*f> = <sigma*g, f> for even kernels", std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)),
            1e-12);
    }

    for (const Grid& gg : {g, c.coulomb.grid.grid()}) {
        const std::string tag = std::to_string(gg.dim) + "d";
        const Field f = draw::field(gg, rng);
        const auto p = DiffOp::helmholtz(c.helmholtz_mass);
        rec("fundamental_solution[" + p.name() + "," + tag + "]", "P(sigma_P * f) = f",
            detail::sup(apply_diffop(p, gg, convolve(fundamental_solution(p, gg, ZeroMode::Strict), f)) - f), 1e-12);
        const auto lap = DiffOp::neg_laplacian();
        const Field f0 = f.array() - f.mean();
        rec("fundamental_solution[" + lap.name() + "," + tag + "]", "P(sigma_P * f) = f - mean(f)",
            detail::sup(apply_diffop(lap, gg, convolve(fundamental_solution(lap, gg, ZeroMode::MeanZero), f)) - f0), 1e-12,
            {"zero mode: mean-zero"});
    }
    return out;
}

// ---------------------------------------------------------------------------
// fermi
// ---------------------------------------------------------------------------

inline TaskOutput fermi_checks(const RunConfig& c, std::mt19937_64& rng) {
    TaskOutput out;
    const Grid g = c.grid.grid();
    const OneParticleSpace h(g, c.internal_dim);
    const FermionFockSpace fock(h, c.f_max);
    const auto safe = fock.safe();
    const std::string rs = restrict::fermion(c.f_max);
    const auto rec = [&](std::string name, std::string anchor, double r, double tol, std::string restr = "none",
                         std::vector<std::string> cv = {}) {
        out.records.push_back(make_record("fermi", std::move(name), std::move(anchor), r, tol, Comparison::AtMost, std::move(restr), std::move(cv)));
    };
    const auto m = static_cast<Eigen::Index>(h.modes());
    const auto id = sparse_identity(fock.dim());

    double car = 0.0, aa = 0.0, cc = 0.0, psi_pp = 0.0, psi_pd = 0.0;
    for (int i = 0; i < 5; ++i) {
        const CVec v = draw::cvec(m, rng), w = draw::cvec(m, rng);
        SpMat r = detail::anti(fock.annihilate(v), fock.create(w));
        r -= h.dot(v, w) * id;
        car = std::max(car, frobenius(restrict_sparse(r, {}, safe)));
        aa = std::max(aa, frobenius(detail::anti(fock.annihilate(v), fock.annihilate(w))));
        cc = std::max(cc, frobenius(detail::anti(fock.create(v), fock.create(w))));
        const CVec x = draw::cvec(static_cast<Eigen::Index>(h.sector_size()), rng), y = draw::cvec(static_cast<Eigen::Index>(h.sector_size()), rng);
        const SpMat px = fock.psi(x), py = fock.psi(y);
        psi_pp = std::max(psi_pp, frobenius(restrict_sparse(detail::anti(px, py), {}, safe)));
        SpMat d = detail::anti(px, SpMat(py.adjoint()));
        d -= g.cell_volume() * y.dot(x) * id;
        psi_pd = std::max(psi_pd, frobenius(restrict_sparse(d, {}, safe)));
    }
    rec("car_annihilate_create", "{a(v), a*(w)} = <v,w> I", car, 1e-13, rs);
    rec("car_annihilate_annihilate", "{a(v), a(w)} = 0", aa, 1e-13);
    rec("car_create_create", "{a*(v), a*(w)} = 0", cc, 1e-13);
    rec("psi_anticommutator", "{psi(v), psi(w)} = 0", psi_pp, 1e-13, rs);
    rec("psi_adjoint_anticommutator", "{psi(v), psi(w)^*} = <w,v> I", psi_pd, 1e-13, rs);

    CVec p1(m), p2(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        p1[i] = std::polar(1.0, draw::uniform(rng, -kPi, kPi));
        p2[i] = std::polar(1.0, draw::uniform(rng, -kPi, kPi));
    }
    const OneParticleOperator u(CMat(p1.asDiagonal())), v(CMat(p2.asDiagonal())), uv(CMat(p1.cwiseProduct(p2).asDiagonal()));
    rec("gamma_multiplicative", "Gamma(UV) = Gamma(U) Gamma(V)", frobenius(SpMat(fock.gamma(uv) - fock.gamma(u) * fock.gamma(v))), 1e-12);

    const auto sigma = c.kernel.build(g);
    const auto s = draw::test_function(g, rng, c.amplitude);
    const auto kap = h.kappa();
    rec("stone_kappa_anticommutator", "[mu_s, kappa]_+ = 0", anticommutator(stone_generator(h, sigma, s).matrix(), kap).norm(), 1e-13,
        "none", {conv::kConvolution});
    rec("twist_kappa_commutator", "[u_s, kappa] = 0", commutator(twist_unitary(h, sigma, s).matrix(), kap).norm(), 1e-13);
    const SpMat mu = fock.dgamma(stone_generator(h, sigma, s));
    rec("dgamma_mu_number", "[dGamma(mu_s), N_f] = 0", frobenius(detail::comm(mu, fock.number_operator())), 1e-12);
    rec("dgamma_mu_charge", "[dGamma(mu_s), Q] = 0", frobenius(detail::comm(mu, fock.charge_operator())), 1e-12);
    rec("dgamma_mu_kappa", "[dGamma(mu_s), Gamma(kappa)]_+ = 0", frobenius(anticommutator(mu, fock.kappa())), 1e-12);
    return out;
}

// ---------------------------------------------------------------------------
// bose
// ---------------------------------------------------------------------------

inline TaskOutput bose_checks(const RunConfig& c, std::mt19937_64& rng) {
    TaskOutput out;
    const Grid g = c.grid.grid();
    const auto fs = detail::generators(c, rng);
    const auto b = BosonSector::from_test_functions(g, fs, c.n_max);
    const auto& fk = b.fock();
    const auto interior = fk.shell_at_most(c.n_max - 1);
    const auto rec = [&](std::string name, std::string anchor, double r, double tol, std::string restr = "none",
                         std::vector<std::string> cv = {}) {
        out.records.push_back(make_record("bose", std::move(name), std::move(anchor), r, tol, Comparison::AtMost, std::move(restr), std::move(cv)));
    };
    const auto block = [&](const SpMat& x) { return frobenius(restrict_sparse(x, interior, interior)); };
    const auto k = static_cast<Eigen::Index>(b.basis().size());

    const CVec c1 = draw::cvec(k, rng), c2 = draw::cvec(k, rng);
    SpMat ccr = detail::comm(fk.annihilate(c1), fk.create(c2));
    ccr -= c1.dot(c2) * sparse_identity(fk.dim());
    rec("ccr_interior", "[b(f), b*(g)] = <f,g> I", block(ccr), 1e-13, restrict::interior(c.n_max));
    rec("ccr_annihilators", "[b(f), b(g)] = 0", frobenius(detail::comm(fk.annihilate(c1), fk.annihilate(c2))), 1e-13);
    rec("number_commutes", "[N_b, b*(f) b(f)] = 0", frobenius(detail::comm(fk.number_operator(), SpMat(fk.create(c1) * fk.annihilate(c1)))), 1e-13);

    double segal = 0.0, cocycle = 0.0, unitary = 0.0;
    for (std::size_t i = 0; i < fs.size(); ++i) {
        unitary = std::max(unitary, unitary_defect(b.weyl(fs[i])));
        for (std::size_t j = 0; j < fs.size(); ++j) {
            SpMat cm = detail::comm(b.segal(fs[i]), b.segal(fs[j]));
            cm += kI * symplectic_form(fs[i], fs[j], g) * sparse_identity(fk.dim());
            segal = std::max(segal, block(cm));
            cocycle = std::max(cocycle, weyl_cocycle_residual(fk, b.coefficients(fs[i]), b.coefficients(fs[j]), 12, c.n_max - 2));
        }
    }
    rec("segal_commutator", "[phi(s), phi(t)] = -i eta(s,t) I", segal, 1e-12, restrict::interior(c.n_max));
    rec("weyl_unitary", "W(s)^* W(s) = I", unitary, 1e-12);
    rec("weyl_cocycle", "W(s) W(t) = exp(+i eta/2) W(s+t)", cocycle, 1e-12, "boson shell <= " + std::to_string(c.n_max - 2),
        {conv::kCocycle, conv::kGuard});

    // Characteristic functional against the Gaussian as N_max grows.
    std::ostringstream csv;
    csv << "n_max,characteristic_error,cocycle_unguarded\n";
    double worst_increase = 0.0, prev = std::numeric_limits<double>::infinity(), last = 0.0;
    for (int n = 2; n <= c.n_max + 4; n += 2) {
        const auto bn = BosonSector::from_test_functions(g, fs, n);
        const double err = std::abs(bn.weyl(fs[0])(0, 0) - bn.fock_functional(fs[0]));
        const double unguarded = weyl_cocycle_residual_unguarded(bn.fock(), bn.coefficients(fs[0]), bn.coefficients(fs[1 % fs.size()]), 3);
        csv << n << "," << err << "," << unguarded << "\n";
        if (std::isfinite(prev)) worst_increase = std::max(worst_increase, err - prev);
        prev = err;
        if (n == c.n_max) last = err;
    }
    rec("characteristic_convergence", "|<W(s)>_Nmax - exp(-|f|^2/4)| nonincreasing in N_max up to roundoff", worst_increase, 1e-14);
    rec("characteristic_functional", "<Omega, W(s) Omega> = exp(-|f|^2/4)", last, 1e-12, "N_max = " + std::to_string(c.n_max));
    out.artifacts["truncation_sweep.csv"] = csv.str();
    return out;
}

// ---------------------------------------------------------------------------
// twisted
// ---------------------------------------------------------------------------

/// Twisted relation and infinitesimal relation over random draws for one kernel.
inline TaskOutput twisted_kernel_draws(const RunConfig& c, std::mt19937_64& rng, const std::string& label) {
    TaskOutput out;
    const Grid g = c.grid.grid();
    std::mt19937_64 krng = task_rng(c.seed, "kernels");
    TwistKernel sigma = TwistKernel::zero(g);
    for (auto& [l, k] : detail::named_kernels(g, krng))
        if (l == label) sigma = k;
    const auto fs = detail::generators(c, rng);
    const auto sys = detail::reference_system(c, sigma, fs, c.n_max);
    double weyl = 0.0, inf = 0.0;
    for (int i = 0; i < c.draws; ++i) {
        const auto s = draw::in_span(sys.bose().basis(), rng, c.amplitude * draw::uniform(rng, 0.2, 1.0));
        const CVec w = detail::electron_wave(c, draw::wave(g, rng));
        weyl = std::max(weyl, sys.verify_twisted_weyl_relation(s, w));
        inf = std::max(inf, sys.verify_infinitesimal(s, w));
    }
    const std::string rs = restrict::fermion(c.f_max) + "; " + std::to_string(c.draws) + " draws";
    out.records.push_back(make_record("twisted", "twisted_weyl_relation[" + label + "]", "W(s) psi(w) = psi(exp(-i sigma*s0) w) W(s)", weyl, 1e-11,
                                      Comparison::AtMost, rs, {conv::kConvolution}));
    out.records.push_back(make_record("twisted", "infinitesimal_relation[" + label + "]", "[phi(s), psi(w)] = -psi((sigma*s0) w)", inf, 1e-11,
                                      Comparison::AtMost, rs, {conv::kConvolution}));
    return out;
}

inline TaskOutput twisted_identities(const RunConfig& c, std::mt19937_64& rng) {
    TaskOutput out;
    const Grid g = c.grid.grid();
    const auto rec = [&](std::string name, std::string anchor, double r, double tol, std::string restr = "none",
                         std::vector<std::string> cv = {}, Comparison cmp = Comparison::AtMost) {
        out.records.push_back(make_record("twisted", std::move(name), std::move(anchor), r, tol, cmp, std::move(restr), std::move(cv)));
    };
    const auto sigma = c.kernel.build(g);
    const auto fs = detail::generators(c, rng);
    const auto sys = detail::reference_system(c, sigma, fs, c.n_max);
    const auto& basis = sys.bose().basis();
    const auto s = draw::in_span(basis, rng, c.amplitude), t = draw::in_span(basis, rng, c.amplitude);
    const CVec w = detail::electron_wave(c, draw::wave(g, rng));
    const std::vector<std::string> cv{conv::kConvolution, "kernel: " + sigma.label()};

    rec("weyl_identity", "W(0) = I", (sys.twisted_weyl(ScalarTestFunction::zero(g)) - sys.identity()).norm() / sys.identity().norm(), 1e-12,
        "none", {conv::kRelative});
    rec("weyl_inverse", "W(s) W(-s) = I", sys.verify_weyl_inverse(s), 1e-11);
    rec("weyl_cocycle", "W(s) W(t) = exp(+i eta/2) W(s+t)", sys.verify_cocycle(s, t, 12), 1e-11, "boson shell <= " + std::to_string(c.n_max - 2),
        {conv::kCocycle, conv::kGuard});
    std::vector<Eigen::Index> blocks;
    for (Eigen::Index i = 0; i < sys.fermion_dim(); i += std::max<Eigen::Index>(1, sys.fermion_dim() / 40)) blocks.push_back(i);
    rec("field_exponential", "exp(i phi(s)) = W(s)", sys.verify_exponential(s, blocks), 1e-10, std::to_string(blocks.size()) + " fermion blocks");
    rec("field_commutator", "[phi(s), phi(t)] = -i eta(s,t) I", sys.verify_field_commutator(s, t), 1e-11, restrict::interior(c.n_max));
    rec("conservation", "[phi(s), N_f] = [phi(s), Q] = 0", sys.verify_conservation(s) / sys.twisted_field(s).norm(), 1e-12, "none",
        {conv::kRelative});
    double shift = 0.0;
    for (int q = -c.f_max + 1; q <= c.f_max; ++q) shift = std::max(shift, sys.verify_sector_shift(s, w, q));
    rec("sector_shift", "psi(exp(-i sigma*s0) w) W^q(s) = W^{q-1}(s) psi(w)", shift, 1e-11, restrict::fermion(c.f_max), cv);
    rec("annihilator_vacuum", "a_{b,sigma}(s) Omega = 0", sys.verify_annihilates_vacuum(s), 1e-13);
    rec("one_electron_action", "dGamma(mu_s) acts as -(sigma*s0) on one electron", sys.verify_one_electron_action(s, w), 1e-12, "one-electron sector", cv);
    const CVec v = draw::cvec(static_cast<Eigen::Index>(sys.one_particle().modes()), rng);
    rec("infinitesimal_selfdual", "[dGamma(mu_s), psi_hat(v)] = psi_hat(mu_s v)", sys.verify_infinitesimal_selfdual(s, v), 1e-11,
        restrict::fermion(c.f_max), cv);

    // Vacuum-sector restriction is untwisted.
    const KronOperator W = sys.twisted_weyl(s);
    const CMat vac = product_state(sys.fermi().vacuum(), sys.bose().fock().vacuum());
    const CMat untwisted = product_state(sys.fermi().vacuum(), CVec(sys.bose().weyl(s).col(0)));
    rec("vacuum_sector_untwisted", "W(s) (Omega_f ⊗ .) = Omega_f ⊗ W_b(s) .", (W.apply(vac) - untwisted).norm(), 1e-12);

    // Translation covariance on a shift-closed Fourier span.
    {
        const std::size_t k1 = g.frequency_index({1, 0, 0}), k2 = g.frequency_index({2, 0, 0}), k3 = g.frequency_index({-1, 0, 0});
        const BosonSector fb(g, fourier_generators(g, {k1, k2, k3}), 4);
        const TwistedSystem ts(FermionFockSpace(OneParticleSpace(g, c.internal_dim), c.f_max), fb, sigma);
        const CVec f = fb.basis().synthesize(CVec::Constant(3, cplx(0.2, -0.1)));
        const ScalarTestFunction sf{f.real(), f.imag()};
        double tr = 0.0;
        for (int a : {1, 3, g.n}) tr = std::max(tr, ts.verify_translation(sf, {a, 0, 0}));
        rec("translation_covariance", "W(s_a) = V_a W(s) V_a^*", tr, 1e-10, "shifts 1, 3, n along axis 0");
    }
    return out;
}

inline TaskOutput twisted_states(const RunConfig& c, std::mt19937_64& rng) {
    TaskOutput out;
    const Grid g = c.grid.grid();
    const OneParticleSpace h(g, c.internal_dim);
    const auto rec = [&](std::string name, std::string anchor, double r, double tol, Comparison cmp = Comparison::AtMost,
                         std::string restr = "none", std::vector<std::string> cv = {}) {
        out.records.push_back(make_record("twisted", std::move(name), std::move(anchor), r, tol, cmp, std::move(restr), std::move(cv)));
    };
    const auto fs = detail::generators(c, rng);
    const auto sys = detail::reference_system(c, TwistKernel::yukawa(g, 1.0), fs, c.n_max);
    const auto s = draw::in_span(sys.bose().basis(), rng, c.amplitude);
    const auto ew = [&] { return detail::electron_wave(c, draw::wave(g, rng)); };

    // Charged states for |q| <= F_max: one and two particles of either sign.
    double det = 0.0, zero = 0.0;
    std::vector<ChargedVector> omegas{ChargedVector(h, {h.electron(ew())}), ChargedVector(h, {h.positron(ew())})};
    if (c.f_max >= 2) {
        omegas.emplace_back(h, std::vector<CVec>{h.electron(ew()), h.electron(ew())});
        omegas.emplace_back(h, std::vector<CVec>{h.electron(ew()), h.positron(ew())});
        omegas.emplace_back(h, std::vector<CVec>{h.positron(ew()), h.positron(ew())});
    }
    for (const auto& om : omegas) {
        det = std::max(det, sys.charged_state_eval(om, s).difference());
        zero = std::max(zero, std::abs(sys.charged_state_eval(om, ScalarTestFunction::zero(g)).matrix - 1.0));
    }
    rec("charged_state_determinant", "<W(s)>_q = det<v_i, u_s v_j> / det<v_i, v_j> * exp(-|f|^2/4)", det, 1e-11, Comparison::AtMost,
        "|q| <= " + std::to_string(c.f_max) + "; " + std::to_string(omegas.size()) + " charged vectors", {"determinant closed form"});
    rec("charged_state_zero", "<W(0)>_q = 1", zero, 1e-12);

    // Localization.
    const CVec wl = detail::electron_wave(c, draw::local_wave(g, {0}));
    const auto om = ChargedVector::electron(h, wl);
    ScalarTestFunction away = ScalarTestFunction::zero(g);
    away.s0[g.n / 2] = 0.7;
    away.s1[g.n / 2 + 1] = -0.4;
    {
        const auto r = localization_report(detail::reference_system(c, TwistKernel::delta(g), {away}, 6), om, away, 1e-14);
        rec("localization_delta", "supp s disjoint from supp Omega + supp sigma => <W(s)>_q = <W(s)>", r.premise ? r.difference : INFINITY, 1e-11,
            Comparison::AtMost, "premise " + std::string(r.premise ? "holds" : "fails"));
        const auto f = localization_report(detail::reference_system(c, TwistKernel::constant(g), {away}, 6), om, away, 1e-14);
        rec("nonlocalization_constant", "constant kernel: <W(s)>_q differs from <W(s)>", f.difference, 1e-3, Comparison::Exceeds);
        const auto p = DiffOp::helmholtz(c.helmholtz_mass);
        const auto sp = detail::reference_system(c, fundamental_solution(p, g, ZeroMode::Strict), {apply_diffop(p, g, away)}, 6, p);
        const auto rp = localization_report_p(sp, om, away, 1e-14);
        rec("localization_p", "supp s disjoint from supp Omega => <W(Ps)>_q = <W(Ps)>", rp.premise ? rp.difference : INFINITY, 1e-11,
            Comparison::AtMost, "premise " + std::string(rp.premise ? "holds" : "fails"), {"P = " + p.name()});
    }

    // Non-equivalence and the external-potential gap: a smooth profile.
    {
        Field prof(static_cast<Eigen::Index>(g.size()));
        for (std::size_t i = 0; i < g.size(); ++i) prof[static_cast<Eigen::Index>(i)] = std::cos(2.0 * kPi * static_cast<double>(g.coords(i)[0]) / g.n);
        ScalarTestFunction sc{prof, Field::Zero(prof.size())};
        sc = (c.amplitude / std::sqrt(g.cell_volume() * sc.smeared().squaredNorm())) * sc;
        const auto ps = detail::reference_system(c, TwistKernel::yukawa(g, 1.0), {sc}, c.n_max);
        const auto peaked = ChargedVector::electron(h, detail::electron_wave(c, draw::local_wave(g, {0})));
        const cplx w1 = ps.npoint(peaked, {sc});
        rec("one_point_nonzero", "|w_1(s)| > 0 in a charged state", std::abs(w1), 0.01, Comparison::Exceeds, "one-electron state peaked at one site");
        rec("one_point_oracle", "w_1(s) = <v, mu_s v>", std::abs(w1 - multiplier_moment(ps, peaked.vectors().front(), {sc})), 1e-12);
        CVec spread = CVec::Ones(static_cast<Eigen::Index>(g.size()));
        spread /= std::sqrt(g.cell_volume() * spread.squaredNorm());
        const auto flat = ChargedVector::electron(h, detail::electron_wave(c, spread));
        rec("external_potential_gap", "|w_2(s,s) - w_1(s)^2| > 0 for a spread state", external_potential_gap(ps, flat, sc, sc), 1e-3, Comparison::Exceeds,
            "uniform one-electron state");
        rec("external_potential_gap_peaked", "peaked state: w_2 = w_1^2", external_potential_gap(ps, peaked, sc, sc), 1e-10);
    }

    // m-point functions against the partition sum.
    {
        std::vector<ScalarTestFunction> ss;
        for (int i = 0; i < 4; ++i) ss.push_back(draw::in_span(sys.bose().basis(), rng, c.amplitude));
        const auto om1 = ChargedVector::electron(h, ew());
        double worst = 0.0;
        const int m_max = std::min(4, c.n_max);
        for (int m = 1; m <= m_max; ++m) {
            const std::vector<ScalarTestFunction> sub(ss.begin(), ss.begin() + m);
            worst = std::max(worst, std::abs(sys.npoint(om1, sub) - npoint_oracle(sys, om1, sub)));
        }
        rec("npoint_oracle", "<phi(s1)...phi(sm)>_q = sum over splittings of w_i w^sigma_j", worst, 1e-9, Comparison::AtMost,
            "m <= " + std::to_string(m_max));
        const auto zs = detail::reference_system(c, TwistKernel::zero(g), fs, c.n_max);
        double odd = 0.0;
        for (int m : {1, 3}) {
            const std::vector<ScalarTestFunction> sub(ss.begin(), ss.begin() + m);
            odd = std::max(odd, std::abs(zs.npoint(om1, sub)));
        }
        rec("odd_moments_vanish", "untwisted Fock odd moments vanish", odd, 1e-12, Comparison::AtMost, "m = 1, 3; sigma = 0");
    }

    // Worked models.
    {
        const auto ys = detail::reference_system(c, TwistKernel::yukawa(g, 1.0), {s}, c.n_max);
        const CVec w = ew();
        rec("yukawa_state_quadrature", "<W(s)> = dV sum |w|^2 exp(-i sigma*s0) exp(-|f|^2/4)", model_charged_state_quadrature(ys, w, s).difference(), 1e-6,
            Comparison::AtMost, "N_max = " + std::to_string(c.n_max), {"kernel: " + ys.sigma().label()});
        const auto cs = detail::reference_system(c, TwistKernel::coulomb(g), {s}, c.n_max);
        rec("coulomb_state_quadrature", "<W(s)> = dV sum |w|^2 exp(-i sigma*s0) exp(-|f|^2/4)", model_charged_state_quadrature(cs, w, s).difference(), 1e-6,
            Comparison::AtMost, "N_max = " + std::to_string(c.n_max), {"kernel: " + cs.sigma().label(), "Coulomb kernel: fundamental solution of -Laplacian"});
        const auto ls = detail::reference_system(c, TwistKernel::constant(g), {s}, c.n_max);
        const auto r = model_lebesgue_check(ls, s, w);
        const std::string sign = std::string("constant kernel sign: phi^lambda - phi = ") + (r.sign > 0 ? "+" : "-") + "<s0> Q";
        rec("lebesgue_field", "phi^lambda(s) - phi(s) = sign <s0> Q", r.field_residual, 1e-12, Comparison::AtMost, "none", {sign});
        rec("lebesgue_q0", "phi^{lambda,0} = phi", r.q0_residual, 1e-12, Comparison::AtMost, "q = 0", {sign});
        rec("lebesgue_sectors", "phi^{lambda,q} = phi + sign q <s0>", r.sector_residual, 1e-12, Comparison::AtMost, "all q", {sign});
        rec("lebesgue_commutator", "[phi^lambda(s), psi(w)] = -sign <s0> psi(w)", r.commutator_residual, 1e-12, Comparison::AtMost,
            restrict::fermion(c.f_max), {sign});
        rec("lebesgue_intertwiner", "psi(w) W^q(s) = exp(i sign <s0>) W^{q-1}(s) psi(w)", r.intertwiner_residual, 1e-12, Comparison::AtMost,
            restrict::fermion(c.f_max), {sign});
    }
    return out;
}

inline TaskOutput twisted_gauge(const RunConfig& c, std::mt19937_64& rng) {
    TaskOutput out;
    const Grid g = c.grid.grid();
    const auto rec = [&](std::string name, std::string anchor, double r, double tol, Comparison cmp = Comparison::AtMost,
                         std::vector<std::string> cv = {}) {
        out.records.push_back(make_record("twisted", std::move(name), std::move(anchor), r, tol, cmp, restrict::fermion(c.f_max), std::move(cv)));
    };
    for (const auto& [p, zm] : {std::pair{DiffOp::helmholtz(c.helmholtz_mass), ZeroMode::Strict}, std::pair{DiffOp::neg_laplacian(), ZeroMode::MeanZero}}) {
        const auto sigma = fundamental_solution(p, g, zm);
        auto s = draw::test_function(g, rng, c.amplitude);
        if (zm == ZeroMode::MeanZero) s = {smooth_projection(g, s.s0), smooth_projection(g, s.s1)};
        const auto sys = detail::reference_system(c, sigma, {s, apply_diffop(p, g, s)}, 6, p);
        double com = 0.0, ex = 0.0;
        for (int i = 0; i < 3; ++i) {
            const CVec w = detail::electron_wave(c, draw::wave(g, rng));
            com = std::max(com, sys.verify_gauge_commutator(s, w));
            ex = std::max(ex, sys.verify_gauge_exponentiated(s, w));
        }
        const std::vector<std::string> cv{"P = " + p.name(), std::string("zero mode: ") + to_string(zm)};
        rec("gauge_commutator[" + p.name() + "]", "[rho(s), psi(w)] = -psi(s0 w)", com, 1e-10, Comparison::AtMost, cv);
        rec("gauge_exponentiated[" + p.name() + "]", "exp(i rho(s)) psi(w) exp(-i rho(s)) = psi(exp(-i s0) w)", ex, 1e-10, Comparison::AtMost, cv);
    }
    // Bump detection and relative locality with the mean-zero Laplacian kernel.
    const auto p = DiffOp::neg_laplacian();
    const auto sigma = fundamental_solution(p, g, ZeroMode::MeanZero);
    const std::size_t a = 2, b = 3, far = static_cast<std::size_t>(g.n) / 2 + 3;
    const CVec wl = detail::electron_wave(c, draw::local_wave(g, {a, b}));
    const ScalarTestFunction one{smooth_field_with_values(g, {{a, 1.0}, {b, 1.0}}), Field::Zero(static_cast<Eigen::Index>(g.size()))};
    const ScalarTestFunction away{smooth_field_with_values(g, {{a, 0.0}, {b, 0.0}, {far, 1.0}}), Field::Zero(static_cast<Eigen::Index>(g.size()))};
    const auto sys = detail::reference_system(c, sigma, {apply_diffop(p, g, one), apply_diffop(p, g, away)}, 4, p);
    const std::vector<std::string> cv{"P = " + p.name(), "smooth bump: mean-zero, Nyquist-free"};
    rec("gauge_charge_detection", "s0 = 1 on supp w => [rho(s), psi(w)] = -psi(w)",
        (commutator(sys.gauge_generator(one), sys.psi(wl)) + sys.psi(wl)).norm({}, sys.safe_fermion()), 1e-10, Comparison::AtMost, cv);
    rec("gauge_relative_locality", "supp s disjoint from supp w => [rho(s), psi(w)] = 0", sys.gauge_commutator_norm(away, wl), 1e-12,
        Comparison::AtMost, cv);
    return out;
}

// ---------------------------------------------------------------------------
// coulomb
// ---------------------------------------------------------------------------

inline TaskOutput coulomb_checks(const RunConfig& c, std::mt19937_64& rng) {
    TaskOutput out;
    const Grid g = c.coulomb.grid.grid();
    const std::vector<std::string> cv{conv::kProjector, conv::kNyquist};
    const auto rec = [&](std::string name, std::string anchor, double r, double tol, std::string restr = "none",
                         Comparison cmp = Comparison::AtMost) {
        out.records.push_back(make_record("coulomb", std::move(name), std::move(anchor), r, tol, cmp, std::move(restr), cv));
    };
    const auto vfield = [&](double scale) {
        VectorField f(static_cast<Eigen::Index>(g.size()), g.dim);
        for (int a = 0; a < g.dim; ++a) f.col(a) = draw::field(g, rng, scale);
        return f;
    };
    const VectorField zero = VectorField::Zero(static_cast<Eigen::Index>(g.size()), g.dim);
    const Field s0 = smooth_projection(g, draw::field(g, rng, 0.3));
    VectorField f = vfield(1.0), h = vfield(1.0);
    // Keep the transverse amplitudes at the configured size.
    f *= c.coulomb.amplitude / std::sqrt(vector_dot(g, transverse_projector(g, f), transverse_projector(g, f)));
    h *= c.coulomb.amplitude / std::sqrt(vector_dot(g, transverse_projector(g, h), transverse_projector(g, h)));
    const CVec w = draw::wave(g, rng);

    const VectorField pf = transverse_projector(g, f);
    const double sup = std::max(1.0, pf.cwiseAbs().maxCoeff());
    rec("projector_gradient", "P_tr grad s = 0", transverse_projector(g, gradient(g, s0)).cwiseAbs().maxCoeff(), 1e-12);
    rec("projector_idempotent", "P_tr^2 = P_tr", (transverse_projector(g, pf) - pf).cwiseAbs().maxCoeff() / sup, 1e-12);
    rec("projector_divergence_free", "div P_tr f = 0", divergence(g, pf).cwiseAbs().maxCoeff() / sup, 1e-12);
    rec("projector_symmetric", "<P_tr f, h> = <f, P_tr h>", std::abs(vector_dot(g, pf, h) - vector_dot(g, f, transverse_projector(g, h))), 1e-12);
    const VectorTestFunction a{f, h}, b{h, 0.5 * f};
    rec("eta_tr_antisymmetry", "eta_tr(f,h) = -eta_tr(h,f)", std::abs(eta_tr(g, a, b) + eta_tr(g, b, a)), 1e-12);
    rec("eta_tr_gradient", "eta_tr(f, h + grad s) = eta_tr(f, h)",
        std::abs(eta_tr(g, a, b + VectorTestFunction{gradient(g, s0), zero}) - eta_tr(g, a, b)), 1e-12);

    const TransverseSector tr(g, {{f, zero}, {h, zero}}, c.coulomb.n_max);
    rec("transverse_basis_divergence", "div v = 0 for every transverse mode", tr.max_divergence(), 1e-12);
    std::ostringstream csv;
    write_transverse_basis_csv(csv, tr);
    out.artifacts["transverse_basis.csv"] = csv.str();

    const auto sigma = fundamental_solution(DiffOp::neg_laplacian(), g, ZeroMode::MeanZero);
    const FermionFockSpace fermi(OneParticleSpace(g, 1), c.coulomb.f_max);
    const auto scalar = [&](const Field& x) { return ScalarTestFunction{x, Field::Zero(x.size())}; };
    const std::string rf = restrict::fermion(c.coulomb.f_max);
    const std::string ri = restrict::interior(c.coulomb.n_max);
    {
        const CoulombSystem sys(fermi, {scalar(s0)}, {{f, zero}, {h, zero}}, c.coulomb.n_max, sigma);
        rec("a_ccr", "[A(f0), A_dot(f1)] = i <f0, P_tr f1>", std::max(sys.verify_a_ccr(f, h), sys.verify_a_ccr(h, h)), 1e-11, ri);
        rec("coulomb_condition", "A(grad s) = A_dot(grad s) = 0", sys.coulomb_condition(s0), 1e-12);
        rec("factor_independence", "[phi(s), A(f)] = 0", sys.verify_factor_independence(scalar(s0), {f, h}), 1e-12, ri);
    }
    {
        const CoulombSystem sys(fermi, {scalar(divergence(g, f)), scalar(laplacian(g, s0))}, {{f, zero}, {h, zero}}, c.coulomb.n_max, sigma);
        rec("psi_transverse_commute", "[psi(w), W_tr(f)] = 0", sys.verify_psi_transverse(w, {f, zero}), 1e-12);
        rec("v_relation", "V(f) psi(w) = psi(exp(-i sigma*div f) w) V(f)", sys.verify_v_relation(f, w), 1e-10, rf);
        rec("v_gauge", "V(-grad s) psi(w) = psi(exp(-i s0) w) V(-grad s)", sys.verify_v_gauge(s0, w), 1e-10, rf);
        rec("e_commutator", "[E(f), psi(w)] = -psi((sigma*div f) w)", sys.verify_e_commutator(f, w), 1e-11, rf);
        rec("div_e_form", "div E(s) = -phi^lambda(Laplacian s), relative to |div E(s)|", sys.verify_div_e_form(s0) / sys.div_e(s0).norm(), 1e-11, "none",
            Comparison::AtMost);
        rec("div_e_commutator", "[div E(s), psi(w)] = -psi(s0 w)", sys.verify_div_e_commutator(s0, w), 1e-10, rf);
        rec("div_e_exponentiated", "exp(i div E(s)) psi(w) exp(-i div E(s)) = psi(exp(-i s0) w)", sys.verify_div_e_exponentiated(s0, w), 1e-9, rf);
        rec("div_e_a_commute", "[div E(s), A(f)] = 0", sys.verify_div_e_a(s0, h), 1e-11, ri);
    }
    {
        const std::size_t sa = g.index({0, 0, 0}), sb = g.index({1, 0, 0}), sf = g.index({g.n / 2, g.n / 2, 0});
        const CVec wl = draw::local_wave(g, {sa, sb});
        const Field bump = smooth_field_with_values(g, {{sa, 1.0}, {sb, 1.0}});
        const Field far = smooth_field_with_values(g, {{sa, 0.0}, {sb, 0.0}, {sf, 1.0}});
        VectorField fa = zero;
        fa(static_cast<Eigen::Index>(sf), 0) = 1.0;
        fa(static_cast<Eigen::Index>(g.index({g.n / 2, g.n / 2 + 1, 0})), 1) = -0.6;
        const CoulombSystem sys(fermi, {scalar(laplacian(g, bump)), scalar(laplacian(g, far)), scalar(divergence(g, fa))}, {{fa, zero}},
                                c.coulomb.n_max, sigma);
        rec("charge_detection", "s0 = 1 on supp w => [div E(s), psi(w)] = -psi(w)",
            (commutator(sys.div_e(bump), sys.psi(wl)) + sys.psi(wl)).norm({}, sys.safe_fermion()), 1e-10, rf);
        rec("div_e_relative_locality", "supp s disjoint from supp w => [div E(s), psi(w)] = 0", sys.div_e_commutator_norm(far, wl), 1e-11, rf);
        rec("e_nonlocality", "[E(f), psi(w)] != 0 for disjoint supports", sys.e_commutator_norm(fa, wl), 1e-3, rf, Comparison::Exceeds);
    }
    return out;
}

// ---------------------------------------------------------------------------
// hamiltonian
// ---------------------------------------------------------------------------

inline TaskOutput hamiltonian_operators(const RunConfig& c, std::mt19937_64& rng) {
    TaskOutput out;
    const auto& hc = c.hamiltonian;
    const MomentumGrid mg(hc.grid.grid(), hc.mass);
    const std::vector<std::string> cv{conv::kDualMeasure, conv::kMixed, conv::shift(ShiftChoice::Forward)};
    const auto rec = [&](std::string name, std::string anchor, double r, double tol, Comparison cmp = Comparison::AtMost,
                         std::vector<std::string> extra = {}) {
        auto all = cv;
        all.insert(all.end(), extra.begin(), extra.end());
        out.records.push_back(make_record("hamiltonian", std::move(name), std::move(anchor), r, tol, cmp, "one-fermion sector", std::move(all)));
    };
    const auto n = static_cast<Eigen::Index>(mg.size());
    const auto wave = [&] {
        const CVec w = draw::cvec(n, rng);
        return CVec(w / mg.norm(w));
    };
    const auto freq = [&](int j) { return mg.index_of({j, 0, 0}); };

    double adj = 0.0, zero_shift = 0.0;
    for (auto choice : {ShiftChoice::Forward, ShiftChoice::Mirrored})
        for (std::size_t k = 0; k < mg.size(); ++k)
            adj = std::max(adj, (CMat(mu_hat(mg, k, choice)) - CMat(mu_hat_star(mg, mg.negate(k), choice))).norm());
    zero_shift = (CMat(mu_hat_star(mg, 0)) + 4.0 * kPi / (hc.mass * hc.mass) * CMat::Identity(n, n)).norm();
    rec("mu_adjoint", "mu(k) = mu^*(-k)", adj, 1e-13);
    rec("mu_zero_transfer", "mu^*(0) = -(4 pi / m^2) I", zero_shift, 1e-13);

    double cont_exact = 0.0, cont_identity = 0.0, cont_bare = 0.0;
    for (int i = 0; i < 5; ++i) {
        const CVec w = wave();
        const std::size_t k = static_cast<std::size_t>(i) % mg.size(), hh = (static_cast<std::size_t>(i) * 5 + 1) % mg.size();
        const auto r = mu_continuity(mg, k, hh, w);
        cont_exact = std::max(cont_exact, r.lhs / r.rhs_exact);
        cont_bare = std::max(cont_bare, r.lhs / r.rhs_bare);
        cont_identity = std::max(cont_identity, r.identity_residual / std::max(1.0, r.lhs));
    }
    rec("strong_continuity", "|mu(k)w - mu(h)w|^2 <= 16 pi^2 / m^4 |w(k+.) - (varpi_k/varpi_h)^2 w(h+.)|^2", cont_exact, 1.0 + 1e-12);
    rec("strong_continuity_identity", "|mu(k)w - mu(h)w|^2 = 16 pi^2 / varpi_k^4 |...|^2", cont_identity, 1e-10);
    rec("strong_continuity_bare", "same bound with prefactor 1 / m^4", cont_bare, 1.0 + 1e-12, Comparison::AtMost,
        {"bare 1/m^4 prefactor omits (4 pi)^2"});

    const double dk = mg.grid().dual_spacing();
    const CutoffFunction g = CutoffFunction::gaussian(mg, freq(hc.k_star), 0.5 * dk);
    const OneFermionBosonSpace space(mg, g, std::max(hc.n_max, 2));
    const auto terms = space.build();
    const KronOperator H = terms.total();
    const double scale = std::max(1.0, H.norm());
    double sa = 0.0;
    for (const KronOperator* t : {&terms.h0, &terms.hmuphi, &terms.hmu, &H}) sa = std::max(sa, (*t - t->adjoint()).norm() / scale);
    rec("selfadjoint", "H0, Hmuphi, Hmu, H selfadjoint", sa, 1e-12);
    const double hmu = space.hmu_scalar(g);
    rec("hmu_identity", "Hmu = sum 8 pi^2 g / varpi^3 dV_k I", (terms.hmu - hmu * space.identity()).norm() / hmu, 1e-12);
    rec("hmu_commutes", "[Hmu, H0] = [Hmu, Hmuphi] = 0",
        std::max(commutator(terms.hmu, terms.h0).norm(), commutator(terms.hmu, terms.hmuphi).norm()) / (hmu * scale), 1e-11);
    CutoffFunction gp = g;
    for (std::size_t k : g.support()) gp.values[static_cast<Eigen::Index>(k)] = draw::uniform(rng, 0.2, 1.0);
    const KronOperator dens = commutator(space.h0(gp), space.hmuphi(g));
    rec("density_commutator", "[H0(g'), Hmuphi(g)] = 2^{-1/2} sum varpi^2 g' g (mu^* b - mu b^*)", (dens - space.density_commutator(gp, g)).norm() / dens.norm(),
        1e-10);
    rec("density_commutator_single_varpi", "[H0(g'), Hmuphi(g)] = 2^{-1/2} sum varpi g' g (mu b^* - mu^* b)",
        (dens - space.density_commutator_single_varpi(gp, g)).norm() / dens.norm(), 1e-10, Comparison::AtMost,
        {"single-varpi form has the opposite sign"});
    rec("boson_number_nonconservation", "[H, N_b] != 0", commutator(H, space.boson_number()).norm(), 1e-3, Comparison::Exceeds);

    double closed = 0.0;
    for (auto choice : {ShiftChoice::Forward, ShiftChoice::Mirrored}) {
        const OneFermionBosonSpace sp(mg, g, 2, choice);
        const KronOperator hh = sp.build().total();
        for (int i = 0; i < 3; ++i) {
            const CVec w = wave();
            const CMat got = hh.apply(sp.vacuum_state(w));
            closed = std::max(closed, (got - sp.closed_form(w)).norm() / got.norm());
        }
    }
    rec("closed_form", "H (w ⊗ Omega) = sum 2^{-1/2} sqrt(dV_k) 4 pi g / varpi w_k ⊗ b^* Omega + Hmu w ⊗ Omega", closed, 1e-10);

    {
        const CutoffFunction z = CutoffFunction::zero(mg);
        const OneFermionBosonSpace sz(mg, z, 1);
        const CVec w = wave();
        rec("zero_cutoff_action", "g = 0 => H (w ⊗ Omega) = 0", sz.build().total().apply(sz.vacuum_state(w)).norm(), 1e-14);
        const std::size_t k = freq(2);
        const double gv = 0.7;
        const OneFermionBosonSpace s1(mg, CutoffFunction::point(mg, k, gv), 2);
        const CMat got = s1.build().total().apply(s1.vacuum_state(w));
        CMat expect = CMat::Zero(got.rows(), got.cols());
        const double v = mg.varpi(k);
        expect.col(0) = 8.0 * kPi * kPi * gv / (v * v * v) * mg.dvk() * w;
        expect.col(s1.one_boson_index(k)) = std::sqrt(0.5 * mg.dvk()) * 4.0 * kPi * gv / v * (mg.shift(mg.negate(k)) * w);
        rec("single_mode_action", "one dual point: two terms 2^{-1/2} sqrt(dV_k) 4 pi g / varpi and 8 pi^2 g / varpi^3 dV_k", (got - expect).norm(), 1e-12);
    }

    // Position-space consistency.
    {
        const Field s0 = draw::field(mg.grid(), rng, 0.4);
        rec("position_space_consistency", "F(-(sigma*s0) w) = dV_k/(2 pi)^d sum s0^(k) mu^*(k) F(w)", smeared_mu_residual(mg, s0, draw::cvec(n, rng)),
            1e-10, Comparison::AtMost, {"sigma^ = 4 pi / varpi^2"});
    }

    // Hmu grows with the flat radius; increments are shell sums.
    {
        double prev = 0.0, worst_drop = 0.0, worst_inc = 0.0, r_prev = -1.0;
        const double r_max = dk * (mg.grid().n / 2) * std::sqrt(static_cast<double>(mg.grid().dim));
        for (double r = 0.0; r <= r_max + 1e-12; r += 0.5 * dk) {
            const double v = OneFermionBosonSpace::hmu_scalar(mg, CutoffFunction::flat(mg, r));
            double shell = 0.0;
            for (std::size_t k = 0; k < mg.size(); ++k) {
                const double kk = mg.norm_k(k);
                if (kk > r_prev + 1e-12 && kk <= r + 1e-12) shell += 8.0 * kPi * kPi / std::pow(mg.varpi(k), 3) * mg.dvk();
            }
            worst_drop = std::max(worst_drop, prev - v);
            worst_inc = std::max(worst_inc, std::abs((v - prev) - shell));
            prev = v;
            r_prev = r;
        }
        rec("hmu_monotone", "Hmu(flat R) nondecreasing in R", worst_drop, 0.0);
        rec("hmu_increments", "Hmu(R') - Hmu(R) = sum_{R < |k| <= R'} 8 pi^2 / varpi^3 dV_k", worst_inc, 1e-12 * prev);
    }
    return out;
}

inline TaskOutput hamiltonian_transfer(const RunConfig& c, std::mt19937_64&) {
    TaskOutput out;
    const auto& hc = c.hamiltonian;
    const MomentumGrid mg(hc.grid.grid(), hc.mass);
    const double w = hc.width_cells * mg.grid().dual_spacing();
    const std::size_t ks = mg.index_of({hc.k_star, 0, 0}), ke = mg.index_of({hc.k_e, 0, 0});
    const auto r = momentum_transfer_demo(mg, ks, ke, w, w);
    const std::vector<std::string> cv{conv::kDualMeasure, conv::kMixed, "packet width " + std::to_string(hc.width_cells) + " dual cells"};
    const std::string rs = "k* = " + std::to_string(hc.k_star) + ", k_e = " + std::to_string(hc.k_e);
    out.records.push_back(make_record("hamiltonian", "transfer_overlap", "one-boson part of H(w ⊗ Omega) ~ w_{k*} ⊗ a^*(g) Omega", r.overlap, 0.99,
                                      Comparison::Exceeds, rs, cv));
    out.records.push_back(make_record("hamiltonian", "transfer_ratio", "amplitude ratio = varpi(k*)^2 / (2 pi)", r.bare_ratio_error(), 0.05,
                                      Comparison::AtMost, rs, cv));
    out.records.push_back(make_record("hamiltonian", "transfer_ratio_derived", "amplitude ratio = varpi(k*)^2 / (2 sqrt2 pi)", r.derived_ratio_error(), 0.05,
                                      Comparison::AtMost, rs, cv));
    {
        const CutoffFunction g0 = CutoffFunction::gaussian(mg, 0, w);
        const OneFermionBosonSpace sp(mg, g0, 1);
        const CVec wk = momentum_packet(mg, ke, w);
        out.records.push_back(make_record("hamiltonian", "transfer_zero_momentum", "k* = 0 => w_0 = w", (sp.shifted_wave(wk, 0) - wk).norm(), 0.0));
    }
    nlohmann::ordered_json j;
    j["k_star"] = hc.k_star;
    j["k_e"] = hc.k_e;
    j["width_cells"] = hc.width_cells;
    j["mass"] = hc.mass;
    j["overlap"] = r.overlap;
    j["one_boson_amplitude"] = {r.one_boson_amplitude.real(), r.one_boson_amplitude.imag()};
    j["vacuum_amplitude"] = {r.vacuum_amplitude.real(), r.vacuum_amplitude.imag()};
    j["ratio"] = r.ratio;
    j["bare_ratio"] = r.bare_ratio;
    j["derived_ratio"] = r.derived_ratio;
    out.artifacts["demo.json"] = j.dump(2) + "\n";
    return out;
}

inline TaskOutput hamiltonian_scan(const RunConfig& c, std::mt19937_64&) {
    TaskOutput out;
    const auto& hc = c.hamiltonian;
    const MomentumGrid mg(hc.scan_grid.grid(), hc.scan_mass);
    const double r_max = kPi / hc.scan_grid.dx;
    const auto scan = uv_divergence_scan(mg, geometric_radii(r_max, hc.scan_ratio, hc.scan_radii));
    const std::vector<std::string> cv{"OLS over the upper half of the radii", "I_p(R) = sum_{|k| <= R} varpi^-p dV_k"};
    const std::string rs = std::to_string(hc.scan_grid.dim) + "d, n = " + std::to_string(hc.scan_grid.n);
    out.records.push_back(make_record("hamiltonian", "uv_p2_linear", "I_2(R) grows linearly", scan.linear2.r2, 0.99, Comparison::Exceeds, rs, cv));
    out.records.push_back(make_record("hamiltonian", "uv_p3_log", "I_3(R) grows like ln R", scan.log3.r2, 0.99, Comparison::Exceeds, rs, cv));
    out.records.push_back(make_record("hamiltonian", "uv_p4_convergent", "I_4 converges", scan.increment4, 0.01, Comparison::AtMost, rs, cv));
    std::ostringstream csv;
    csv << "R,I_2,I_3,I_4\n";
    for (std::size_t i = 0; i < scan.radii.size(); ++i)
        csv << scan.radii[i] << "," << scan.values.at(2)[i] << "," << scan.values.at(3)[i] << "," << scan.values.at(4)[i] << "\n";
    out.artifacts["uv_scan.csv"] = csv.str();
    nlohmann::ordered_json j;
    j["p2_linear"] = {{"slope", scan.linear2.slope}, {"intercept", scan.linear2.intercept}, {"r2", scan.linear2.r2}};
    j["p3_log"] = {{"slope", scan.log3.slope}, {"intercept", scan.log3.intercept}, {"r2", scan.log3.r2}};
    j["p4_increment"] = scan.increment4;
    out.artifacts["uv_fits.json"] = j.dump(2) + "\n";
    return out;
}

inline TaskOutput hamiltonian_two_fermion(const RunConfig& c, std::mt19937_64& rng) {
    TaskOutput out;
    const MomentumGrid mg(Grid(1, 8, c.hamiltonian.grid.dx), c.hamiltonian.mass);
    const Field s0 = draw::field(mg.grid(), rng, 0.4);
    const CVec w1 = draw::cvec(8, rng), w2 = draw::cvec(8, rng);
    const auto r = two_fermion_check(mg, s0, w1, w2);
    const std::vector<std::string> cv{"positron components stored unconjugated in the pair state", "sigma^ = 4 pi / varpi^2"};
    const auto rec = [&](std::string name, std::string anchor, double v, double tol) {
        out.records.push_back(make_record("hamiltonian", std::move(name), std::move(anchor), v, tol, Comparison::AtMost, "electron-positron pair sector", cv));
    };
    rec("pair_state_w_sym", "pair state coefficients = dV w_sym", r.pair_residual, 1e-14);
    rec("two_fermion_position", "dGamma(mu) pair = (c(y2) - c(y1)) pair", r.position_residual, 1e-12);
    rec("two_fermion_momentum", "F2(dGamma(mu) pair) = sum s0^(-k) mu^-(k,k) F2(pair)", r.momentum_residual / std::max(1.0, r.scale), 1e-10);
    rec("two_fermion_zero_transfer", "mu^-(0,0) w_sym = 0", two_fermion_mu(mg, 0, 0, w_sym(w1, w2)).norm(), 1e-13);
    const CMat ws = w_sym(w1, w1);
    rec("w_sym_swap", "w_sym(y1,y2) = w_sym(y2,y1) for w1 = w2", (ws - ws.transpose()).norm(), 0.0);
    return out;
}

// ---------------------------------------------------------------------------
// Runner
// ---------------------------------------------------------------------------

inline std::vector<Task> suite_tasks(const std::string& suite) {
    std::vector<Task> t;
    if (suite == "lattice") t.push_back({suite, "lattice", lattice_checks});
    if (suite == "fermi") t.push_back({suite, "fermi", fermi_checks});
    if (suite == "bose") t.push_back({suite, "bose", bose_checks});
    if (suite == "twisted") {
        for (const char* k : {"delta", "constant", "zero", "yukawa", "yukawa_pointwise", "coulomb", "tabulated"})
            t.push_back({suite, std::string("draws[") + k + "]", [k](const RunConfig& c, std::mt19937_64& r) { return twisted_kernel_draws(c, r, k); }});
        t.push_back({suite, "identities", twisted_identities});
        t.push_back({suite, "states", twisted_states});
        t.push_back({suite, "gauge", twisted_gauge});
    }
    if (suite == "coulomb") t.push_back({suite, "coulomb", coulomb_checks});
    if (suite == "hamiltonian") {
        t.push_back({suite, "operators", hamiltonian_operators});
        t.push_back({suite, "transfer", hamiltonian_transfer});
        t.push_back({suite, "scan", hamiltonian_scan});
        t.push_back({suite, "two_fermion", hamiltonian_two_fermion});
    }
    require(!t.empty(), ErrorKind::Config, "unknown suite '" + suite + "'");
    return t;
}

/// Runs one task; an exception becomes a failed record.
inline TaskOutput run_task(const Task& task, const RunConfig& c) {
    const auto t0 = std::chrono::steady_clock::now();
    TaskOutput out;
    try {
        std::mt19937_64 rng = task_rng(c.seed, task.suite + "/" + task.name);
        out = task.run(c, rng);
    } catch (const std::exception& e) {
        out.records.push_back(make_record(task.suite, task.name + "/error", "plumbing", INFINITY, 0.0, Comparison::AtMost, e.what()));
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    for (auto& r : out.records) {
        r.wall_seconds = dt;
        c.tolerances.apply(r);
    }
    return out;
}

/// Bounded parallel map over tasks; outputs keep the task order.
inline std::vector<TaskOutput> run_tasks(const std::vector<Task>& tasks, const RunConfig& c) {
    std::vector<TaskOutput> outs(tasks.size());
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t i = next++; i < tasks.size(); i = next++) outs[i] = run_task(tasks[i], c);
    };
    const int n = std::max(1, std::min<int>(c.jobs, static_cast<int>(tasks.size())));
    std::vector<std::thread> pool;
    for (int i = 1; i < n; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    return outs;
}

struct RunResult {
    std::vector<CheckRecord> records;
    std::map<std::string, std::string> artifacts;
};

inline RunResult run_suites(const RunConfig& c, const std::vector<std::string>& suites) {
    std::vector<Task> tasks;
    for (const auto& s : suites) {
        auto t = suite_tasks(s);
        tasks.insert(tasks.end(), t.begin(), t.end());
    }
    RunResult res;
    for (auto& o : run_tasks(tasks, c)) {
        res.records.insert(res.records.end(), o.records.begin(), o.records.end());
        for (auto& [k, v] : o.artifacts) res.artifacts[k] = v;
    }
    return res;
}

} // namespace twistfield

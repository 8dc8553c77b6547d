// Copyright 2026 The twistfield Authors
// SPDX-License-Identifier: Apache-2.0

// twistfield: config-driven verification runs and evaluation front-ends.
//
//   twistfield verify --suite twisted --out run1
//   twistfield state --config cfg.yaml
//   twistfield hamiltonian scan --jobs 4
//
// Exit codes: 0 all checks pass, 1 a check failed, 2 usage or config error.

#include "twistfield/suites.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
namespace tf = twistfield;

namespace {

struct Flags {
    std::string config;
    std::vector<std::string> suites;
    std::vector<std::string> tols;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<int> jobs;
};

tf::RunConfig resolve(const Flags& f) {
    tf::RunConfig c = f.config.empty() ? tf::RunConfig{} : tf::load_config(f.config);
    if (!f.suites.empty()) c.suites = f.suites;
    if (f.seed) c.seed = *f.seed;
    if (f.out) c.out = *f.out;
    if (f.jobs) c.jobs = *f.jobs;
    for (const auto& t : f.tols) {
        const auto [k, v] = tf::ToleranceTable::parse(t);
        c.tolerances.set(k, v);
    }
    c.validate();
    return c;
}

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream os(p, std::ios::binary);
    tf::require(static_cast<bool>(os), tf::ErrorKind::InvalidArgument, "cannot write " + p.string());
    os << content;
}

/// Writes report.json, summary.txt, timings.csv and artifacts; returns the exit code.
int emit(const tf::RunConfig& c, const tf::RunResult& r) {
    fs::create_directories(c.out);
    const fs::path dir(c.out);
    write_file(dir / "report.json", tf::report_json(r.records));
    std::ostringstream summary, timings;
    tf::write_summary(summary, r.records);
    tf::write_timings_csv(timings, r.records);
    write_file(dir / "summary.txt", summary.str());
    write_file(dir / "timings.csv", timings.str());
    for (const auto& [name, content] : r.artifacts) write_file(dir / name, content);
    for (const auto& rec : r.records)
        if (!rec.pass) std::cout << "FAIL " << rec.key() << "  residual=" << tf::format_sci(rec.residual) << "  tol=" << tf::format_sci(rec.tolerance) << "\n";
    std::cout << summary.str().substr(summary.str().rfind('\n', summary.str().size() - 2) + 1);
    return tf::all_pass(r.records) ? 0 : 1;
}

tf::RunResult run_one(const tf::RunConfig& c, const std::string& suite, const std::string& name,
                      std::function<tf::TaskOutput(const tf::RunConfig&, std::mt19937_64&)> fn) {
    const auto outs = tf::run_tasks({tf::Task{suite, name, std::move(fn)}}, c);
    return {outs.front().records, outs.front().artifacts};
}

// --- state -------------------------------------------------------------------

tf::TaskOutput state_sweep(const tf::RunConfig& c, std::mt19937_64& rng) {
    const tf::Grid g = c.grid.grid();
    const tf::OneParticleSpace h(g, c.internal_dim);
    const auto& st = c.state;
    const bool disjoint = st.family == "disjoint";
    const tf::TwistKernel sigma = disjoint ? tf::TwistKernel::delta(g) : c.kernel.build(g);

    // Electron localized at site 0; disjoint functions avoid it.
    const tf::CVec w = tf::detail::electron_wave(c, disjoint ? tf::draw::local_wave(g, {0}) : tf::draw::wave(g, rng));
    // The zero function spans nothing, so the boson modes come from a fixed generator.
    std::vector<tf::ScalarTestFunction> family;
    const auto base = tf::draw::test_function(g, rng, 1.0);
    if (st.family == "zero") {
        family.push_back(tf::ScalarTestFunction::zero(g));
    } else if (st.family == "scale") {
        for (int i = 0; i < st.count; ++i) family.push_back((st.max_scale * i / std::max(1, st.count - 1)) * base);
    } else {
        for (int i = 0; i < st.count; ++i) {
            tf::ScalarTestFunction s = tf::ScalarTestFunction::zero(g);
            const auto site = static_cast<Eigen::Index>(2 + (i % (static_cast<int>(g.size()) - 3)));
            s.s0[site] = st.max_scale * (i + 1) / (2.0 * st.count);
            s.s1[site + 1] = -0.5 * s.s0[site];
            family.push_back(s);
        }
    }

    tf::TaskOutput out;
    std::ostringstream csv;
    csv.precision(17);
    csv << "id,re,im,difference,reference_re,reference_im,reference_difference\n";
    double worst = 0.0, worst_ref = 0.0;
    tf::cplx first{};
    for (std::size_t i = 0; i < family.size(); ++i) {
        tf::TwistedSystem::StateValue v{};
        double ref_diff = 0.0;
        tf::cplx ref{};
        try {
            const tf::TwistedSystem sys(tf::FermionFockSpace(h, c.f_max),
                                        tf::BosonSector::from_test_functions(g, {disjoint ? family[i] : base}, c.n_max), sigma);
            v = sys.charged_state_eval(tf::ChargedVector::electron(h, w), family[i]);
            ref = sys.reference_value(family[i]);
            ref_diff = std::abs(v.matrix - ref);
        } catch (const tf::Error& e) {
            const std::string msg = e.what();
            throw tf::Error(e.kind(), "test function " + std::to_string(i) + ": " + msg.substr(msg.find(": ") + 2));
        }
        csv << i << "," << v.matrix.real() << "," << v.matrix.imag() << "," << v.difference() << "," << ref.real() << "," << ref.imag() << ","
            << ref_diff << "\n";
        if (i == 0) first = v.matrix;
        worst = std::max(worst, v.difference());
        worst_ref = std::max(worst_ref, ref_diff);
    }
    out.artifacts["state.csv"] = csv.str();
    const std::string rs = "family " + st.family + ", " + std::to_string(family.size()) + " functions";
    out.records.push_back(tf::make_record("state", "closed_form", "<W(s)>_q matrix = closed form", worst, 1e-11, tf::Comparison::AtMost, rs,
                                          {"kernel: " + sigma.label()}));
    if (disjoint)
        out.records.push_back(tf::make_record("state", "localization", "disjoint supports: <W(s)>_q = exp(-|f|^2/4)", worst_ref, 1e-12,
                                              tf::Comparison::AtMost, rs, {"kernel: " + sigma.label()}));
    if (st.family == "zero")
        out.records.push_back(tf::make_record("state", "zero_value", "<W(0)>_q = 1", std::abs(first - 1.0), 1e-12));
    return out;
}

// --- npoint ------------------------------------------------------------------

tf::TaskOutput npoint_table(const tf::RunConfig& c, std::mt19937_64& rng) {
    const tf::Grid g = c.grid.grid();
    const tf::OneParticleSpace h(g, c.internal_dim);
    const auto sys = tf::detail::reference_system(c, c.kernel.build(g), tf::detail::generators(c, rng), c.n_max);
    std::vector<tf::ScalarTestFunction> ss;
    for (int i = 0; i < c.npoint_m_max; ++i) ss.push_back(tf::draw::in_span(sys.bose().basis(), rng, c.amplitude));
    const auto om = tf::ChargedVector::electron(h, tf::detail::electron_wave(c, tf::draw::wave(g, rng)));
    tf::TaskOutput out;
    std::ostringstream csv;
    csv.precision(17);
    csv << "m,matrix_re,matrix_im,oracle_re,oracle_im,difference\n";
    double worst = 0.0;
    for (int m = 1; m <= c.npoint_m_max; ++m) {
        const std::vector<tf::ScalarTestFunction> sub(ss.begin(), ss.begin() + m);
        const tf::cplx a = sys.npoint(om, sub), b = tf::npoint_oracle(sys, om, sub);
        csv << m << "," << a.real() << "," << a.imag() << "," << b.real() << "," << b.imag() << "," << std::abs(a - b) << "\n";
        worst = std::max(worst, std::abs(a - b));
    }
    out.artifacts["npoint.csv"] = csv.str();
    out.records.push_back(tf::make_record("npoint", "oracle", "<phi(s1)...phi(sm)>_q = sum over splittings of w_i w^sigma_j", worst, 1e-9,
                                          tf::Comparison::AtMost, "m <= " + std::to_string(c.npoint_m_max), {"kernel: " + sys.sigma().label()}));
    return out;
}

// --- hamiltonian action --------------------------------------------------------

tf::TaskOutput hamiltonian_action(const tf::RunConfig& c, std::mt19937_64& rng) {
    const auto& hc = c.hamiltonian;
    const tf::MomentumGrid mg(hc.grid.grid(), hc.mass);
    const double dk = mg.grid().dual_spacing();
    const std::size_t ks = mg.index_of({hc.k_star, 0, 0});
    tf::CutoffFunction g = tf::CutoffFunction::zero(mg);
    if (hc.cutoff == "gaussian") g = tf::CutoffFunction::gaussian(mg, ks, hc.width_cells * dk);
    if (hc.cutoff == "point") g = tf::CutoffFunction::point(mg, ks, 1.0);
    const tf::OneFermionBosonSpace space(mg, g, hc.n_max);
    tf::CVec w = tf::draw::cvec(static_cast<Eigen::Index>(mg.size()), rng);
    w /= mg.norm(w);
    const tf::CMat hw = space.build().total().apply(space.vacuum_state(w));
    const double closed = (hw - space.closed_form(w)).norm();

    tf::TaskOutput out;
    std::ostringstream csv;
    csv.precision(17);
    csv << "k_index,boson_index,re,im\n";
    for (Eigen::Index j = 0; j < hw.cols(); ++j)
        for (Eigen::Index k = 0; k < hw.rows(); ++k)
            if (hw(k, j) != tf::cplx(0.0)) csv << k << "," << j << "," << hw(k, j).real() << "," << hw(k, j).imag() << "\n";
    out.artifacts["action.csv"] = csv.str();
    nlohmann::ordered_json js;
    js["cutoff"] = g.label;
    js["modes"] = space.modes().size();
    js["norm"] = hw.norm();
    js["hmu_scalar"] = space.hmu_scalar(g);
    js["closed_form_residual"] = closed;
    out.artifacts["action.json"] = js.dump(2) + "\n";
    const double scale = std::max(1.0, hw.norm());
    out.records.push_back(tf::make_record("hamiltonian", "action_closed_form", "H (w ⊗ Omega) matrix = closed form", closed / scale, 1e-10,
                                          tf::Comparison::AtMost, "cutoff " + hc.cutoff, {tf::conv::kDualMeasure, tf::conv::kMixed}));
    if (hc.cutoff == "zero")
        out.records.push_back(tf::make_record("hamiltonian", "action_zero", "g = 0 => H (w ⊗ Omega) = 0", hw.norm(), 1e-14));
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"twistfield: lattice twisted Weyl / CAR verification"};
    app.require_subcommand(1);
    Flags flags;
    const auto common = [&](CLI::App* sub) {
        sub->add_option("--config", flags.config, "YAML config file")->check(CLI::ExistingFile);
        sub->add_option("--tol", flags.tols, "tolerance override KEY=VAL (suite/name, suite or *)");
        sub->add_option("--seed", flags.seed, "random seed");
        sub->add_option("--out", flags.out, "output directory");
        sub->add_option("--jobs", flags.jobs, "parallel tasks");
    };
    auto* verify = app.add_subcommand("verify", "run verification suites");
    common(verify);
    verify->add_option("--suite", flags.suites, "suite to run (repeatable)");
    auto* state = app.add_subcommand("state", "evaluate a charged state over a test-function family");
    common(state);
    auto* npoint = app.add_subcommand("npoint", "m-point functions against the partition-sum oracle");
    common(npoint);
    auto* coulomb = app.add_subcommand("coulomb", "Coulomb-gauge checks and transverse basis");
    common(coulomb);
    auto* ham = app.add_subcommand("hamiltonian", "one-fermion Hamiltonian front-ends");
    common(ham);
    std::string ham_cmd;
    ham->add_option("mode", ham_cmd, "action | demo | scan")->required()->check(CLI::IsMember({"action", "demo", "scan"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    tf::RunConfig cfg;
    try {
        cfg = resolve(flags);
        if (verify->parsed())
            for (const auto& s : cfg.suites) tf::suite_tasks(s);
    } catch (const std::exception& e) {
        std::cerr << "twistfield: " << e.what() << "\n";
        return 2;
    }

    try {
        if (verify->parsed()) return emit(cfg, tf::run_suites(cfg, cfg.suites));
        if (state->parsed()) return emit(cfg, run_one(cfg, "state", "sweep", state_sweep));
        if (npoint->parsed()) return emit(cfg, run_one(cfg, "npoint", "table", npoint_table));
        if (coulomb->parsed()) return emit(cfg, tf::run_suites(cfg, {"coulomb"}));
        if (ham_cmd == "action") return emit(cfg, run_one(cfg, "hamiltonian", "action", hamiltonian_action));
        if (ham_cmd == "demo") return emit(cfg, run_one(cfg, "hamiltonian", "transfer", tf::hamiltonian_transfer));
        return emit(cfg, run_one(cfg, "hamiltonian", "scan", tf::hamiltonian_scan));
    } catch (const std::exception& e) {
        std::cerr << "twistfield: " << e.what() << "\n";
        return 2;
    }
}

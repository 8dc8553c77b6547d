// Copyright 2026 The twistfield Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file config.hpp
 * @brief RunConfig and its YAML loader. Every value is validated before any
 *        computation starts.
 */

#pragma once

#include "twistfield/lattice.hpp"
#include "twistfield/report.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <set>

namespace twistfield {

inline const std::vector<std::string>& known_suites() {
    static const std::vector<std::string> s{"lattice", "fermi", "bose", "twisted", "coulomb", "hamiltonian"};
    return s;
}

struct GridSpec {
    int dim = 1;
    int n = 16;
    double dx = 0.5;
    Grid grid() const { return Grid(dim, n, dx); }
};

struct KernelSpec {
    std::string name = "yukawa";  ///< delta | constant | zero | yukawa | coulomb
    double mass = 1.0;
    std::string sampling = "spectral";

    TwistKernel build(const Grid& g) const {
        const Sampling smp = sampling == "pointwise" ? Sampling::Pointwise : Sampling::Spectral;
        if (name == "delta") return TwistKernel::delta(g);
        if (name == "constant") return TwistKernel::constant(g);
        if (name == "zero") return TwistKernel::zero(g);
        if (name == "yukawa") return TwistKernel::yukawa(g, mass, smp);
        if (name == "coulomb") return TwistKernel::coulomb(g, smp);
        throw Error(ErrorKind::Config, "unknown kernel '" + name + "'");
    }
};

struct RunConfig {
    std::uint64_t seed = 20261016;
    int jobs = 1;
    std::string out = "twistfield-out";
    std::vector<std::string> suites = known_suites();

    GridSpec grid{};
    int internal_dim = 1;
    int f_max = 2;
    int boson_modes = 3;
    int n_max = 8;
    double amplitude = 0.5;
    int draws = 20;
    KernelSpec kernel{};
    double helmholtz_mass = 1.0;
    ToleranceTable tolerances;

    struct Coulomb {
        GridSpec grid{2, 8, 0.5};
        int f_max = 2;
        int n_max = 4;
        double amplitude = 0.5;
    } coulomb;

    struct Hamiltonian {
        GridSpec grid{1, 32, 0.5};
        double mass = 1.0;
        int n_max = 2;
        int k_star = 3;
        int k_e = 8;
        double width_cells = 0.3;
        GridSpec scan_grid{3, 8, 0.5};
        double scan_mass = 0.2;
        int scan_radii = 12;
        double scan_ratio = 8.0;
        std::string cutoff = "gaussian";  ///< action cutoff: gaussian | zero | point
    } hamiltonian;

    struct State {
        std::string family = "scale";  ///< scale | zero | disjoint
        int count = 9;
        double max_scale = 1.0;  ///< |f| of the largest member; truncation error grows past 1 at N_max 8
    } state;

    int npoint_m_max = 4;

    void validate() const {
        const auto bad = [](bool ok, const std::string& msg) { require(ok, ErrorKind::Config, msg); };
        grid.grid();
        coulomb.grid.grid();
        hamiltonian.grid.grid();
        hamiltonian.scan_grid.grid();
        bad(jobs >= 1 && jobs <= 256, "jobs must be in 1..256");
        bad(!out.empty(), "output directory must be set");
        bad(!suites.empty(), "no suites selected");
        for (const auto& s : suites)
            bad(std::find(known_suites().begin(), known_suites().end(), s) != known_suites().end(), "unknown suite '" + s + "'");
        bad(internal_dim >= 1 && internal_dim <= 4, "internal_dim must be in 1..4");
        bad(f_max >= 2, "fermions.f_max must be >= 2 (two-particle states and safe sectors)");
        bad(boson_modes >= 1 && boson_modes <= 6, "bosons.modes must be in 1..6");
        bad(n_max >= 4, "bosons.n_max must be >= 4 (interior and safe shells)");
        bad(amplitude > 0.0 && amplitude <= 1.0, "bosons.amplitude must be in (0, 1]");
        bad(draws >= 1 && draws <= 1000, "draws must be in 1..1000");
        bad(helmholtz_mass > 0.0, "helmholtz_mass must be positive");
        bad(kernel.mass > 0.0, "kernel.mass must be positive");
        bad(kernel.sampling == "spectral" || kernel.sampling == "pointwise", "kernel.sampling must be spectral or pointwise");
        kernel.build(Grid(1, 4, 1.0));
        bad(coulomb.grid.dim >= 2, "coulomb.grid.dim must be >= 2");
        bad(coulomb.f_max >= 2 && coulomb.n_max >= 3, "coulomb f_max >= 2 and n_max >= 3 required");
        bad(coulomb.amplitude > 0.0 && coulomb.amplitude <= 1.0, "coulomb.amplitude must be in (0, 1]");
        bad(hamiltonian.mass > 0.0 && hamiltonian.scan_mass > 0.0, "hamiltonian masses must be positive");
        bad(hamiltonian.n_max >= 1, "hamiltonian.n_max must be >= 1");
        bad(hamiltonian.width_cells > 0.0, "hamiltonian.width_cells must be positive");
        bad(hamiltonian.cutoff == "gaussian" || hamiltonian.cutoff == "zero" || hamiltonian.cutoff == "point",
            "hamiltonian.cutoff must be gaussian, zero or point");
        bad(hamiltonian.scan_radii >= 4 && hamiltonian.scan_ratio > 1.0, "scan needs >= 4 radii and ratio > 1");
        bad(state.family == "scale" || state.family == "zero" || state.family == "disjoint", "state.family must be scale, zero or disjoint");
        bad(state.count >= 1 && state.count <= 10000, "state.count must be in 1..10000");
        bad(npoint_m_max >= 1 && npoint_m_max <= std::min(n_max, 6), "npoint.m_max must be in 1..min(n_max, 6)");
        const int fermion_modes = 2 * internal_dim * grid.n * (grid.dim >= 2 ? grid.n : 1) * (grid.dim >= 3 ? grid.n : 1);
        bad(fermion_modes <= 256, "grid too large for the fermion Fock space (at most 256 modes)");
    }
};

namespace detail {

template <class T>
void read(const YAML::Node& n, const char* key, T& out) {
    if (const YAML::Node v = n[key]) {
        try {
            out = v.as<T>();
        } catch (const YAML::Exception& e) {
            throw Error(ErrorKind::Config, std::string("config key '") + key + "': " + e.what());
        }
    }
}

inline void read_grid(const YAML::Node& n, GridSpec& g) {
    if (!n) return;
    read(n, "dim", g.dim);
    read(n, "n", g.n);
    read(n, "dx", g.dx);
}

} // namespace detail

/// Reads a YAML config on top of the defaults. Unknown top-level keys are
/// rejected so that typos do not silently fall back to defaults.
inline RunConfig load_config(const std::string& path) {
    YAML::Node root;
    try {
        root = YAML::LoadFile(path);
    } catch (const YAML::Exception& e) {
        throw Error(ErrorKind::Config, "cannot read config '" + path + "': " + e.what());
    }
    RunConfig c;
    if (!root || root.IsNull()) return c;
    require(root.IsMap(), ErrorKind::Config, "config root must be a mapping");
    static const std::set<std::string> keys{"seed", "jobs", "out", "suites", "grid", "internal_dim", "fermions", "bosons", "draws", "kernel",
                                            "helmholtz_mass", "tolerances", "coulomb", "hamiltonian", "state", "npoint"};
    for (const auto& kv : root) {
        const auto k = kv.first.as<std::string>();
        require(keys.count(k) == 1, ErrorKind::Config, "unknown config key '" + k + "'");
    }
    using detail::read;
    read(root, "seed", c.seed);
    read(root, "jobs", c.jobs);
    read(root, "out", c.out);
    read(root, "suites", c.suites);
    detail::read_grid(root["grid"], c.grid);
    read(root, "internal_dim", c.internal_dim);
    if (const auto f = root["fermions"]) read(f, "f_max", c.f_max);
    if (const auto b = root["bosons"]) {
        read(b, "modes", c.boson_modes);
        read(b, "n_max", c.n_max);
        read(b, "amplitude", c.amplitude);
    }
    read(root, "draws", c.draws);
    if (const auto k = root["kernel"]) {
        read(k, "name", c.kernel.name);
        read(k, "mass", c.kernel.mass);
        read(k, "sampling", c.kernel.sampling);
    }
    read(root, "helmholtz_mass", c.helmholtz_mass);
    if (const auto t = root["tolerances"]) {
        require(t.IsMap(), ErrorKind::Config, "tolerances must be a mapping");
        for (const auto& kv : t) {
            double v = 0.0;
            try {
                v = kv.second.as<double>();
            } catch (const YAML::Exception&) {
                throw Error(ErrorKind::Config, "tolerance '" + kv.first.as<std::string>() + "' is not a number");
            }
            c.tolerances.set(kv.first.as<std::string>(), v);
        }
    }
    if (const auto cg = root["coulomb"]) {
        detail::read_grid(cg["grid"], c.coulomb.grid);
        read(cg, "f_max", c.coulomb.f_max);
        read(cg, "n_max", c.coulomb.n_max);
        read(cg, "amplitude", c.coulomb.amplitude);
    }
    if (const auto h = root["hamiltonian"]) {
        detail::read_grid(h["grid"], c.hamiltonian.grid);
        read(h, "mass", c.hamiltonian.mass);
        read(h, "n_max", c.hamiltonian.n_max);
        read(h, "k_star", c.hamiltonian.k_star);
        read(h, "k_e", c.hamiltonian.k_e);
        read(h, "width_cells", c.hamiltonian.width_cells);
        detail::read_grid(h["scan_grid"], c.hamiltonian.scan_grid);
        read(h, "scan_mass", c.hamiltonian.scan_mass);
        read(h, "scan_radii", c.hamiltonian.scan_radii);
        read(h, "scan_ratio", c.hamiltonian.scan_ratio);
        read(h, "cutoff", c.hamiltonian.cutoff);
    }
    if (const auto s = root["state"]) {
        read(s, "family", c.state.family);
        read(s, "count", c.state.count);
        read(s, "max_scale", c.state.max_scale);
    }
    if (const auto np = root["npoint"]) read(np, "m_max", c.npoint_m_max);
    return c;
}

} // namespace twistfield

// Copyright 2026 The twistfield Authors
// SPDX-License-Identifier: Apache-2.0

// Shared random generators and brute-force oracles for the unit tests.
// Nothing here calls into the spectral code paths.

#pragma once

#include "twistfield/lattice.hpp"

#include <random>

namespace twistfield::testing {

inline Field random_field(const Grid& g, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> nd(0.0, scale);
    Field f(static_cast<Eigen::Index>(g.size()));
    for (Eigen::Index i = 0; i < f.size(); ++i) f[i] = nd(rng);
    return f;
}

inline CVec random_cvec(Eigen::Index n, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> nd(0.0, scale);
    CVec v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = cplx(nd(rng), nd(rng));
    return v;
}

inline ScalarTestFunction random_test_function(const Grid& g, std::mt19937_64& rng, double scale = 1.0) {
    return {random_field(g, rng, scale), random_field(g, rng, scale)};
}

/// dV sum_y sigma(x - y) f(y) by explicit double loop over coordinates.
inline Field naive_convolution(const Grid& g, const Field& sigma, const Field& f) {
    const std::size_t n = g.size();
    Field out = Field::Zero(static_cast<Eigen::Index>(n));
    for (std::size_t x = 0; x < n; ++x) {
        const auto cx = g.coords(x);
        double acc = 0.0;
        for (std::size_t y = 0; y < n; ++y) {
            const auto cy = g.coords(y);
            std::array<int, 3> d{0, 0, 0};
            for (int a = 0; a < g.dim; ++a) d[a] = ((cx[a] - cy[a]) % g.n + g.n) % g.n;
            std::size_t idx = 0;
            for (int a = g.dim - 1; a >= 0; --a) idx = idx * static_cast<std::size_t>(g.n) + static_cast<std::size_t>(d[a]);
            acc += sigma[static_cast<Eigen::Index>(idx)] * f[static_cast<Eigen::Index>(y)];
        }
        out[static_cast<Eigen::Index>(x)] = g.cell_volume() * acc;
    }
    return out;
}

/// Naive DFT with the library's weights: dV sum_x f(x) exp(-i k.x).
inline CVec naive_dft(const Grid& g, const CVec& f) {
    const std::size_t n = g.size();
    CVec out = CVec::Zero(static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < n; ++k) {
        const auto j = g.frequencies(k);
        for (std::size_t x = 0; x < n; ++x) {
            const auto c = g.coords(x);
            double phase = 0.0;
            for (int a = 0; a < g.dim; ++a) phase += 2.0 * kPi * j[a] * c[a] / g.n;
            out[static_cast<Eigen::Index>(k)] += f[static_cast<Eigen::Index>(x)] * std::polar(1.0, -phase);
        }
        out[static_cast<Eigen::Index>(k)] *= g.cell_volume();
    }
    return out;
}

inline double sup_norm(const Field& f) { return f.size() ? f.cwiseAbs().maxCoeff() : 0.0; }

} // namespace twistfield::testing

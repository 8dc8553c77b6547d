// Copyright 2026 The twistfield Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file grid.hpp
 * @brief Periodic cubic lattice in 1, 2 or 3 dimensions and its dual
 *        momentum grid.
 *
 * Sites are stored with the first axis fastest: i = x0 + n*x1 + n*n*x2.
 * The dual grid uses the same layout; slot j along an axis carries the
 * signed frequency j for j < ceil(n/2) and j - n otherwise, so the
 * frequencies cover {-floor(n/2), ..., ceil(n/2)-1}.
 */

#pragma once

#include "twistfield/core.hpp"

#include <array>
#include <cmath>
#include <string>

namespace twistfield {

using Shift = std::array<int, 3>;

struct Grid {
    int dim = 1;
    int n = 2;
    double dx = 1.0;

    Grid() = default;
    Grid(int dim_, int n_, double dx_) : dim(dim_), n(n_), dx(dx_) { validate(); }

    void validate() const {
        require(dim >= 1 && dim <= 3, ErrorKind::InvalidArgument, "grid dim must be 1, 2 or 3");
        require(n >= 2, ErrorKind::InvalidArgument, "grid needs at least 2 sites per axis");
        require(std::isfinite(dx) && dx > 0.0, ErrorKind::InvalidArgument, "grid spacing must be positive");
    }

    std::size_t size() const {
        std::size_t s = 1;
        for (int a = 0; a < dim; ++a) s *= static_cast<std::size_t>(n);
        return s;
    }

    double cell_volume() const { return std::pow(dx, dim); }
    double dual_spacing() const { return 2.0 * kPi / (n * dx); }
    double dual_cell_volume() const { return std::pow(dual_spacing(), dim); }

    std::array<int, 3> coords(std::size_t i) const {
        std::array<int, 3> c{0, 0, 0};
        for (int a = 0; a < dim; ++a) {
            c[a] = static_cast<int>(i % static_cast<std::size_t>(n));
            i /= static_cast<std::size_t>(n);
        }
        return c;
    }

    std::size_t index(const std::array<int, 3>& c) const {
        std::size_t i = 0;
        for (int a = dim - 1; a >= 0; --a) {
            int v = c[a] % n;
            if (v < 0) v += n;
            i = i * static_cast<std::size_t>(n) + static_cast<std::size_t>(v);
        }
        return i;
    }

    /// Site x + a (periodic).
    std::size_t shifted(std::size_t i, const Shift& a) const {
        auto c = coords(i);
        for (int d = 0; d < dim; ++d) c[d] += a[d];
        return index(c);
    }

    /// Site -x (periodic).
    std::size_t reflected(std::size_t i) const {
        auto c = coords(i);
        for (int d = 0; d < dim; ++d) c[d] = -c[d];
        return index(c);
    }

    int signed_frequency(int slot) const { return slot < (n + 1) / 2 ? slot : slot - n; }

    std::array<int, 3> frequencies(std::size_t k) const {
        auto c = coords(k);
        for (int a = 0; a < dim; ++a) c[a] = signed_frequency(c[a]);
        return c;
    }

    /// Index of the dual point with the given signed frequencies (wrapped).
    std::size_t frequency_index(const std::array<int, 3>& j) const { return index(j); }

    bool is_nyquist_slot(int slot) const { return n % 2 == 0 && slot == n / 2; }

    std::array<double, 3> wavevector(std::size_t k) const {
        const auto j = frequencies(k);
        std::array<double, 3> out{0.0, 0.0, 0.0};
        for (int a = 0; a < dim; ++a) out[a] = dual_spacing() * j[a];
        return out;
    }

    /// Wavevector used by spectral first derivatives; the Nyquist component
    /// is zeroed so that derivatives of real fields stay real.
    std::array<double, 3> derivative_wavevector(std::size_t k) const {
        const auto c = coords(k);
        auto out = wavevector(k);
        for (int a = 0; a < dim; ++a)
            if (is_nyquist_slot(c[a])) out[a] = 0.0;
        return out;
    }

    double k_squared(std::size_t k) const {
        const auto w = wavevector(k);
        return w[0] * w[0] + w[1] * w[1] + w[2] * w[2];
    }

    /// True when any axis of dual point k sits on the Nyquist slot.
    bool touches_nyquist(std::size_t k) const {
        const auto c = coords(k);
        for (int a = 0; a < dim; ++a)
            if (is_nyquist_slot(c[a])) return true;
        return false;
    }

    /// Minimum-image position of site i relative to the origin site.
    std::array<double, 3> position(std::size_t i) const {
        auto c = coords(i);
        std::array<double, 3> out{0.0, 0.0, 0.0};
        for (int a = 0; a < dim; ++a) {
            int v = c[a];
            if (2 * v > n) v -= n;
            out[a] = v * dx;
        }
        return out;
    }

    double distance_to_origin(std::size_t i) const {
        const auto p = position(i);
        return std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
    }

    std::string describe() const {
        return "dim=" + std::to_string(dim) + " n=" + std::to_string(n) + " dx=" + std::to_string(dx);
    }

    bool operator==(const Grid&) const = default;
};

inline void check_same_grid(const Grid& a, const Grid& b) {
    require(a == b, ErrorKind::GridMismatch, a.describe() + " vs " + b.describe());
}

template <typename Derived>
void check_field(const Grid& g, const Eigen::MatrixBase<Derived>& f, const char* what = "field") {
    require(static_cast<std::size_t>(f.size()) == g.size(), ErrorKind::GridMismatch,
            std::string(what) + " has " + std::to_string(f.size()) + " entries, grid has " + std::to_string(g.size()));
}

} // namespace twistfield

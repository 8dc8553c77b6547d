// Copyright 2026 The twistfield Authors
// SPDX-License-Identifier: Apache-2.0

// Apply H to an electron packet at k_e with the boson cutoff peaked at k*:
// the one-boson part carries the electron packet shifted by k*.

#include "twistfield/hamiltonian.hpp"

#include <cstdio>

namespace tf = twistfield;

int main() {
    const tf::MomentumGrid mg(tf::Grid(1, 32, 0.5), 1.0);
    const double width = 0.3 * mg.grid().dual_spacing();
    for (int k_star : {1, 3, 5}) {
        const auto r = tf::momentum_transfer_demo(mg, mg.index_of({k_star, 0, 0}), mg.index_of({8, 0, 0}), width, width);
        std::printf("k*=%d  overlap=%.6f  ratio=%.6f  varpi^2/(2 sqrt2 pi)=%.6f  varpi^2/(2 pi)=%.6f\n", k_star, r.overlap, r.ratio, r.derived_ratio,
                    r.bare_ratio);
    }

    // Hmu grows without bound as the flat cutoff widens.
    const tf::MomentumGrid cube(tf::Grid(3, 8, 0.5), 0.2);
    const auto scan = tf::uv_divergence_scan(cube, tf::geometric_radii(tf::kPi / 0.5, 8.0, 12));
    std::printf("I_2 ~ R: r2=%.4f   I_3 ~ ln R: r2=%.4f   I_4 last increment=%.2e\n", scan.linear2.r2, scan.log3.r2, scan.increment4);
}

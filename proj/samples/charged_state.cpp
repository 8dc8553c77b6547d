// Copyright 2026 The twistfield Authors
// SPDX-License-Identifier: Apache-2.0

// One electron dressed by a Yukawa twist: <W(t s)> along a ray, matrix value
// against the closed form, and the untwisted Gaussian for comparison.

#include "twistfield/twisted.hpp"

#include <cstdio>

namespace tf = twistfield;

int main() {
    const tf::Grid g(1, 16, 0.5);
    const tf::OneParticleSpace h(g, 1);

    tf::Field s0(static_cast<Eigen::Index>(g.size())), s1 = tf::Field::Zero(static_cast<Eigen::Index>(g.size()));
    for (std::size_t i = 0; i < g.size(); ++i) s0[static_cast<Eigen::Index>(i)] = std::exp(-0.1 * std::pow(double(i) - 8.0, 2));
    const tf::ScalarTestFunction s{s0, s1};

    tf::CVec w = tf::CVec::Zero(16);
    w.segment(6, 4).setConstant(1.0);
    w /= std::sqrt(g.cell_volume() * w.squaredNorm());

    const tf::TwistedSystem sys(tf::FermionFockSpace(h, 2), tf::BosonSector::from_test_functions(g, {s}, 8), tf::TwistKernel::yukawa(g, 1.0));
    const auto omega = tf::ChargedVector::electron(h, w);

    std::printf("%6s %22s %22s %12s %12s\n", "t", "Re <W(ts)>_q", "Im <W(ts)>_q", "|closed|", "<W(ts)>");
    for (double t = 0.0; t <= 1.0001; t += 0.25) {
        const auto v = sys.charged_state_eval(omega, t * s);
        std::printf("%6.2f %22.15f %22.15f %12.2e %12.6f\n", t, v.matrix.real(), v.matrix.imag(), v.difference(), sys.reference_value(t * s).real());
    }
}

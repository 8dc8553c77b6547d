// Copyright 2026 The twistfield Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file spectral.hpp
 * @brief Discrete Fourier transform on a Grid, backed by FFTW.
 *
 *   forward:  fhat(k) = dV * sum_x f(x) exp(-i k.x)
 *   inverse:  f(x)    = 1/(N dV) * sum_k fhat(k) exp(+i k.x)
 *
 * Plans are created once per (dim, n, direction) with FFTW_UNALIGNED and
 * executed through the new-array interface, which FFTW documents as
 * thread-safe. Plan creation itself is serialized.
 */

#pragma once

#include "twistfield/grid.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

namespace twistfield {

namespace detail {

class PlanCache {
public:
    static PlanCache& instance() {
        static PlanCache cache;
        return cache;
    }

    fftw_plan get(int dim, int n, int sign) {
        std::lock_guard<std::mutex> lock(mutex_);
        const auto key = std::make_tuple(dim, n, sign);
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;
        const std::size_t total = Grid(dim, n, 1.0).size();
        auto* in = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * total));
        auto* out = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * total));
        int dims[3] = {n, n, n};
        fftw_plan p = fftw_plan_dft(dim, dims, in, out, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
        fftw_free(in);
        fftw_free(out);
        require(p != nullptr, ErrorKind::InvalidArgument, "FFTW could not create a plan");
        plans_.emplace(key, p);
        return p;
    }

    PlanCache(const PlanCache&) = delete;
    PlanCache& operator=(const PlanCache&) = delete;

private:
    PlanCache() = default;
    ~PlanCache() {
        for (auto& [key, p] : plans_) fftw_destroy_plan(p);
    }

    std::mutex mutex_;
    std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

inline CVec raw_transform(const Grid& g, const CVec& in, int sign) {
    check_field(g, in, "transform input");
    fftw_plan p = PlanCache::instance().get(g.dim, g.n, sign);
    CVec src = in;
    CVec dst(in.size());
    fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(src.data()), reinterpret_cast<fftw_complex*>(dst.data()));
    return dst;
}

} // namespace detail

inline CVec fft_forward(const Grid& g, const CVec& f) {
    return detail::raw_transform(g, f, FFTW_FORWARD) * g.cell_volume();
}

inline CVec fft_forward(const Grid& g, const Field& f) { return fft_forward(g, CVec(f.cast<cplx>())); }

inline CVec fft_inverse(const Grid& g, const CVec& fhat) {
    const double scale = 1.0 / (static_cast<double>(g.size()) * g.cell_volume());
    return detail::raw_transform(g, fhat, FFTW_BACKWARD) * scale;
}

/// Multiplies the spectrum of a real field by a real even symbol and
/// returns the real part of the result.
template <typename Symbol>
Field apply_symbol(const Grid& g, const Field& f, Symbol&& symbol) {
    CVec fh = fft_forward(g, f);
    for (std::size_t k = 0; k < g.size(); ++k) fh[static_cast<Eigen::Index>(k)] *= symbol(k);
    return fft_inverse(g, fh).real();
}

} // namespace twistfield

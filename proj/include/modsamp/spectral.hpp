#pragma once

// Thin RAII layer over FFTW. Plans are created with FFTW_ESTIMATE for each
// call; the FFTW planner is not re-entrant, so plan creation and destruction
// are serialized behind one mutex while execution runs unlocked.

#include <complex>
#include <cstddef>
#include <limits>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <vector>

#include <fftw3.h>

#include "modsamp/errors.hpp"

namespace modsamp::spectral {

using Spectrum = std::vector<std::complex<double>>;

namespace detail {

inline std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct PlanDeleter {
    void operator()(fftw_plan_s* p) const {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(p);
    }
};
using Plan = std::unique_ptr<fftw_plan_s, PlanDeleter>;

inline fftw_complex* as_fftw(std::complex<double>* p) { return reinterpret_cast<fftw_complex*>(p); }

inline void require_size(std::size_t n) {
    if (n == 0) throw ParameterError("transform of an empty sequence");
    if (n > static_cast<std::size_t>(std::numeric_limits<int>::max()))
        throw CapacityError("transform length exceeds FFTW index range");
}

}  // namespace detail

/// Real-to-complex DFT; returns bins 0..n/2.
inline Spectrum real_forward(std::span<const double> x) {
    detail::require_size(x.size());
    const int n = static_cast<int>(x.size());
    std::vector<double> in(x.begin(), x.end());
    Spectrum out(x.size() / 2 + 1);
    detail::Plan plan;
    {
        std::lock_guard lock(detail::planner_mutex());
        plan.reset(fftw_plan_dft_r2c_1d(n, in.data(), detail::as_fftw(out.data()),
                                        FFTW_ESTIMATE | FFTW_UNALIGNED));
    }
    fftw_execute(plan.get());
    return out;
}

/// Inverse of real_forward for a length-n signal, including the 1/n factor.
inline std::vector<double> real_inverse(std::span<const std::complex<double>> bins, std::size_t n) {
    detail::require_size(n);
    if (bins.size() != n / 2 + 1) throw ParameterError("half-spectrum size does not match signal length");
    Spectrum in(bins.begin(), bins.end());  // c2r overwrites its input
    std::vector<double> out(n);
    detail::Plan plan;
    {
        std::lock_guard lock(detail::planner_mutex());
        plan.reset(fftw_plan_dft_c2r_1d(static_cast<int>(n), detail::as_fftw(in.data()), out.data(),
                                        FFTW_ESTIMATE | FFTW_UNALIGNED));
    }
    fftw_execute(plan.get());
    const double scale = 1.0 / static_cast<double>(n);
    for (double& v : out) v *= scale;
    return out;
}

/// Full complex DFT. `inverse` applies exp(+i...) and the 1/n factor.
inline Spectrum complex_transform(std::span<const std::complex<double>> x, bool inverse) {
    detail::require_size(x.size());
    Spectrum in(x.begin(), x.end());
    Spectrum out(x.size());
    detail::Plan plan;
    {
        std::lock_guard lock(detail::planner_mutex());
        plan.reset(fftw_plan_dft_1d(static_cast<int>(x.size()), detail::as_fftw(in.data()),
                                    detail::as_fftw(out.data()), inverse ? FFTW_BACKWARD : FFTW_FORWARD,
                                    FFTW_ESTIMATE | FFTW_UNALIGNED));
    }
    fftw_execute(plan.get());
    if (inverse) {
        const double scale = 1.0 / static_cast<double>(x.size());
        for (auto& v : out) v *= scale;
    }
    return out;
}

/// Angular frequency (rad/s) of real-DFT bin k for n samples spaced `period` apart.
inline double bin_frequency(std::size_t k, std::size_t n, double period) {
    return 2.0 * std::numbers::pi * static_cast<double>(k) / (static_cast<double>(n) * period);
}

/// Brick-wall low-pass on the periodic extension of `x`: bins with |w| > cutoff
/// are zeroed, the rest are untouched.
inline std::vector<double> brickwall(std::span<const double> x, double period, double cutoff) {
    if (!(period > 0.0)) throw ParameterError("sample period must be positive");
    if (!(cutoff > 0.0)) throw ParameterError("cutoff must be positive");
    if (cutoff > std::numbers::pi / period * (1.0 + 1e-12))
        throw ParameterError("cutoff exceeds the grid Nyquist frequency");
    Spectrum bins = real_forward(x);
    const double limit = cutoff * (1.0 + 1e-12);
    for (std::size_t k = 0; k < bins.size(); ++k)
        if (bin_frequency(k, x.size(), period) > limit) bins[k] = 0.0;
    return real_inverse(bins, x.size());
}

}  // namespace modsamp::spectral

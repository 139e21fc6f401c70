#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

namespace modsamp {

namespace detail {

// Si(x) for 0 <= x <= 4 from the alternating power series.
inline double sine_integral_series(double x) {
    const double x2 = x * x;
    double power = x;  // x^(2k+1) / (2k+1)!
    double sum = x;
    for (int k = 1; k < 60; ++k) {
        power *= -x2 / (static_cast<double>(2 * k) * static_cast<double>(2 * k + 1));
        const double term = power / static_cast<double>(2 * k + 1);
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    return sum;
}

// Si(x) - pi/2 for moderate x > 0 via the continued fraction of E1(ix)
// (modified Lentz evaluation).
inline double sine_integral_tail_cf(double x) {
    using cd = std::complex<double>;
    constexpr double eps = std::numeric_limits<double>::epsilon();
    const double big = std::numeric_limits<double>::max() * eps;
    cd b(1.0, x);
    cd c(big, 0.0);
    cd d = 1.0 / b;
    cd h = d;
    for (int i = 1; i < 500; ++i) {
        const double a = -static_cast<double>(i) * static_cast<double>(i);
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        const cd del = c * d;
        h *= del;
        if (std::abs(del.real() - 1.0) + std::abs(del.imag()) < eps) break;
    }
    h *= cd(std::cos(x), -std::sin(x));
    return h.imag();
}

// Si(x) - pi/2 for large x from the auxiliary-function asymptotic series
// Si = pi/2 - f cos x - g sin x.
inline double sine_integral_tail_asymptotic(double x) {
    const double inv2 = 1.0 / (x * x);
    double f = 1.0;
    double g = 1.0;
    double tf = 1.0;
    double tg = 1.0;
    for (int k = 1; k < 40; ++k) {
        const double nf = -tf * static_cast<double>((2 * k - 1) * (2 * k)) * inv2;
        const double ng = -tg * static_cast<double>((2 * k) * (2 * k + 1)) * inv2;
        if (std::abs(nf) > std::abs(tf)) break;  // past the smallest term
        tf = nf;
        tg = ng;
        f += tf;
        g += tg;
        if (std::abs(tf) < 1e-17 && std::abs(tg) < 1e-17) break;
    }
    f /= x;
    g *= inv2;
    return -(f * std::cos(x) + g * std::sin(x));
}

}  // namespace detail

/// Si(x) - sign(x)·pi/2, evaluated without cancellation for large |x|.
/// Decays like -cos(x)/x; equals 0 at x = 0.
inline double sine_integral_residual(double x) {
    if (x == 0.0) return 0.0;
    const double ax = std::abs(x);
    double r;
    if (ax <= 4.0) {
        r = detail::sine_integral_series(ax) - std::numbers::pi / 2;
    } else if (ax < 40.0) {
        r = detail::sine_integral_tail_cf(ax);
    } else {
        r = detail::sine_integral_tail_asymptotic(ax);
    }
    return x < 0 ? -r : r;
}

/// Sine integral Si(x) = integral of sin(t)/t over [0, x].
inline double sine_integral(double x) {
    if (x == 0.0) return 0.0;
    const double ax = std::abs(x);
    const double s = ax <= 4.0 ? detail::sine_integral_series(ax)
                               : std::numbers::pi / 2 + sine_integral_residual(ax);
    return x < 0 ? -s : s;
}

}  // namespace modsamp

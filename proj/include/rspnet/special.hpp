#pragma once

// normal quantile and chi-square CDF, enough for two-sided intervals and
// one-sided tail tests; no external special-function dependency

#include <cmath>
#include <cstdint>
#include <limits>

#include "rspnet/errors.hpp"

namespace rspnet {

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Acklam's rational approximation refined by one Newton step on the CDF;
// |error| < 1e-12 across (0, 1)
inline double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw ProbabilityOutOfRange("quantile argument must lie in (0, 1)");

    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double plow = 0.02425;

    double z;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        z = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - plow) {
        const double q = p - 0.5;
        const double r = q * q;
        z = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log1p(-p));
        z = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }

    // one Newton step: z -= (Phi(z) - p) / phi(z)
    const double e = normal_cdf(z) - p;
    const double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * z * z);
    return z - u / (1.0 + 0.5 * z * u);
}

// two-sided z multiplier for confidence level 1 - theta
inline double two_sided_z(double theta) {
    if (!(theta > 0.0 && theta < 1.0)) throw ProbabilityOutOfRange("theta must lie in (0, 1)");
    return normal_quantile(1.0 - theta / 2.0);
}

namespace detail {

// regularized lower incomplete gamma P(a, t): series for t < a + 1,
// Lentz continued fraction for Q(a, t) otherwise
inline double gamma_p(double a, double t) {
    if (t <= 0.0) return 0.0;
    const double log_pre = a * std::log(t) - t - std::lgamma(a);
    if (t < a + 1.0) {
        double term = 1.0 / a;
        double sum = term;
        double ap = a;
        for (int i = 0; i < 500; ++i) {
            ap += 1.0;
            term *= t / ap;
            sum += term;
            if (std::abs(term) < std::abs(sum) * 1e-16) break;
        }
        return std::exp(log_pre) * sum;
    }
    constexpr double tiny = 1e-300;
    double b = t + 1.0 - a;
    double cc = 1.0 / tiny;
    double dd = 1.0 / b;
    double h = dd;
    for (int i = 1; i < 500; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        dd = an * dd + b;
        if (std::abs(dd) < tiny) dd = tiny;
        cc = b + an / cc;
        if (std::abs(cc) < tiny) cc = tiny;
        dd = 1.0 / dd;
        const double delta = dd * cc;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return 1.0 - std::exp(log_pre) * h;
}

}  // namespace detail

inline double chi_square_cdf(double x, int dof) {
    if (dof < 1) throw ProbabilityOutOfRange("chi-square dof must be positive");
    if (x <= 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;
    const double p = detail::gamma_p(0.5 * dof, 0.5 * x);
    return p < 0.0 ? 0.0 : (p > 1.0 ? 1.0 : p);
}

inline double chi_square_sf(double x, int dof) { return 1.0 - chi_square_cdf(x, dof); }

}

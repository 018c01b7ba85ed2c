#pragma once

// Finite-n oracles for the product/sum asymptotics behind the gamma = 1
// covariance constants. With p_{m0-1}(x) := 1, p_n(x) := prod_{m=m0}^n (1 - x r_m)
// and F_{k+1,n}(x) := p_n(x)/p_k(x):
//   |p_n(x)| = O(n^{-c Re x}),
//   n       sum_{k=m0}^{n-1} r_k^2 ln^e(n/k) F_{k+1,n}(x) F_{k+1,n}(y) -> c^2 e! / (c(x+y)-1)^{e+1},
//   n/ln(n) sum_{k=m0}^{n-1} r_k^2           F_{k+1,n}(x) F_{k+1,n}(y) -> c^2 1{Im x + Im y = 0}
// (the first sum needs c(Re x + Re y) > 1, the second c(Re x + Re y) = 1).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rspnet/errors.hpp"
#include "rspnet/schedule.hpp"

namespace rspnet {

using cplx = std::complex<double>;

// smallest admissible start index (>= 2, max(Re x, Re y) r_m < 1), plus one;
// both schedules have nonincreasing r_m so checking m0 suffices
inline std::uint64_t default_m0(double re_max, const RateSchedule& sched) {
    if (!(re_max > 0)) throw BadStartIndex("Re(x) must be positive");
    for (std::uint64_t m = 2; m < (1ULL << 40); ++m)
        if (re_max * sched.rate(m) < 1.0) return m + 1;
    throw BadStartIndex("no admissible start index");
}

inline cplx product_p(std::uint64_t n, cplx x, const RateSchedule& sched, std::uint64_t m0) {
    if (!(x.real() > 0)) throw BadStartIndex("Re(x) must be positive");
    if (m0 < 2) throw BadStartIndex("start index must be >= 2");
    if (!(x.real() * sched.rate(m0) < 1.0))
        throw BadStartIndex("Re(x) r_m >= 1 at the start index");
    cplx p = 1.0;
    for (std::uint64_t m = m0; m <= n; ++m) {
        p *= 1.0 - x * sched.rate(m);
        if (std::norm(p) < 1e-300 * 1e-300)
            throw UnderflowRisk("product underflow at m = " + std::to_string(m) +
                                "; use decay_exponent's log-domain path");
    }
    return p;  // n < m0 gives the empty product 1
}

// least-squares slope of log|p_n(x)| against log n over a geometric grid;
// the decay theorem says slope -> -c Re(x)
inline double decay_exponent(cplx x, const RateSchedule& sched,
                             std::span<const std::uint64_t> n_grid) {
    if (n_grid.size() < 4) throw BadStartIndex("need at least 4 grid points");
    for (std::size_t i = 1; i < n_grid.size(); ++i)
        if (n_grid[i] <= n_grid[i - 1]) throw BadStartIndex("grid must be increasing");
    const std::uint64_t m0 = default_m0(x.real(), sched);
    if (n_grid.front() <= m0) throw BadStartIndex("grid starts before m0");

    double log_abs = 0.0;  // log |p_m| accumulated in the log domain
    std::vector<double> xs, ys;
    std::size_t next = 0;
    for (std::uint64_t m = m0; m <= n_grid.back(); ++m) {
        log_abs += 0.5 * std::log(std::norm(1.0 - x * sched.rate(m)));
        if (m == n_grid[next]) {
            xs.push_back(std::log(static_cast<double>(m)));
            ys.push_back(log_abs);
            ++next;
        }
    }
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= xs.size();
    my /= ys.size();
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    return sxy / sxx;
}

struct LimitSum {
    cplx finite_value;
    cplx closed_form;

    double absolute_error() const { return std::abs(finite_value - closed_form); }

    double relative_error() const {
        const double denom = std::max(std::abs(closed_form), 1e-12);
        return absolute_error() / denom;
    }
};

namespace detail {

// backward recursion: F_{k,n} = (1 - x r_k) F_{k+1,n}, one pass for both
// arguments, O(n) total
template <typename Weight>
cplx f_pair_sum(cplx x, cplx y, const RateSchedule& sched, std::uint64_t m0,
                std::uint64_t n, Weight&& weight) {
    cplx fx = 1.0 - x * sched.rate(n);
    cplx fy = 1.0 - y * sched.rate(n);
    cplx sum = 0.0;
    for (std::uint64_t k = n - 1; k >= m0; --k) {
        const double rk = sched.rate(k);
        sum += rk * rk * weight(k) * fx * fy;
        fx *= 1.0 - x * rk;
        fy *= 1.0 - y * rk;
    }
    return sum;
}

}  // namespace detail

// e = 0, 1, 2; requires c(Re x + Re y) > 1 and gamma = 1
inline LimitSum limit_sum(int e, cplx x, cplx y, const RateSchedule& sched, std::uint64_t n) {
    if (e < 0 || e > 2) throw RegimeViolation("log exponent must be 0, 1 or 2");
    if (sched.gamma() != 1.0) throw RegimeViolation("limit sums require gamma = 1");
    if (!(x.real() > 0) || !(y.real() > 0)) throw BadStartIndex("Re(x), Re(y) must be positive");
    const double c = sched.c();
    if (c * (x.real() + y.real()) <= 1.0 + 1e-12)
        throw RegimeViolation("c(Re x + Re y) must exceed 1; use limit_sum_log on the boundary");
    const std::uint64_t m0 = default_m0(std::max(x.real(), y.real()), sched);
    if (n < m0 + 2) throw BadStartIndex("horizon too small for the start index");

    const double nd = static_cast<double>(n);
    cplx s;
    if (e == 0)
        s = detail::f_pair_sum(x, y, sched, m0, n, [](std::uint64_t) { return 1.0; });
    else if (e == 1)
        s = detail::f_pair_sum(x, y, sched, m0, n,
                               [nd](std::uint64_t k) { return std::log(nd / k); });
    else
        s = detail::f_pair_sum(x, y, sched, m0, n, [nd](std::uint64_t k) {
            const double l = std::log(nd / k);
            return l * l;
        });

    const cplx d = c * (x + y) - 1.0;
    const double fact = e == 2 ? 2.0 : 1.0;
    return LimitSum{nd * s, fact * c * c / std::pow(d, e + 1)};
}

// boundary case c(Re x + Re y) = 1, normalized by n/ln(n)
inline LimitSum limit_sum_log(cplx x, cplx y, const RateSchedule& sched, std::uint64_t n,
                              double eq_tol = 1e-9) {
    if (sched.gamma() != 1.0) throw RegimeViolation("limit sums require gamma = 1");
    if (!(x.real() > 0) || !(y.real() > 0)) throw BadStartIndex("Re(x), Re(y) must be positive");
    const double c = sched.c();
    if (std::abs(c * (x.real() + y.real()) - 1.0) > eq_tol)
        throw RegimeViolation("log normalization requires c(Re x + Re y) = 1");
    const std::uint64_t m0 = default_m0(std::max(x.real(), y.real()), sched);
    if (n < m0 + 2) throw BadStartIndex("horizon too small for the start index");

    const double nd = static_cast<double>(n);
    const cplx s = detail::f_pair_sum(x, y, sched, m0, n, [](std::uint64_t) { return 1.0; });
    const double limit = std::abs(x.imag() + y.imag()) <= 1e-12 ? c * c : 0.0;
    return LimitSum{nd / std::log(nd) * s, cplx(limit, 0.0)};
}

}

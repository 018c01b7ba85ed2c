#pragma once

// Reinforcement rate schedules r_n with n^gamma r_n -> c.

#include <cmath>
#include <cstdint>
#include <string>

#include "rspnet/errors.hpp"

namespace rspnet {

class RateSchedule {
public:
    enum class Kind { Polya, Power };

    // r_n = (a+b+n+1)^{-1}; the classical urn with initial composition (a,b).
    // Satisfies n r_n = c + O(1/n) with gamma = c = 1.
    static RateSchedule polya(double a, double b) {
        if (!(a > 0) || !(b > 0) || !std::isfinite(a) || !std::isfinite(b))
            throw ConfigSemanticError("polya schedule needs a > 0 and b > 0");
        RateSchedule s;
        s.kind_ = Kind::Polya;
        s.a_ = a;
        s.b_ = b;
        s.c_ = 1.0;
        s.gamma_ = 1.0;
        return s;
    }

    // r_n = min(c n^{-gamma}, 1-1e-12), r_0 = min(c, 1-1e-12)
    static RateSchedule power(double c, double gamma) {
        if (!(c > 0) || !std::isfinite(c))
            throw ConfigSemanticError("power schedule needs c > 0");
        if (!(gamma > 0.5) || gamma > 1.0 || !std::isfinite(gamma))
            throw GammaOutOfRange("power schedule needs gamma in (1/2, 1], got " +
                                  std::to_string(gamma));
        RateSchedule s;
        s.kind_ = Kind::Power;
        s.c_ = c;
        s.gamma_ = gamma;
        return s;
    }

    double rate(std::uint64_t n) const {
        if (kind_ == Kind::Polya) return 1.0 / (a_ + b_ + static_cast<double>(n) + 1.0);
        if (n == 0) return std::min(c_, 1.0 - 1e-12);
        return std::min(c_ * std::pow(static_cast<double>(n), -gamma_), 1.0 - 1e-12);
    }

    Kind kind() const { return kind_; }
    double c() const { return c_; }
    double gamma() const { return gamma_; }
    double polya_a() const { return a_; }
    double polya_b() const { return b_; }

    // whether n r_n - c = O(1/n) holds (vs only n^gamma r_n -> c); the gamma=1
    // covariance formulas assume the stronger form
    bool strict_rate_condition() const { return gamma_ == 1.0; }

private:
    RateSchedule() = default;
    Kind kind_ = Kind::Polya;
    double a_ = 0, b_ = 0;
    double c_ = 1, gamma_ = 1;
};

}

#pragma once

// confidence intervals for Z_inf from observables and chi-square tests on the
// mean-field interaction parameter; every variance is the closed form from
// asymptotics with the random factor replaced by its plug-in estimate

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "rspnet/asymptotics.hpp"
#include "rspnet/errors.hpp"
#include "rspnet/graph.hpp"
#include "rspnet/special.hpp"

namespace rspnet {

enum class CiBasis { ZTilde, NTilde, AWeighted };

inline const char* ci_basis_name(CiBasis b) {
    switch (b) {
        case CiBasis::ZTilde: return "ztilde";
        case CiBasis::NTilde: return "ntilde";
        default: return "aweighted";
    }
}

struct ConfidenceInterval {
    double center = 0;
    double half_width = 0;
    double lo = 0;
    double hi = 0;
    double level = 0;
    CiBasis basis = CiBasis::ZTilde;
    RegimeKind regime = RegimeKind::Unsupported;
    bool clipped = false;
    bool degenerate = false;
};

namespace detail {

inline ConfidenceInterval finish_interval(double center, double spread, double plug, double level,
                                          CiBasis basis, RegimeKind kind) {
    ConfidenceInterval ci;
    ci.center = center;
    ci.level = level;
    ci.basis = basis;
    ci.regime = kind;
    ci.degenerate = plug <= 0.0;
    ci.half_width = ci.degenerate ? 0.0 : spread * std::sqrt(plug);
    ci.lo = center - ci.half_width;
    ci.hi = center + ci.half_width;
    if (ci.lo < 0.0 || ci.hi > 1.0) {
        ci.clipped = true;
        ci.lo = std::max(ci.lo, 0.0);
        ci.hi = std::min(ci.hi, 1.0);
    }
    return ci;
}

inline double plug_in(double p) {
    if (p < -1e-9 || p > 1.0 + 1e-9)
        throw ProbabilityOutOfRange("plug-in estimate " + std::to_string(p) +
                                    " outside the unit interval");
    const double q = std::min(std::max(p, 0.0), 1.0);
    return q * (1.0 - q);
}

}  // namespace detail

// valid for every 1/2 < gamma <= 1; the Perron projection satisfies its CLT
// at rate n^(gamma - 1/2) with variance sigma_tilde^2 regardless of lambda*
inline ConfidenceInterval ci_from_ztilde(double z_tilde, std::uint64_t n, double gamma, double c,
                                         const EigenStructure& es, double theta) {
    const double rate = std::pow(static_cast<double>(n), gamma - 0.5);
    const double spread = two_sided_z(theta) / rate * std::sqrt(sigma_tilde_sq(gamma, c, es));
    return detail::finish_interval(z_tilde, spread, detail::plug_in(z_tilde), 1.0 - theta,
                                   CiBasis::ZTilde, classify_regime(gamma, c, es).kind);
}

// interval from the empirical means; regime picks the variance formula, the
// critical case switches to the a-weighted average (default a = e_1)
inline ConfidenceInterval ci_from_ntilde(const Eigen::VectorXd& nbar, std::uint64_t n,
                                         const Regime& regime, const EigenStructure& es,
                                         double theta, const Eigen::VectorXd* a = nullptr) {
    if (nbar.size() != es.n()) throw BadWeightVector("state dimension mismatch");
    const double z = two_sided_z(theta);
    const double ntilde = es.v1_real().dot(nbar) / std::sqrt(double(es.n()));

    switch (regime.kind) {
        case RegimeKind::GammaLessOne: {
            const double var = sigma_tilde_sq(regime.gamma, regime.c, es) +
                               sigma_hat_sq(regime.gamma, regime.c, es);
            const double rate = std::pow(static_cast<double>(n), regime.gamma - 0.5);
            return detail::finish_interval(ntilde, z / rate * std::sqrt(var),
                                           detail::plug_in(ntilde), 1.0 - theta, CiBasis::NTilde,
                                           regime.kind);
        }
        case RegimeKind::GammaOneScalar: {
            const double c = regime.c;
            const double var = c * c + (c - 1.0) * (c - 1.0);
            return detail::finish_interval(ntilde, z / std::sqrt(double(n)) * std::sqrt(var),
                                           detail::plug_in(ntilde), 1.0 - theta, CiBasis::NTilde,
                                           regime.kind);
        }
        case RegimeKind::GammaOneFast: {
            const double c = regime.c;
            if (a == nullptr) {
                const double var =
                    (c * c + (c - 1.0) * (c - 1.0)) * es.v1_norm_sq() / double(es.n());
                return detail::finish_interval(ntilde, z / std::sqrt(double(n)) * std::sqrt(var),
                                               detail::plug_in(ntilde), 1.0 - theta,
                                               CiBasis::NTilde, regime.kind);
            }
            if (std::abs(a->sum() - 1.0) > 1e-10)
                throw WeightVectorNotNormalized("weight vector must sum to 1");
            const Eigen::Index nn = es.n();
            const double st = sigma_tilde_sq(1.0, c, es);
            const Eigen::MatrixXd sigma_nn =
                st * Eigen::MatrixXd::Ones(nn, nn) + hat_covariance(c, es).nn;
            const double center = a->dot(nbar);
            const double var = a->dot(sigma_nn * (*a));
            return detail::finish_interval(center, z / std::sqrt(double(n)) * std::sqrt(var),
                                           detail::plug_in(center), 1.0 - theta,
                                           CiBasis::AWeighted, regime.kind);
        }
        case RegimeKind::GammaOneCritical: {
            Eigen::VectorXd def;
            if (a == nullptr) {
                def = Eigen::VectorXd::Zero(es.n());
                def(0) = 1.0;
                a = &def;
            }
            if (std::abs(a->sum() - 1.0) > 1e-10)
                throw WeightVectorNotNormalized("weight vector must sum to 1");
            if ((es.U_minor().transpose() * a->cast<std::complex<double>>()).norm() <= 1e-10)
                throw BadWeightVector(
                    "weight vector is orthogonal to the minor eigen-directions");
            if (n < 2) throw BadStartIndex("critical interval needs n >= 2");
            const Eigen::MatrixXd sigma_nn = hat_star_covariance(regime.c, es).nn;
            const double center = a->dot(nbar);
            const double var = a->dot(sigma_nn * (*a));
            const double rate = std::sqrt(std::log(double(n)) / double(n));
            return detail::finish_interval(center, z * rate * std::sqrt(var),
                                           detail::plug_in(center), 1.0 - theta,
                                           CiBasis::AWeighted, regime.kind);
        }
        default:
            throw WrongRegime("no interval construction for regime " +
                              std::string(regime_name(regime.kind)));
    }
}

struct TestReport {
    double statistic = 0;
    int dof = 0;
    double p_value = 1;
    double alpha0 = 0;
    double theta = 0;
    bool reject = false;
    RegimeKind regime = RegimeKind::Unsupported;
    std::optional<double> noncentral_factor;
};

// H0: W = W_alpha0 against the mean-field family, built on the quadratic form
// Nbar^T (I - 11^T/N) Nbar; fast and critical nulls use different scalings
inline TestReport mean_field_test(const Eigen::VectorXd& nbar, std::uint64_t n, double alpha0,
                                  double c, double theta, double eq_tol = 1e-9) {
    const Eigen::Index nv = nbar.size();
    if (nv < 2) throw WrongRegime("the test needs at least two vertices");
    if (!(alpha0 > 0.0 && alpha0 <= 1.0)) throw WrongRegime("alpha0 must lie in (0, 1]");
    if (!(theta > 0.0 && theta < 1.0)) throw ProbabilityOutOfRange("theta must lie in (0, 1)");

    const double ntilde = nbar.mean();
    const double plug = ntilde * (1.0 - ntilde);
    if (plug <= 0.0) throw DegenerateState("all observed actions identical");
    const double q = (nbar.array() - ntilde).matrix().squaredNorm();

    TestReport rep;
    rep.dof = int(nv) - 1;
    rep.alpha0 = alpha0;
    rep.theta = theta;

    const double gap = 2.0 * c * alpha0 - 1.0;
    if (gap > eq_tol) {
        rep.regime = RegimeKind::GammaOneFast;
        rep.statistic = double(n) / plug * gap / (1.0 + 2.0 * (c - 1.0) / alpha0) * q;
    } else if (gap >= -eq_tol) {
        if (alpha0 >= 1.0 - 1e-12)
            throw DegenerateState("critical null with alpha0 = 1 has no scaling factor");
        rep.regime = RegimeKind::GammaOneCritical;
        const double f = alpha0 / (1.0 - alpha0);
        rep.statistic = double(n) / std::log(double(n)) / plug * f * f * q;
    } else {
        throw WrongRegime("2 c alpha0 < 1: no chi-square statistic in this regime");
    }

    rep.p_value = chi_square_sf(rep.statistic, rep.dof);
    rep.reject = rep.p_value < theta;
    return rep;
}

// scale of the chi-square law under W_alpha when both null and truth are in
// the fast regime
inline double mean_field_power_scale(double c, double alpha0, double alpha_true,
                                     double eq_tol = 1e-9) {
    if (!(2.0 * c * alpha0 - 1.0 > eq_tol) || !(2.0 * c * alpha_true - 1.0 > eq_tol))
        throw WrongRegime("power scale defined only when both alphas are in the fast regime");
    return (2.0 * c * alpha0 - 1.0) / (2.0 * c * alpha_true - 1.0) *
           (1.0 + 2.0 * (c - 1.0) / alpha_true) / (1.0 + 2.0 * (c - 1.0) / alpha0);
}

struct ProjectionStatistic {
    Eigen::VectorXd value;
    Eigen::MatrixXd covariance;  // multiply by the plug-in Z(1-Z) estimate
};

// rate-scaled UV^T Nbar with its theoretical covariance, the Wald-type
// ingredient for general W
inline ProjectionStatistic projection_statistic(const Eigen::VectorXd& nbar, std::uint64_t n,
                                                const EigenStructure& es, const Regime& regime) {
    if (es.n() < 2) throw WrongRegime("projection statistic needs at least two vertices");
    if (nbar.size() != es.n()) throw BadWeightVector("state dimension mismatch");

    const Eigen::MatrixXcd uv = es.U_minor() * es.V_minor().transpose();
    const Eigen::VectorXcd raw = uv * nbar.cast<std::complex<double>>();
    if (raw.imag().cwiseAbs().maxCoeff() > 1e-10)
        throw ComplexResidue("projection has imaginary residue");

    ProjectionStatistic out;
    if (regime.kind == RegimeKind::GammaOneFast) {
        out.value = std::sqrt(double(n)) * raw.real();
        const HatMatrices s = shat_matrices(regime.c, es);
        const Eigen::Index m = es.n() - 1;
        const Eigen::MatrixXcd u = es.U_minor();
        out.covariance = detail::symmetrize(
            detail::realify(u * s.s_nn.bottomRightCorner(m, m) * u.transpose()));
    } else if (regime.kind == RegimeKind::GammaOneCritical) {
        if (n < 2) throw BadStartIndex("critical statistic needs n >= 2");
        out.value = std::sqrt(double(n) / std::log(double(n))) * raw.real();
        out.covariance = hat_star_covariance(regime.c, es).nn;
    } else {
        throw WrongRegime("projection statistic defined for the gamma = 1 network regimes only");
    }
    return out;
}

}

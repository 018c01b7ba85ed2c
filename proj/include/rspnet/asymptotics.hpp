#pragma once

// closed-form asymptotic covariances for the joint CLT of (Z_n, N_n), one
// assembly per regime; all matrices are the scale-free part (the random
// Z_inf(1-Z_inf) factor multiplies everything and is supplied by callers)

#include <cmath>
#include <complex>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "rspnet/errors.hpp"
#include "rspnet/graph.hpp"

namespace rspnet {

inline double sigma_tilde_sq(double gamma, double c, const EigenStructure& es) {
    if (!(gamma > 0.5 && gamma <= 1.0)) throw GammaOutOfRange("gamma must lie in (1/2, 1]");
    return c * c * es.v1_norm_sq() / (es.n() * (2.0 * gamma - 1.0));
}

inline double sigma_hat_sq(double gamma, double c, const EigenStructure& es) {
    if (!(gamma > 0.5 && gamma <= 1.0)) throw GammaOutOfRange("gamma must lie in (1/2, 1]");
    return c * c * es.v1_norm_sq() / (es.n() * (3.0 - 2.0 * gamma));
}

namespace detail {

inline Eigen::MatrixXd realify(const Eigen::MatrixXcd& m, double imag_tol = 1e-9) {
    const double residue = m.imag().cwiseAbs().maxCoeff();
    if (residue > imag_tol)
        throw ComplexResidue("covariance block has imaginary residue " + std::to_string(residue));
    return m.real();
}

inline Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m) {
    return 0.5 * (m + m.transpose());
}

// bilinear pair products v_h^T v_j over the minor spectrum, no conjugation
inline Eigen::MatrixXcd minor_gram(const EigenStructure& es) {
    const Eigen::MatrixXcd vm = es.V_minor();
    return vm.transpose() * vm;
}

inline std::complex<double> biprod(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
    return (a.array() * b.array()).sum();
}

}  // namespace detail

// eigen-coordinate kernels for gamma = 1, Re(lambda*) < 1 - 1/(2c):
// s_zz, s_zn rows/cols run over the minor spectrum, s_nn carries the extra
// leading index for the Perron direction
struct HatMatrices {
    Eigen::MatrixXcd s_zz;  // (N-1) x (N-1)
    Eigen::MatrixXcd s_nn;  // N x N
    Eigen::MatrixXcd s_zn;  // (N-1) x N
};

inline HatMatrices shat_matrices(double c, const EigenStructure& es) {
    const Eigen::Index n = es.n();
    if (n < 2) throw WrongRegime("hat covariances need at least two vertices");
    const Eigen::MatrixXcd gram = detail::minor_gram(es);
    const Eigen::MatrixXcd vm = es.V_minor();
    const Eigen::VectorXcd v1 = es.V.col(0);

    HatMatrices out;
    out.s_zz.resize(n - 1, n - 1);
    out.s_nn.resize(n, n);
    out.s_zn.resize(n - 1, n);
    out.s_nn(0, 0) = (c - 1.0) * (c - 1.0) * es.v1_norm_sq();

    for (Eigen::Index h = 0; h < n - 1; ++h) {
        const std::complex<double> lh = es.lambda(h + 1);
        const std::complex<double> v1vh = detail::biprod(v1, vm.col(h));
        out.s_nn(0, h + 1) = (1.0 - c) / (1.0 - lh) * v1vh;
        out.s_nn(h + 1, 0) = out.s_nn(0, h + 1);
        out.s_zn(h, 0) = (1.0 - c) / (1.0 - lh) * v1vh;
        for (Eigen::Index j = 0; j < n - 1; ++j) {
            const std::complex<double> lj = es.lambda(j + 1);
            const std::complex<double> d = c * (2.0 - lh - lj) - 1.0;
            if (!(d.real() > 0.0))
                throw WrongRegime("c(2 - lambda_h - lambda_j) - 1 not positive; not in the fast regime");
            out.s_zz(h, j) = c * c / d * gram(h, j);
            out.s_nn(h + 1, j + 1) =
                (1.0 + (c - 1.0) * (1.0 / (1.0 - lh) + 1.0 / (1.0 - lj))) / d * gram(h, j);
            out.s_zn(h, j + 1) = (c + (c - 1.0) / (1.0 - lh)) / d * gram(h, j);
        }
    }
    return out;
}

// boundary kernels for Re(lambda*) = 1 - 1/(2c); entries survive only where
// c(2 - lambda_h - lambda_j) = 1 within eq_tol
struct HatStarMatrices {
    Eigen::MatrixXcd s_zz, s_nn, s_zn;  // all (N-1) x (N-1)
};

inline HatStarMatrices shat_star_matrices(double c, const EigenStructure& es,
                                          double eq_tol = 1e-9) {
    const Eigen::Index n = es.n();
    if (n < 2) throw WrongRegime("hat covariances need at least two vertices");
    const Eigen::MatrixXcd gram = detail::minor_gram(es);

    HatStarMatrices out;
    out.s_zz = Eigen::MatrixXcd::Zero(n - 1, n - 1);
    out.s_nn = Eigen::MatrixXcd::Zero(n - 1, n - 1);
    out.s_zn = Eigen::MatrixXcd::Zero(n - 1, n - 1);

    for (Eigen::Index h = 0; h < n - 1; ++h) {
        const std::complex<double> lh = es.lambda(h + 1);
        for (Eigen::Index j = 0; j < n - 1; ++j) {
            const std::complex<double> lj = es.lambda(j + 1);
            if (std::abs(c * (2.0 - lh - lj) - 1.0) > eq_tol) continue;
            out.s_zz(h, j) = c * c * gram(h, j);
            out.s_nn(h, j) = lh * lj / ((1.0 - lh) * (1.0 - lj)) * gram(h, j);
            out.s_zn(h, j) = c * lj / (1.0 - lh) * gram(h, j);
        }
    }
    return out;
}

// vertex-coordinate covariance blocks of the joint limit; full() lays them
// out as [[zz, zn], [zn^T, nn]]
struct CovarianceBlocks {
    Eigen::MatrixXd zz, zn, nn;

    Eigen::MatrixXd full() const {
        const Eigen::Index n = zz.rows();
        Eigen::MatrixXd f(2 * n, 2 * n);
        f.topLeftCorner(n, n) = zz;
        f.topRightCorner(n, n) = zn;
        f.bottomLeftCorner(n, n) = zn.transpose();
        f.bottomRightCorner(n, n) = nn;
        return f;
    }
};

namespace detail {

inline void check_psd(const CovarianceBlocks& blocks) {
    const Eigen::MatrixXd f = blocks.full();
    const double sym = (f - f.transpose()).cwiseAbs().maxCoeff();
    if (sym > 1e-10)
        throw ResidualTooLarge("covariance asymmetry " + std::to_string(sym));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(f, Eigen::EigenvaluesOnly);
    const double lo = solver.eigenvalues().minCoeff();
    if (lo < -1e-8)
        throw ResidualTooLarge("covariance eigenvalue " + std::to_string(lo) + " below zero");
}

}  // namespace detail

// covariance of sqrt(n) (Z_n - ztilde 1, N_n - ztilde 1) in the fast regime;
// the Perron direction is projected out so no Sigma-tilde term appears
inline CovarianceBlocks hat_covariance(double c, const EigenStructure& es) {
    const HatMatrices s = shat_matrices(c, es);
    const Eigen::MatrixXcd u = es.U_minor();
    const Eigen::MatrixXcd ufull = es.U;
    CovarianceBlocks out;
    out.zz = detail::symmetrize(detail::realify(u * s.s_zz * u.transpose()));
    out.nn = detail::symmetrize(detail::realify(ufull * s.s_nn * ufull.transpose()));
    out.zn = detail::realify(u * s.s_zn * ufull.transpose());
    detail::check_psd(out);
    return out;
}

inline CovarianceBlocks hat_star_covariance(double c, const EigenStructure& es,
                                            double eq_tol = 1e-9) {
    const HatStarMatrices s = shat_star_matrices(c, es, eq_tol);
    const Eigen::MatrixXcd u = es.U_minor();
    CovarianceBlocks out;
    out.zz = detail::symmetrize(detail::realify(u * s.s_zz * u.transpose()));
    out.nn = detail::symmetrize(detail::realify(u * s.s_nn * u.transpose()));
    out.zn = detail::realify(u * s.s_zn * u.transpose());
    detail::check_psd(out);
    return out;
}

// theorem-level blocks for the centered pair (Z_n - Zinf 1, N_n - Zinf 1)
// at the regime's own rate
inline CovarianceBlocks asymptotic_covariance(const Regime& regime, const EigenStructure& es,
                                              double eq_tol = 1e-9) {
    const Eigen::Index n = es.n();
    const Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(n, n);
    CovarianceBlocks out;

    switch (regime.kind) {
        case RegimeKind::GammaLessOne: {
            const double st = sigma_tilde_sq(regime.gamma, regime.c, es);
            const double sh = sigma_hat_sq(regime.gamma, regime.c, es);
            out.zz = st * ones;
            out.zn = st * ones;
            out.nn = (st + sh) * ones;
            break;
        }
        case RegimeKind::GammaOneScalar: {
            const double c = regime.c;
            out.zz = Eigen::MatrixXd::Constant(1, 1, c * c);
            out.zn = out.zz;
            out.nn = Eigen::MatrixXd::Constant(1, 1, c * c + (c - 1.0) * (c - 1.0));
            break;
        }
        case RegimeKind::GammaOneFast: {
            const double st = sigma_tilde_sq(1.0, regime.c, es);
            const CovarianceBlocks hat = hat_covariance(regime.c, es);
            out.zz = st * ones + hat.zz;
            out.zn = st * ones + hat.zn;
            out.nn = st * ones + hat.nn;
            break;
        }
        case RegimeKind::GammaOneCritical:
            // the sqrt(n/ln n) rate kills the Perron term, only the boundary
            // eigen-directions survive
            out = hat_star_covariance(regime.c, es, eq_tol);
            break;
        default:
            throw WrongRegime("no covariance theorem for regime " +
                              std::string(regime_name(regime.kind)));
    }
    detail::check_psd(out);
    return out;
}

}

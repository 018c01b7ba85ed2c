#pragma once

// Weighted directed interaction networks and their spectral decomposition.
//
// W is column-stochastic and irreducible. We work with the left eigenvectors
// u_j of W (columns of U, W^T u_j = lambda_j u_j, unit norm) and the dual
// basis V := (U^T)^{-1}, whose columns are right eigenvectors of W and are
// biorthogonal to the u_j in the bilinear sense u_h^T v_j = delta_hj (no
// conjugation). u_1 = N^{-1/2} 1 exactly; v_1 is the Perron vector with
// N^{-1/2} 1^T v_1 = 1 and positive entries.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "rspnet/errors.hpp"

namespace rspnet {

class WeightedNetwork {
public:
    // validates entry signs, column sums and strong connectivity of the support
    static WeightedNetwork validate(const Eigen::MatrixXd& w,
                                    double col_tol = 1e-12) {
        if (w.rows() != w.cols() || w.rows() < 1)
            throw NotColumnStochastic("weight matrix must be square and nonempty");
        const int n = static_cast<int>(w.rows());
        for (int j = 0; j < n; ++j) {
            double sum = 0;
            for (int i = 0; i < n; ++i) {
                const double e = w(i, j);
                if (!std::isfinite(e))
                    throw NotColumnStochastic("non-finite entry at (" + std::to_string(i) +
                                              "," + std::to_string(j) + ")");
                if (e < 0)
                    throw NegativeWeight("negative weight at (" + std::to_string(i) + "," +
                                         std::to_string(j) + "): " + std::to_string(e));
                sum += e;
            }
            if (std::abs(sum - 1.0) > col_tol)
                throw NotColumnStochastic("column " + std::to_string(j) + " sums to " +
                                          std::to_string(sum));
        }
        if (!strongly_connected(w))
            throw NotIrreducible("support digraph is not strongly connected");
        return WeightedNetwork(w);
    }

    int size() const { return static_cast<int>(w_.rows()); }
    const Eigen::MatrixXd& weights() const { return w_; }

    bool doubly_stochastic(double tol = 1e-12) const {
        for (int i = 0; i < size(); ++i)
            if (std::abs(w_.row(i).sum() - 1.0) > tol) return false;
        return true;
    }

private:
    explicit WeightedNetwork(Eigen::MatrixXd w) : w_(std::move(w)) {}

    // edge h -> j iff w(h,j) > 0; BFS both ways from vertex 0
    static bool strongly_connected(const Eigen::MatrixXd& w) {
        const int n = static_cast<int>(w.rows());
        auto reach = [&](bool forward) {
            std::vector<char> seen(n, 0);
            std::vector<int> stack{0};
            seen[0] = 1;
            int count = 1;
            while (!stack.empty()) {
                const int v = stack.back();
                stack.pop_back();
                for (int t = 0; t < n; ++t) {
                    const double e = forward ? w(v, t) : w(t, v);
                    if (e > 0 && !seen[t]) {
                        seen[t] = 1;
                        ++count;
                        stack.push_back(t);
                    }
                }
            }
            return count == n;
        };
        return reach(true) && reach(false);
    }

    Eigen::MatrixXd w_;
};

// W = (alpha/N) 11^T + (1-alpha) I, doubly stochastic, eigenvalues {1, 1-alpha}
inline WeightedNetwork mean_field_network(int n, double alpha) {
    if (n < 2) throw NotIrreducible("mean-field network needs N >= 2");
    if (!(alpha > 0.0) || alpha > 1.0 || !std::isfinite(alpha))
        throw NotColumnStochastic("mean-field alpha must be in (0,1], got " +
                                  std::to_string(alpha));
    Eigen::MatrixXd w = Eigen::MatrixXd::Constant(n, n, alpha / n);
    w.diagonal().array() += 1.0 - alpha;
    return WeightedNetwork::validate(w);
}

struct EigenStructure {
    Eigen::VectorXcd lambda;             // lambda(0) == 1
    Eigen::MatrixXcd U;                  // columns u_j, unit conjugate norm
    Eigen::MatrixXcd V;                  // (U^T)^{-1}
    std::optional<std::complex<double>> lambda_star;  // max-Re among lambda(1..); absent iff N == 1
    double residual_tol = 0;

    int n() const { return static_cast<int>(lambda.size()); }

    Eigen::VectorXd v1_real() const { return V.col(0).real(); }
    double v1_norm_sq() const { return V.col(0).squaredNorm(); }

    // minor blocks: columns 2..N of U and V
    Eigen::MatrixXcd U_minor() const { return U.rightCols(n() - 1); }
    Eigen::MatrixXcd V_minor() const { return V.rightCols(n() - 1); }
};

namespace detail {

// deterministic order: Re desc, then |Im| asc, then Im desc
inline bool eig_before(const std::complex<double>& a, const std::complex<double>& b) {
    if (a.real() != b.real()) return a.real() > b.real();
    const double ia = std::abs(a.imag()), ib = std::abs(b.imag());
    if (ia != ib) return ia < ib;
    return a.imag() > b.imag();
}

// rotate so the largest-modulus entry is real positive; keeps output
// canonical regardless of the solver's phase choice
inline void fix_phase(Eigen::VectorXcd& u) {
    int arg = 0;
    double best = -1;
    for (int i = 0; i < u.size(); ++i) {
        const double m = std::norm(u(i));
        if (m > best + 1e-18) {
            best = m;
            arg = i;
        }
    }
    const std::complex<double> pivot = u(arg);
    if (std::abs(pivot) > 0) u *= std::conj(pivot) / std::abs(pivot);
}

}  // namespace detail

// Full spectral decomposition of an irreducible column-stochastic W.
// Throws NotDiagonalizable when the eigenbasis is defective or too ill
// conditioned, ResidualTooLarge when any post-hoc identity check fails.
inline EigenStructure eigenstructure(const WeightedNetwork& net,
                                     double residual_tol = 1e-8) {
    const int n = net.size();
    const Eigen::MatrixXd& w = net.weights();
    EigenStructure es;
    es.residual_tol = residual_tol;

    if (n == 1) {
        es.lambda = Eigen::VectorXcd::Ones(1);
        es.U = Eigen::MatrixXcd::Ones(1, 1);
        es.V = Eigen::MatrixXcd::Ones(1, 1);
        return es;
    }

    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(w.transpose().cast<std::complex<double>>());
    if (solver.info() != Eigen::Success)
        throw NotDiagonalizable("eigen decomposition did not converge");

    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return detail::eig_before(solver.eigenvalues()(a), solver.eigenvalues()(b));
    });

    Eigen::VectorXcd lam(n);
    Eigen::MatrixXcd U(n, n);
    for (int i = 0; i < n; ++i) {
        lam(i) = solver.eigenvalues()(order[i]);
        U.col(i) = solver.eigenvectors().col(order[i]);
    }

    // Perron root must be simple and equal to 1 up to roundoff; snap it
    if (std::abs(lam(0) - 1.0) > 1e-8)
        throw ResidualTooLarge("leading eigenvalue " + std::to_string(lam(0).real()) +
                               " is not 1");
    for (int j = 1; j < n; ++j)
        if (std::abs(lam(j) - 1.0) <= 1e-10)
            throw ResidualTooLarge("eigenvalue 1 is numerically repeated");
    lam(0) = 1.0;
    U.col(0) = Eigen::VectorXcd::Constant(n, 1.0 / std::sqrt(double(n)));

    for (int j = 1; j < n; ++j)
        if (lam(j).real() >= 1.0)
            throw ResidualTooLarge("non-Perron eigenvalue with real part >= 1");

    // cluster coincident eigenvalues; replace members by the cluster mean so
    // downstream denominators (1 - lambda etc.) are consistent
    const double cluster_radius = 1e-8;
    int j = 1;
    while (j < n) {
        int k = j + 1;
        while (k < n && std::abs(lam(k) - lam(j)) <= cluster_radius) ++k;
        if (k - j > 1) {
            std::complex<double> mean = 0;
            for (int i = j; i < k; ++i) mean += lam(i);
            mean /= double(k - j);
            // Gram-Schmidt inside the cluster: the solver's basis of a true
            // eigenspace need not be orthogonal
            for (int i = j; i < k; ++i) {
                lam(i) = mean;
                for (int p = j; p < i; ++p)
                    U.col(i) -= U.col(p).dot(U.col(i)) * U.col(p);
                const double nrm = U.col(i).norm();
                if (nrm < 1e-6)
                    throw NotDiagonalizable("defective eigenvalue cluster at " +
                                            std::to_string(mean.real()));
                U.col(i) /= nrm;
            }
        }
        j = k;
    }

    for (int i = 1; i < n; ++i) {
        U.col(i).normalize();
        Eigen::VectorXcd col = U.col(i);
        detail::fix_phase(col);
        U.col(i) = col;
    }

    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(U);
    const double cond = svd.singularValues()(0) / svd.singularValues()(n - 1);
    if (!(cond <= 1.0 / residual_tol))
        throw NotDiagonalizable("eigenvector matrix condition number " +
                                std::to_string(cond));

    es.lambda = lam;
    es.U = U;
    es.V = U.transpose().partialPivLu().solve(Eigen::MatrixXcd::Identity(n, n));
    es.lambda_star = lam(1);

    // post-hoc identity checks
    const auto& V = es.V;
    double r = (U.transpose() * V - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff();
    if (r > residual_tol) throw ResidualTooLarge("biorthogonality residual " + std::to_string(r));
    const Eigen::MatrixXcd wt = w.transpose().cast<std::complex<double>>();
    for (int i = 0; i < n; ++i) {
        const double ru = (wt * U.col(i) - lam(i) * U.col(i)).norm();
        const double rv = (w.cast<std::complex<double>>() * V.col(i) - lam(i) * V.col(i)).norm();
        if (ru > residual_tol || rv > residual_tol)
            throw ResidualTooLarge("eigenpair residual " + std::to_string(std::max(ru, rv)) +
                                   " at index " + std::to_string(i));
    }
    r = (U.col(0) * V.col(0).transpose() + es.U_minor() * es.V_minor().transpose() -
         Eigen::MatrixXcd::Identity(n, n))
            .norm();
    if (r > residual_tol) throw ResidualTooLarge("completeness residual " + std::to_string(r));
    r = (es.U_minor() * es.V_minor().transpose()).imag().cwiseAbs().maxCoeff();
    if (r > residual_tol) throw ResidualTooLarge("UV^T imaginary residue " + std::to_string(r));
    for (int i = 0; i < n; ++i) {
        if (std::abs(V(i, 0).imag()) > residual_tol || V(i, 0).real() <= 0)
            throw ResidualTooLarge("Perron right eigenvector not positive");
    }
    if (std::abs(V.col(0).sum() / std::sqrt(double(n)) - 1.0) > residual_tol)
        throw ResidualTooLarge("Perron normalization off");

    return es;
}

// Closed-form decomposition of the mean-field network: lambda_j = 1-alpha for
// j >= 2, U = V = [N^{-1/2} 1 | Helmert basis]. Oracle for the generic path.
inline EigenStructure mean_field_eigenstructure(int n, double alpha,
                                                double residual_tol = 1e-8) {
    if (n < 2) throw NotIrreducible("mean-field network needs N >= 2");
    if (!(alpha > 0.0) || alpha > 1.0)
        throw NotColumnStochastic("mean-field alpha must be in (0,1]");
    EigenStructure es;
    es.residual_tol = residual_tol;
    es.lambda = Eigen::VectorXcd::Constant(n, std::complex<double>(1.0 - alpha, 0.0));
    es.lambda(0) = 1.0;
    Eigen::MatrixXd u = Eigen::MatrixXd::Zero(n, n);
    u.col(0).setConstant(1.0 / std::sqrt(double(n)));
    for (int j = 1; j < n; ++j) {
        const double s = 1.0 / std::sqrt(double(j) * (j + 1));
        for (int i = 0; i < j; ++i) u(i, j) = s;
        u(j, j) = -double(j) * s;
    }
    es.U = u.cast<std::complex<double>>();
    es.V = es.U;  // orthonormal real basis: (U^T)^{-1} = U
    es.lambda_star = std::complex<double>(1.0 - alpha, 0.0);
    return es;
}

enum class RegimeKind { GammaLessOne, GammaOneScalar, GammaOneFast, GammaOneCritical, Unsupported };

inline const char* regime_name(RegimeKind k) {
    switch (k) {
        case RegimeKind::GammaLessOne: return "gamma_less_one";
        case RegimeKind::GammaOneScalar: return "gamma_one_scalar";
        case RegimeKind::GammaOneFast: return "gamma_one_fast";
        case RegimeKind::GammaOneCritical: return "gamma_one_critical";
        default: return "unsupported";
    }
}

struct Regime {
    RegimeKind kind = RegimeKind::Unsupported;
    double gamma = 0;
    double c = 0;
    double lambda_star_real = std::numeric_limits<double>::quiet_NaN();
    double threshold = std::numeric_limits<double>::quiet_NaN();  // 1 - 1/(2c)

    // the CLT scaling sequence; "none" for Unsupported
    const char* rate_label() const {
        switch (kind) {
            case RegimeKind::GammaLessOne: return "n^(gamma-1/2)";
            case RegimeKind::GammaOneScalar:
            case RegimeKind::GammaOneFast: return "sqrt(n)";
            case RegimeKind::GammaOneCritical: return "sqrt(n/ln n)";
            default: return "none";
        }
    }

    double rate(std::uint64_t n) const {
        const double nd = static_cast<double>(n);
        switch (kind) {
            case RegimeKind::GammaLessOne: return std::pow(nd, gamma - 0.5);
            case RegimeKind::GammaOneScalar:
            case RegimeKind::GammaOneFast: return std::sqrt(nd);
            case RegimeKind::GammaOneCritical: return std::sqrt(nd / std::log(nd));
            default: throw WrongRegime("no rate for the unsupported regime");
        }
    }
};

inline Regime classify_regime(double gamma, double c, const EigenStructure& es,
                              double eq_tol = 1e-9) {
    if (!(gamma > 0.5) || gamma > 1.0 || !std::isfinite(gamma))
        throw GammaOutOfRange("gamma must lie in (1/2, 1], got " + std::to_string(gamma));
    if (!(c > 0) || !std::isfinite(c))
        throw GammaOutOfRange("c must be positive, got " + std::to_string(c));
    Regime r;
    r.gamma = gamma;
    r.c = c;
    r.threshold = 1.0 - 1.0 / (2.0 * c);
    if (es.lambda_star) r.lambda_star_real = es.lambda_star->real();
    if (gamma < 1.0) {
        r.kind = RegimeKind::GammaLessOne;
    } else if (es.n() == 1) {
        r.kind = RegimeKind::GammaOneScalar;
    } else if (std::abs(r.lambda_star_real - r.threshold) <= eq_tol) {
        r.kind = RegimeKind::GammaOneCritical;
    } else if (r.lambda_star_real < r.threshold) {
        r.kind = RegimeKind::GammaOneFast;
    } else {
        r.kind = RegimeKind::Unsupported;
    }
    return r;
}

}

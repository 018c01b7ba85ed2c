#pragma once

// The interacting reinforced process itself:
//   X_{n+1,j} ~ Bernoulli((W^T Z_n)_j)  conditionally independent over j,
//   Z_{n+1} = (1 - r_n) Z_n + r_n X_{n+1},
//   N_n     = (1 - 1/n) N_{n-1} + (1/n) X_n,  N_0 = 0.
// Empirical means are kept as integer action counts, so N_n is exact.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rspnet/errors.hpp"
#include "rspnet/graph.hpp"
#include "rspnet/rng.hpp"
#include "rspnet/schedule.hpp"

namespace rspnet {

struct SystemState {
    std::uint64_t n = 0;
    Eigen::VectorXd z;                           // inclinations, in [0,1]^N
    Eigen::Matrix<std::uint64_t, Eigen::Dynamic, 1> ones_count;
    Eigen::VectorXd x_last;                      // actions of the latest step

    static SystemState initial(const Eigen::VectorXd& z0) {
        for (int i = 0; i < z0.size(); ++i)
            if (!(z0(i) >= 0.0) || z0(i) > 1.0)
                throw ProbabilityOutOfRange("Z0 entry outside [0,1]");
        SystemState s;
        s.n = 0;
        s.z = z0;
        s.ones_count.setZero(z0.size());
        s.x_last.setZero(z0.size());
        return s;
    }

    Eigen::VectorXd nbar() const {
        if (n == 0) return Eigen::VectorXd::Zero(z.size());
        return ones_count.cast<double>() / static_cast<double>(n);
    }
};

// one transition; consumes exactly N uniforms in vertex order
inline void step(SystemState& state, const WeightedNetwork& net,
                 const RateSchedule& sched, Xoshiro256pp& rng) {
    const int n_vertices = net.size();
    Eigen::VectorXd p = net.weights().transpose() * state.z;
    for (int j = 0; j < n_vertices; ++j) {
        if (p(j) < -1e-12 || p(j) > 1.0 + 1e-12)
            throw ProbabilityOutOfRange("action probability " + std::to_string(p(j)) +
                                        " at vertex " + std::to_string(j));
        const double pj = std::min(1.0, std::max(0.0, p(j)));
        state.x_last(j) = rng.uniform01() < pj ? 1.0 : 0.0;
    }
    const double r = sched.rate(state.n);
    state.z = (1.0 - r) * state.z + r * state.x_last;
    for (int j = 0; j < n_vertices; ++j)
        state.ones_count(j) += state.x_last(j) > 0.5 ? 1u : 0u;
    state.n += 1;
}

struct Projections {
    double z_tilde = 0;   // N^{-1/2} v1^T Z
    double n_tilde = 0;   // N^{-1/2} v1^T Nbar
    Eigen::VectorXd z_hat;  // U V^T Z over the minor spectrum, equals Z - z_tilde 1
    Eigen::VectorXd n_hat;  // Nbar - z_tilde 1
    std::optional<double> a_weighted;  // a^T Nbar
};

inline Projections project(const SystemState& state, const EigenStructure& es,
                           const Eigen::VectorXd* a = nullptr) {
    const int n_vertices = es.n();
    const Eigen::VectorXd v1 = es.v1_real();
    const double root_n = std::sqrt(static_cast<double>(n_vertices));
    Projections pr;
    const Eigen::VectorXd nb = state.nbar();
    pr.z_tilde = v1.dot(state.z) / root_n;
    pr.n_tilde = v1.dot(nb) / root_n;
    const Eigen::VectorXcd zc = state.z.cast<std::complex<double>>();
    const Eigen::VectorXcd zh = es.U_minor() * (es.V_minor().transpose() * zc);
    if (zh.imag().cwiseAbs().maxCoeff() >= 1e-10)
        throw ComplexResidue("z_hat has imaginary residue");
    pr.z_hat = zh.real();
    pr.n_hat = nb - Eigen::VectorXd::Constant(n_vertices, pr.z_tilde);
    if (a) {
        if (a->size() != n_vertices)
            throw WeightVectorNotNormalized("a-vector has wrong dimension");
        if (std::abs(a->sum() - 1.0) > 1e-10)
            throw WeightVectorNotNormalized("a-vector entries must sum to 1");
        pr.a_weighted = a->dot(nb);
    }
    return pr;
}

struct Snapshot {
    SystemState state;
    Projections proj;
};

// run to `horizon`, recording state and projections at each checkpoint
inline std::vector<Snapshot> simulate(const WeightedNetwork& net, const EigenStructure& es,
                                      const RateSchedule& sched, const Eigen::VectorXd& z0,
                                      std::uint64_t horizon,
                                      const std::vector<std::uint64_t>& checkpoints,
                                      Xoshiro256pp rng, const Eigen::VectorXd* a = nullptr) {
    if (checkpoints.empty()) throw EmptyCheckpoints("at least one checkpoint required");
    if (horizon > (1ULL << 53)) throw HorizonOverflow("horizon exceeds 2^53");
    for (std::size_t i = 0; i < checkpoints.size(); ++i) {
        if (checkpoints[i] < 1 || checkpoints[i] > horizon)
            throw HorizonOverflow("checkpoint " + std::to_string(checkpoints[i]) +
                                  " outside [1, horizon]");
        if (i > 0 && checkpoints[i] <= checkpoints[i - 1])
            throw HorizonOverflow("checkpoints must be strictly increasing");
    }
    if (z0.size() != net.size())
        throw ProbabilityOutOfRange("Z0 has wrong dimension");

    SystemState state = SystemState::initial(z0);
    std::vector<Snapshot> out;
    out.reserve(checkpoints.size());
    std::size_t next_cp = 0;
    for (std::uint64_t t = 0; t < horizon && next_cp < checkpoints.size(); ++t) {
        step(state, net, sched, rng);
        if (state.n == checkpoints[next_cp]) {
            out.push_back(Snapshot{state, project(state, es, a)});
            ++next_cp;
        }
    }
    return out;
}

}

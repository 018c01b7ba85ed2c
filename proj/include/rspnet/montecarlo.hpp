#pragma once

// replicated-simulation harness: synchronization curves, standardized CLT
// covariance checks, CI coverage, test size/power; deterministic for a given
// master seed at any thread count (stream per replication, aggregation in
// replication order)

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "rspnet/asymptotics.hpp"
#include "rspnet/dynamics.hpp"
#include "rspnet/errors.hpp"
#include "rspnet/graph.hpp"
#include "rspnet/inference.hpp"
#include "rspnet/rng.hpp"
#include "rspnet/schedule.hpp"

namespace rspnet {

struct CheckpointRecord {
    std::uint64_t n = 0;
    double z_tilde = 0;
    double n_tilde = 0;
    Eigen::VectorXd z_hat;
    Eigen::VectorXd n_hat;
    std::optional<double> a_weighted;

    Eigen::VectorXd z() const { return z_hat.array() + z_tilde; }
    Eigen::VectorXd nbar() const { return n_hat.array() + z_tilde; }
};

struct ReplicationSummary {
    std::uint64_t rep = 0;
    std::vector<CheckpointRecord> records;
    double z_infty_proxy = 0;  // z_tilde at the horizon
};

enum class Z0Kind { Scalar, Vector, Uniform };

struct Z0Spec {
    Z0Kind kind = Z0Kind::Scalar;
    double scalar = 0.5;
    Eigen::VectorXd vector;

    Eigen::VectorXd realize(Eigen::Index n, Xoshiro256pp& rng) const {
        switch (kind) {
            case Z0Kind::Scalar: return Eigen::VectorXd::Constant(n, scalar);
            case Z0Kind::Vector:
                if (vector.size() != n) throw ConfigSemanticError("z0 vector length mismatch");
                return vector;
            default: {
                Eigen::VectorXd z(n);
                for (Eigen::Index j = 0; j < n; ++j) z(j) = rng.uniform01();
                return z;
            }
        }
    }
};

struct McPlan {
    WeightedNetwork net;
    EigenStructure es;
    RateSchedule sched;
    Z0Spec z0;
    std::uint64_t horizon = 0;                 // doubles as the proxy horizon M
    std::vector<std::uint64_t> checkpoints;    // strictly increasing, <= horizon
    std::uint64_t master_seed = 0;
    std::uint64_t replications = 0;
    std::optional<Eigen::VectorXd> a;
};

inline std::vector<ReplicationSummary> run_replications(const McPlan& plan, unsigned threads) {
    if (plan.replications == 0) throw ConfigSemanticError("replications must be positive");
    if (plan.checkpoints.empty()) throw EmptyCheckpoints("at least one checkpoint required");

    // the proxy is read at the horizon, so make sure it is snapshotted
    std::vector<std::uint64_t> cps = plan.checkpoints;
    if (cps.back() < plan.horizon) cps.push_back(plan.horizon);
    const std::size_t keep = plan.checkpoints.size();

    const std::uint64_t r_total = plan.replications;
    std::vector<ReplicationSummary> out(r_total);
    const Eigen::VectorXd* a_ptr = plan.a ? &*plan.a : nullptr;

    auto worker = [&](std::uint64_t lo, std::uint64_t hi) {
        for (std::uint64_t r = lo; r < hi; ++r) {
            Xoshiro256pp rng = Xoshiro256pp::stream(plan.master_seed, r);
            const Eigen::VectorXd z0 = plan.z0.realize(plan.net.size(), rng);
            const std::vector<Snapshot> snaps =
                simulate(plan.net, plan.es, plan.sched, z0, plan.horizon, cps, rng, a_ptr);
            ReplicationSummary& rs = out[r];
            rs.rep = r;
            rs.records.reserve(keep);
            for (std::size_t i = 0; i < keep; ++i) {
                const Snapshot& s = snaps[i];
                CheckpointRecord rec;
                rec.n = s.state.n;
                rec.z_tilde = s.proj.z_tilde;
                rec.n_tilde = s.proj.n_tilde;
                rec.z_hat = s.proj.z_hat;
                rec.n_hat = s.proj.n_hat;
                rec.a_weighted = s.proj.a_weighted;
                rs.records.push_back(std::move(rec));
            }
            rs.z_infty_proxy = snaps.back().proj.z_tilde;
        }
    };

    const unsigned k = std::max(1u, std::min<unsigned>(threads, unsigned(r_total)));
    if (k == 1) {
        worker(0, r_total);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(k);
        const std::uint64_t chunk = (r_total + k - 1) / k;
        for (unsigned t = 0; t < k; ++t) {
            const std::uint64_t lo = t * chunk;
            const std::uint64_t hi = std::min(r_total, lo + chunk);
            if (lo >= hi) break;
            pool.emplace_back(worker, lo, hi);
        }
        for (auto& th : pool) th.join();
    }
    return out;
}

// ---- synchronization ----

struct SyncRow {
    std::uint64_t rep;
    std::uint64_t n;
    double max_dev;  // max_j |Nbar_j - ntilde|
};

struct SyncCheckpointSummary {
    std::uint64_t n;
    double median_dev;
    double frac_below;
};

struct SyncReport {
    std::vector<SyncRow> rows;
    std::vector<SyncCheckpointSummary> summaries;
    double threshold;
};

inline SyncReport synchronization_report(const std::vector<ReplicationSummary>& sums,
                                         double threshold) {
    if (sums.empty()) throw ConfigSemanticError("no replications");
    const std::size_t n_cp = sums.front().records.size();
    SyncReport rep;
    rep.threshold = threshold;
    rep.rows.reserve(sums.size() * n_cp);

    for (std::size_t i = 0; i < n_cp; ++i) {
        std::vector<double> devs;
        devs.reserve(sums.size());
        std::size_t below = 0;
        for (const ReplicationSummary& rs : sums) {
            const CheckpointRecord& rec = rs.records[i];
            const double d = (rec.nbar().array() - rec.n_tilde).abs().maxCoeff();
            rep.rows.push_back({rs.rep, rec.n, d});
            devs.push_back(d);
            if (d < threshold) ++below;
        }
        std::sort(devs.begin(), devs.end());
        const std::size_t m = devs.size();
        const double median =
            m % 2 ? devs[m / 2] : 0.5 * (devs[m / 2 - 1] + devs[m / 2]);
        rep.summaries.push_back({sums.front().records[i].n, median, double(below) / double(m)});
    }

    // rows were pushed checkpoint-major; reorder replication-major for output
    std::sort(rep.rows.begin(), rep.rows.end(), [](const SyncRow& x, const SyncRow& y) {
        return x.rep != y.rep ? x.rep < y.rep : x.n < y.n;
    });
    return rep;
}

// ---- CLT covariance ----

struct CltRow {
    std::uint64_t rep;
    bool included;
    double plug;            // standardization divisor source (proxy or ntilde)
    Eigen::VectorXd y;      // standardized 2N vector, empty when excluded
};

struct CltReport {
    std::uint64_t checkpoint = 0;
    std::vector<CltRow> rows;
    Eigen::MatrixXd empirical;  // uncentered second moment of y
    Eigen::MatrixXd target;
    Eigen::MatrixXd z_scores;
    double frob_rel_err = 0;
    std::size_t included = 0;
    std::size_t excluded = 0;
};

inline bool plug_usable(double p) { return p >= 1e-4 && p <= 1.0 - 1e-4; }

// standardized per-replication vectors against the regime's covariance; the
// centered regimes subtract the proxy, the hat regimes need no proxy at all
inline CltReport clt_covariance_check(const std::vector<ReplicationSummary>& sums,
                                      const Regime& regime, const EigenStructure& es) {
    if (sums.size() < 500)
        throw ConfigSemanticError("clt_covariance needs at least 500 replications");
    const std::size_t last = sums.front().records.size() - 1;
    const Eigen::Index nv = es.n();
    const bool hat_form = regime.kind == RegimeKind::GammaOneFast ||
                          regime.kind == RegimeKind::GammaOneCritical;

    CltReport rep;
    rep.checkpoint = sums.front().records[last].n;
    const double rate = regime.rate(rep.checkpoint);

    if (hat_form) {
        rep.target = (regime.kind == RegimeKind::GammaOneFast
                          ? hat_covariance(regime.c, es)
                          : hat_star_covariance(regime.c, es))
                         .full();
    } else {
        rep.target = asymptotic_covariance(regime, es).full();
    }

    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(2 * nv, 2 * nv);
    rep.rows.reserve(sums.size());
    for (const ReplicationSummary& rs : sums) {
        const CheckpointRecord& rec = rs.records[last];
        CltRow row;
        row.rep = rs.rep;
        const double p = hat_form ? rec.n_tilde : rs.z_infty_proxy;
        row.plug = p;
        row.included = plug_usable(p);
        if (row.included) {
            Eigen::VectorXd y(2 * nv);
            if (hat_form) {
                y << rec.z_hat, rec.n_hat;
            } else {
                y << (rec.z().array() - p).matrix(), (rec.nbar().array() - p).matrix();
            }
            y *= rate / std::sqrt(p * (1.0 - p));
            acc.noalias() += y * y.transpose();
            row.y = std::move(y);
            ++rep.included;
        } else {
            ++rep.excluded;
        }
        rep.rows.push_back(std::move(row));
    }

    if (rep.excluded * 5 > sums.size())
        throw ProxyDegenerate("more than 20% of replications excluded");
    rep.empirical = acc / double(rep.included);
    rep.frob_rel_err = (rep.empirical - rep.target).norm() / std::max(rep.target.norm(), 1e-12);

    rep.z_scores.resize(2 * nv, 2 * nv);
    for (Eigen::Index i = 0; i < 2 * nv; ++i)
        for (Eigen::Index j = 0; j < 2 * nv; ++j) {
            const double se = std::max(
                std::sqrt((rep.target(i, i) * rep.target(j, j) + rep.target(i, j) * rep.target(i, j)) /
                          double(rep.included)),
                1e-12);
            rep.z_scores(i, j) = (rep.empirical(i, j) - rep.target(i, j)) / se;
        }
    return rep;
}

// ---- CI coverage ----

struct CiRow {
    std::uint64_t rep;
    ConfidenceInterval ci;
    bool covered;
};

struct CiReport {
    std::uint64_t checkpoint = 0;
    std::vector<CiRow> rows;
    double coverage = 0;
    double se = 0;
    std::size_t included = 0;
    std::size_t excluded = 0;  // degenerate intervals
};

inline CiReport ci_coverage(const std::vector<ReplicationSummary>& sums, const Regime& regime,
                            const EigenStructure& es, double theta, CiBasis basis,
                            const Eigen::VectorXd* a = nullptr) {
    if (sums.empty()) throw ConfigSemanticError("no replications");
    const std::size_t last = sums.front().records.size() - 1;

    CiReport rep;
    rep.checkpoint = sums.front().records[last].n;
    rep.rows.reserve(sums.size());
    std::size_t hits = 0;
    for (const ReplicationSummary& rs : sums) {
        const CheckpointRecord& rec = rs.records[last];
        CiRow row;
        row.rep = rs.rep;
        row.ci = basis == CiBasis::ZTilde
                     ? ci_from_ztilde(rec.z_tilde, rec.n, regime.gamma, regime.c, es, theta)
                     : ci_from_ntilde(rec.nbar(), rec.n, regime, es, theta, a);
        row.covered = !row.ci.degenerate && row.ci.lo <= rs.z_infty_proxy &&
                      rs.z_infty_proxy <= row.ci.hi;
        if (row.ci.degenerate) {
            ++rep.excluded;
        } else {
            ++rep.included;
            if (row.covered) ++hits;
        }
        rep.rows.push_back(row);
    }
    if (rep.included == 0) throw ProxyDegenerate("all intervals degenerate");
    rep.coverage = double(hits) / double(rep.included);
    rep.se = std::sqrt(rep.coverage * (1.0 - rep.coverage) / double(rep.included));
    return rep;
}

// ---- test size / power ----

struct TestRow {
    std::uint64_t rep;
    TestReport report;
};

struct TestSummary {
    std::uint64_t checkpoint = 0;
    std::vector<TestRow> rows;
    double rejection_rate = 0;
    double se = 0;
    std::optional<double> noncentral_factor;
};

inline TestSummary test_size_power(const std::vector<ReplicationSummary>& sums, double alpha0,
                                   double alpha_true, double c, double theta,
                                   double eq_tol = 1e-9) {
    if (sums.empty()) throw ConfigSemanticError("no replications");
    const std::size_t last = sums.front().records.size() - 1;

    TestSummary out;
    out.checkpoint = sums.front().records[last].n;
    out.rows.reserve(sums.size());
    std::size_t rejections = 0;
    for (const ReplicationSummary& rs : sums) {
        const CheckpointRecord& rec = rs.records[last];
        TestRow row{rs.rep, mean_field_test(rec.nbar(), rec.n, alpha0, c, theta, eq_tol)};
        if (row.report.reject) ++rejections;
        out.rows.push_back(std::move(row));
    }
    out.rejection_rate = double(rejections) / double(sums.size());
    out.se = std::sqrt(out.rejection_rate * (1.0 - out.rejection_rate) / double(sums.size()));
    if (std::abs(alpha_true - alpha0) > eq_tol && 2.0 * c * alpha0 - 1.0 > eq_tol &&
        2.0 * c * alpha_true - 1.0 > eq_tol) {
        const double f = mean_field_power_scale(c, alpha0, alpha_true, eq_tol);
        out.noncentral_factor = f;
        for (TestRow& row : out.rows) row.report.noncentral_factor = f;
    }
    return out;
}

}

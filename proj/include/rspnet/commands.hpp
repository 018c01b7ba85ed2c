#pragma once

// subcommand bodies shared by the CLI binary and the end-to-end tests; each
// loads a config, validates, and emits one CSV artifact under --out

#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <system_error>
#include <vector>

#include <Eigen/Dense>

#include "rspnet/asymptotics.hpp"
#include "rspnet/config.hpp"
#include "rspnet/csv.hpp"
#include "rspnet/dynamics.hpp"
#include "rspnet/errors.hpp"
#include "rspnet/graph.hpp"
#include "rspnet/inference.hpp"
#include "rspnet/limit_lemmas.hpp"
#include "rspnet/montecarlo.hpp"
#include "rspnet/rng.hpp"
#include "rspnet/schedule.hpp"

namespace rspnet {

struct CliOptions {
    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed_override;
    unsigned threads = 1;
    bool dry_run = false;
};

namespace detail {

inline std::string output_file(const CliOptions& opts, const RunConfig& cfg,
                               const std::string& sub) {
    namespace fs = std::filesystem;
    const fs::path dir(opts.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string());
    return (dir / (cfg.output_path ? *cfg.output_path : sub + ".csv")).string();
}

inline std::uint64_t require_horizon(const RunConfig& cfg) {
    if (!cfg.horizon) throw ConfigSemanticError("horizon: required for this command");
    if (*cfg.horizon < 1) throw ConfigSemanticError("horizon: must be positive");
    return *cfg.horizon;
}

inline void require_checkpoints(const RunConfig& cfg, std::uint64_t horizon) {
    if (cfg.checkpoints.empty())
        throw ConfigSemanticError("checkpoints: required for this command");
    if (cfg.checkpoints.back() > horizon)
        throw ConfigSemanticError("checkpoints: last checkpoint exceeds horizon");
}

}  // namespace detail

// eigenvalues, Perron data, regime tag and the assembled covariance blocks
inline int cmd_analyze(const CliOptions& opts) {
    const RunConfig cfg = load_config(opts.config_path, opts.seed_override);
    const WeightedNetwork net = cfg.build_network();
    const RateSchedule sched = cfg.build_schedule();
    const EigenStructure es = eigenstructure(net);
    const Regime regime = classify_regime(sched.gamma(), sched.c(), es);

    if (opts.dry_run) {
        std::cout << "analyze: config OK (dry run)\n";
        return 0;
    }

    CsvWriter out(detail::output_file(opts, cfg, "analyze"), "rspnet analyze", cfg.config_hash,
                  cfg.seed);
    out.row({"item", "i", "j", "value"});
    const int n = es.n();
    for (int i = 0; i < n; ++i)
        out.row({"lambda", csvfmt::fmt(i), "", csvfmt::fmt(es.lambda(i))});
    const Eigen::VectorXd v1 = es.v1_real();
    for (int i = 0; i < n; ++i) out.row({"v1", csvfmt::fmt(i), "", csvfmt::fmt(v1(i))});
    out.row({"v1_norm_sq", "", "", csvfmt::fmt(es.v1_norm_sq())});
    if (es.lambda_star) out.row({"lambda_star", "", "", csvfmt::fmt(*es.lambda_star)});
    out.row({"gamma", "", "", csvfmt::fmt(sched.gamma())});
    out.row({"c", "", "", csvfmt::fmt(sched.c())});
    out.row({"regime", "", "", regime_name(regime.kind)});
    out.row({"rate", "", "", regime.rate_label()});

    if (regime.kind == RegimeKind::Unsupported) {
        std::cout << "analyze: N=" << n << " regime=unsupported; gamma = 1 with Re(lambda*) = "
                  << regime.lambda_star_real << " above the threshold 1 - 1/(2c) = "
                  << regime.threshold << ", no covariance theorem applies\n";
        return 0;
    }

    const CovarianceBlocks cov = asymptotic_covariance(regime, es);
    const auto emit = [&out](const char* item, const Eigen::MatrixXd& m) {
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j)
                out.row({item, csvfmt::fmt(int(i)), csvfmt::fmt(int(j)), csvfmt::fmt(m(i, j))});
    };
    emit("sigma_zz", cov.zz);
    emit("sigma_zn", cov.zn);
    emit("sigma_nn", cov.nn);
    std::cout << "analyze: N=" << n << " regime=" << regime_name(regime.kind)
              << " rate=" << regime.rate_label() << "\n";
    return 0;
}

// one trajectory on RNG stream 0, snapshots at each checkpoint
inline int cmd_simulate(const CliOptions& opts) {
    const RunConfig cfg = load_config(opts.config_path, opts.seed_override);
    const WeightedNetwork net = cfg.build_network();
    const RateSchedule sched = cfg.build_schedule();
    const EigenStructure es = eigenstructure(net);
    const std::uint64_t horizon = detail::require_horizon(cfg);
    detail::require_checkpoints(cfg, horizon);
    const Eigen::VectorXd* a = cfg.a_vector ? &*cfg.a_vector : nullptr;

    if (opts.dry_run) {
        std::cout << "simulate: config OK (dry run)\n";
        return 0;
    }

    Xoshiro256pp rng = Xoshiro256pp::stream(cfg.seed, 0);
    const Eigen::VectorXd z0 = cfg.z0.realize(net.size(), rng);
    const std::vector<Snapshot> snaps =
        simulate(net, es, sched, z0, horizon, cfg.checkpoints, rng, a);

    CsvWriter out(detail::output_file(opts, cfg, "simulate"), "rspnet simulate", cfg.config_hash,
                  cfg.seed);
    std::vector<std::string> head{"n", "z_tilde", "n_tilde"};
    for (int j = 0; j < net.size(); ++j) head.push_back("z_" + std::to_string(j));
    for (int j = 0; j < net.size(); ++j) head.push_back("nbar_" + std::to_string(j));
    if (a) head.push_back("a_weighted");
    out.row(head);
    for (const Snapshot& s : snaps) {
        std::vector<std::string> row{csvfmt::fmt(s.state.n), csvfmt::fmt(s.proj.z_tilde),
                                     csvfmt::fmt(s.proj.n_tilde)};
        for (int j = 0; j < net.size(); ++j) row.push_back(csvfmt::fmt(s.state.z(j)));
        const Eigen::VectorXd nb = s.state.nbar();
        for (int j = 0; j < net.size(); ++j) row.push_back(csvfmt::fmt(nb(j)));
        if (a) row.push_back(csvfmt::fmt(*s.proj.a_weighted));
        out.row(row);
    }
    std::cout << "simulate: horizon=" << horizon << ", " << snaps.size() << " checkpoints\n";
    return 0;
}

// replicated experiments; the only threaded command, output is aggregated in
// replication order so the bytes do not depend on the thread count
inline int cmd_mc(const CliOptions& opts) {
    const RunConfig cfg = load_config(opts.config_path, opts.seed_override);
    if (!cfg.experiment) throw ConfigSemanticError("experiment: required for mc");
    const ExperimentKind kind = *cfg.experiment;
    const WeightedNetwork net = cfg.build_network();
    const RateSchedule sched = cfg.build_schedule();
    const EigenStructure es = eigenstructure(net);
    const std::uint64_t horizon = detail::require_horizon(cfg);
    detail::require_checkpoints(cfg, horizon);
    if (!cfg.replications) throw ConfigSemanticError("replications: required for mc");
    const std::uint64_t reps = *cfg.replications;
    if (reps < 1) throw ConfigSemanticError("replications: must be positive");

    const Regime regime = classify_regime(sched.gamma(), sched.c(), es);
    const bool hat_form = regime.kind == RegimeKind::GammaOneFast ||
                          regime.kind == RegimeKind::GammaOneCritical;
    const std::uint64_t last_cp = cfg.checkpoints.back();

    if (kind != ExperimentKind::Synchronization && reps < 100)
        throw ConfigSemanticError("replications: distributional experiments need at least 100");

    // experiments that standardize by the proxy need a long proxy horizon
    const bool consumes_proxy = kind == ExperimentKind::CiCoverage ||
                                (kind == ExperimentKind::CltCovariance && !hat_form);
    if (consumes_proxy && horizon < 10 * last_cp)
        throw ConfigSemanticError(
            "horizon: proxy experiments need horizon >= 10x the last checkpoint");

    const Eigen::VectorXd* a = cfg.a_vector ? &*cfg.a_vector : nullptr;

    if (kind == ExperimentKind::CltCovariance && regime.kind == RegimeKind::Unsupported)
        throw WrongRegime("no covariance theorem for this network/schedule pair");
    if (kind == ExperimentKind::CiCoverage && cfg.ci_basis != CiBasis::ZTilde &&
        regime.kind == RegimeKind::Unsupported)
        throw WrongRegime("no interval construction for this network/schedule pair");
    if (kind == ExperimentKind::CiCoverage && cfg.ci_basis == CiBasis::AWeighted &&
        regime.kind == RegimeKind::GammaOneFast && a == nullptr)
        throw ConfigSemanticError("a_vector: required for the a-weighted basis in the fast regime");

    double alpha_truth = 0;
    if (kind == ExperimentKind::TestSize || kind == ExperimentKind::TestPower) {
        if (!cfg.mean_field)
            throw ConfigSemanticError("network: test experiments need a mean_field network");
        if (!cfg.alpha0) throw ConfigSemanticError("alpha0: required for test experiments");
        if (sched.gamma() != 1.0)
            throw ConfigSemanticError("schedule: test experiments need gamma = 1");
        alpha_truth = cfg.mean_field->second;
        if (cfg.alpha_true && std::abs(*cfg.alpha_true - alpha_truth) > 1e-12)
            throw ConfigSemanticError("alpha_true: must match network.mean_field.alpha");
        const bool on_null = std::abs(alpha_truth - *cfg.alpha0) <= 1e-12;
        if (kind == ExperimentKind::TestSize && !on_null)
            throw ConfigSemanticError("alpha0: test_size needs the network to satisfy the null");
        if (kind == ExperimentKind::TestPower && on_null)
            throw ConfigSemanticError("alpha0: test_power needs the network off the null");
    }

    if (opts.dry_run) {
        std::cout << "mc: config OK (dry run)\n";
        return 0;
    }

    const McPlan plan{net, es, sched, cfg.z0, horizon, cfg.checkpoints, cfg.seed, reps, {}};
    const std::vector<ReplicationSummary> sums = run_replications(plan, opts.threads);

    CsvWriter out(detail::output_file(opts, cfg, "mc"), "rspnet mc", cfg.config_hash, cfg.seed);
    switch (kind) {
        case ExperimentKind::Synchronization: {
            const SyncReport rep = synchronization_report(sums, cfg.sync_threshold);
            out.row({"row", "rep", "n", "max_dev", "median_dev", "frac_below"});
            for (const SyncRow& r : rep.rows)
                out.row({"rep", csvfmt::fmt(r.rep), csvfmt::fmt(r.n), csvfmt::fmt(r.max_dev), "",
                         ""});
            for (const SyncCheckpointSummary& s : rep.summaries)
                out.row({"summary", "", csvfmt::fmt(s.n), "", csvfmt::fmt(s.median_dev),
                         csvfmt::fmt(s.frac_below)});
            const SyncCheckpointSummary& fin = rep.summaries.back();
            std::cout << "mc synchronization: R=" << reps << " n=" << fin.n
                      << " median max-dev=" << fin.median_dev << " frac below "
                      << cfg.sync_threshold << " = " << fin.frac_below << "\n";
            break;
        }
        case ExperimentKind::CltCovariance: {
            const CltReport rep = clt_covariance_check(sums, regime, es);
            const Eigen::Index d = rep.target.rows();
            std::vector<std::string> head{"row", "rep", "n", "included", "plug"};
            for (Eigen::Index i = 0; i < d; ++i) head.push_back("y_" + std::to_string(i));
            head.push_back("frob_rel_err");
            out.row(head);
            for (const CltRow& r : rep.rows) {
                std::vector<std::string> row{"rep", csvfmt::fmt(r.rep), csvfmt::fmt(rep.checkpoint),
                                             csvfmt::fmt(r.included), csvfmt::fmt(r.plug)};
                for (Eigen::Index i = 0; i < d; ++i)
                    row.push_back(r.included ? csvfmt::fmt(r.y(i)) : "");
                row.push_back("");
                out.row(row);
            }
            std::vector<std::string> srow{"summary", "", csvfmt::fmt(rep.checkpoint),
                                          csvfmt::fmt(std::uint64_t(rep.included)), ""};
            for (Eigen::Index i = 0; i < d; ++i) srow.push_back("");
            srow.push_back(csvfmt::fmt(rep.frob_rel_err));
            out.row(srow);
            std::cout << "mc clt_covariance: R=" << reps << " included=" << rep.included
                      << " frobenius rel err=" << rep.frob_rel_err << "\n";
            break;
        }
        case ExperimentKind::CiCoverage: {
            const Eigen::VectorXd* ci_a = cfg.ci_basis == CiBasis::AWeighted ? a : nullptr;
            const CiReport rep = ci_coverage(sums, regime, es, cfg.theta, cfg.ci_basis, ci_a);
            out.row({"row", "rep", "n", "center", "half_width", "lo", "hi", "clipped",
                     "degenerate", "covered", "coverage", "se"});
            for (const CiRow& r : rep.rows)
                out.row({"rep", csvfmt::fmt(r.rep), csvfmt::fmt(rep.checkpoint),
                         csvfmt::fmt(r.ci.center), csvfmt::fmt(r.ci.half_width),
                         csvfmt::fmt(r.ci.lo), csvfmt::fmt(r.ci.hi), csvfmt::fmt(r.ci.clipped),
                         csvfmt::fmt(r.ci.degenerate), csvfmt::fmt(r.covered), "", ""});
            out.row({"summary", "", csvfmt::fmt(rep.checkpoint), "", "", "", "", "", "", "",
                     csvfmt::fmt(rep.coverage), csvfmt::fmt(rep.se)});
            std::cout << "mc ci_coverage: R=" << reps << " included=" << rep.included
                      << " coverage=" << rep.coverage << " se=" << rep.se << "\n";
            break;
        }
        default: {
            const TestSummary rep =
                test_size_power(sums, *cfg.alpha0, alpha_truth, sched.c(), cfg.theta);
            out.row({"row", "rep", "n", "statistic", "dof", "p_value", "reject", "rejection_rate",
                     "se", "noncentral_factor"});
            for (const TestRow& r : rep.rows)
                out.row({"rep", csvfmt::fmt(r.rep), csvfmt::fmt(rep.checkpoint),
                         csvfmt::fmt(r.report.statistic), csvfmt::fmt(r.report.dof),
                         csvfmt::fmt(r.report.p_value), csvfmt::fmt(r.report.reject), "", "", ""});
            out.row({"summary", "", csvfmt::fmt(rep.checkpoint), "", "", "", "",
                     csvfmt::fmt(rep.rejection_rate), csvfmt::fmt(rep.se),
                     rep.noncentral_factor ? csvfmt::fmt(*rep.noncentral_factor) : ""});
            std::cout << "mc " << experiment_name(kind) << ": R=" << reps
                      << " rejection rate=" << rep.rejection_rate << " se=" << rep.se << "\n";
            break;
        }
    }
    return 0;
}

// intervals along one trajectory
inline int cmd_ci(const CliOptions& opts) {
    const RunConfig cfg = load_config(opts.config_path, opts.seed_override);
    const WeightedNetwork net = cfg.build_network();
    const RateSchedule sched = cfg.build_schedule();
    const EigenStructure es = eigenstructure(net);
    const std::uint64_t horizon = detail::require_horizon(cfg);
    detail::require_checkpoints(cfg, horizon);
    const Regime regime = classify_regime(sched.gamma(), sched.c(), es);
    const Eigen::VectorXd* a =
        cfg.ci_basis == CiBasis::AWeighted && cfg.a_vector ? &*cfg.a_vector : nullptr;
    if (cfg.ci_basis == CiBasis::AWeighted && regime.kind == RegimeKind::GammaOneFast &&
        a == nullptr)
        throw ConfigSemanticError("a_vector: required for the a-weighted basis in the fast regime");
    if (cfg.ci_basis != CiBasis::ZTilde && regime.kind == RegimeKind::Unsupported)
        throw WrongRegime("no interval construction for this network/schedule pair");

    if (opts.dry_run) {
        std::cout << "ci: config OK (dry run)\n";
        return 0;
    }

    Xoshiro256pp rng = Xoshiro256pp::stream(cfg.seed, 0);
    const Eigen::VectorXd z0 = cfg.z0.realize(net.size(), rng);
    const std::vector<Snapshot> snaps = simulate(net, es, sched, z0, horizon, cfg.checkpoints, rng);

    CsvWriter out(detail::output_file(opts, cfg, "ci"), "rspnet ci", cfg.config_hash, cfg.seed);
    out.row({"n", "basis", "center", "half_width", "lo", "hi", "clipped", "degenerate"});
    for (const Snapshot& s : snaps) {
        const ConfidenceInterval ci =
            cfg.ci_basis == CiBasis::ZTilde
                ? ci_from_ztilde(s.proj.z_tilde, s.state.n, sched.gamma(), sched.c(), es,
                                 cfg.theta)
                : ci_from_ntilde(s.state.nbar(), s.state.n, regime, es, cfg.theta, a);
        out.row({csvfmt::fmt(s.state.n), ci_basis_name(ci.basis), csvfmt::fmt(ci.center),
                 csvfmt::fmt(ci.half_width), csvfmt::fmt(ci.lo), csvfmt::fmt(ci.hi),
                 csvfmt::fmt(ci.clipped), csvfmt::fmt(ci.degenerate)});
    }
    std::cout << "ci: " << snaps.size() << " intervals at level " << 1.0 - cfg.theta << "\n";
    return 0;
}

// chi-square mean-field test along one trajectory
inline int cmd_test(const CliOptions& opts) {
    const RunConfig cfg = load_config(opts.config_path, opts.seed_override);
    const WeightedNetwork net = cfg.build_network();
    const RateSchedule sched = cfg.build_schedule();
    const EigenStructure es = eigenstructure(net);
    const std::uint64_t horizon = detail::require_horizon(cfg);
    detail::require_checkpoints(cfg, horizon);
    if (!cfg.alpha0) throw ConfigSemanticError("alpha0: required for test");
    if (sched.gamma() != 1.0) throw ConfigSemanticError("schedule: the test needs gamma = 1");
    if (net.size() < 2) throw WrongRegime("the test needs at least two vertices");

    if (opts.dry_run) {
        std::cout << "test: config OK (dry run)\n";
        return 0;
    }

    Xoshiro256pp rng = Xoshiro256pp::stream(cfg.seed, 0);
    const Eigen::VectorXd z0 = cfg.z0.realize(net.size(), rng);
    const std::vector<Snapshot> snaps = simulate(net, es, sched, z0, horizon, cfg.checkpoints, rng);

    CsvWriter out(detail::output_file(opts, cfg, "test"), "rspnet test", cfg.config_hash,
                  cfg.seed);
    out.row({"n", "statistic", "dof", "p_value", "reject"});
    TestReport lastrep;
    for (const Snapshot& s : snaps) {
        lastrep = mean_field_test(s.state.nbar(), s.state.n, *cfg.alpha0, sched.c(), cfg.theta);
        out.row({csvfmt::fmt(s.state.n), csvfmt::fmt(lastrep.statistic), csvfmt::fmt(lastrep.dof),
                 csvfmt::fmt(lastrep.p_value), csvfmt::fmt(lastrep.reject)});
    }
    std::cout << "test: n=" << snaps.back().state.n << " statistic=" << lastrep.statistic
              << " p=" << lastrep.p_value << (lastrep.reject ? " reject" : " no reject") << "\n";
    return 0;
}

// finite-n lemma sums against their closed forms
inline int cmd_lemma_oracle(const CliOptions& opts) {
    const RunConfig cfg = load_config(opts.config_path, opts.seed_override);
    const RateSchedule sched = cfg.build_schedule();
    if (sched.gamma() != 1.0) throw ConfigSemanticError("schedule: lemma oracles need gamma = 1");

    std::vector<LemmaProbe> probes = cfg.probes;
    if (probes.empty()) {
        const cplx q{0.75, 0.0};
        const cplx h{0.5, 0.0};
        const std::uint64_t n = 1000000;
        probes = {{0, q, q, n}, {1, q, q, n}, {2, q, q, n}, {0, h, h, n}, {0, {0.5, 1.0}, h, n}};
    }

    if (opts.dry_run) {
        std::cout << "lemma-oracle: config OK (dry run)\n";
        return 0;
    }

    CsvWriter out(detail::output_file(opts, cfg, "lemma-oracle"), "rspnet lemma-oracle",
                  cfg.config_hash, cfg.seed);
    out.row({"e", "x", "y", "n", "finite", "closed", "abs_err", "rel_err"});
    double worst = 0;
    for (const LemmaProbe& p : probes) {
        const double gap = sched.c() * (p.x.real() + p.y.real()) - 1.0;
        LimitSum ls;
        if (std::abs(gap) <= 1e-9) {
            if (p.e != 0) throw RegimeViolation("boundary probes support e = 0 only");
            ls = limit_sum_log(p.x, p.y, sched, p.n);
        } else {
            ls = limit_sum(p.e, p.x, p.y, sched, p.n);
        }
        worst = std::max(worst, ls.relative_error());
        out.row({csvfmt::fmt(p.e), csvfmt::fmt(p.x), csvfmt::fmt(p.y), csvfmt::fmt(p.n),
                 csvfmt::fmt(ls.finite_value), csvfmt::fmt(ls.closed_form),
                 csvfmt::fmt(ls.absolute_error()), csvfmt::fmt(ls.relative_error())});
    }
    std::cout << "lemma-oracle: " << probes.size() << " probes, worst relative error " << worst
              << "\n";
    return 0;
}

inline int dispatch(const std::string& cmd, const CliOptions& opts) {
    try {
        if (cmd == "analyze") return cmd_analyze(opts);
        if (cmd == "simulate") return cmd_simulate(opts);
        if (cmd == "mc") return cmd_mc(opts);
        if (cmd == "ci") return cmd_ci(opts);
        if (cmd == "test") return cmd_test(opts);
        if (cmd == "lemma-oracle") return cmd_lemma_oracle(opts);
        throw ConfigSemanticError("unknown subcommand " + cmd);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 5;
    }
}

}

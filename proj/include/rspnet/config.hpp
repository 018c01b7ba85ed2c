#pragma once

// JSON run configuration: parse-then-validate, key-path diagnostics, FNV-1a
// hash of the canonical effective config for CSV provenance lines

#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "rspnet/errors.hpp"
#include "rspnet/graph.hpp"
#include "rspnet/montecarlo.hpp"
#include "rspnet/schedule.hpp"

namespace rspnet {

enum class ExperimentKind { Synchronization, CltCovariance, CiCoverage, TestSize, TestPower };

inline const char* experiment_name(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::Synchronization: return "synchronization";
        case ExperimentKind::CltCovariance: return "clt_covariance";
        case ExperimentKind::CiCoverage: return "ci_coverage";
        case ExperimentKind::TestSize: return "test_size";
        default: return "test_power";
    }
}

struct LemmaProbe {
    int e = 0;
    std::complex<double> x;
    std::complex<double> y;
    std::uint64_t n = 0;
};

namespace detail {

using json = nlohmann::json;

[[noreturn]] inline void bad_key(const std::string& path, const std::string& what,
                                 const json* got = nullptr) {
    std::string msg = path + ": " + what;
    if (got != nullptr) msg += " (got " + got->dump() + ")";
    throw ConfigSemanticError(msg);
}

inline double num_at(const json& j, const std::string& path) {
    if (!j.is_number()) bad_key(path, "expected a number", &j);
    return j.get<double>();
}

inline std::uint64_t uint_at(const json& j, const std::string& path) {
    if (j.is_number_unsigned()) return j.get<std::uint64_t>();
    if (j.is_number_integer() && j.get<std::int64_t>() >= 0)
        return std::uint64_t(j.get<std::int64_t>());
    if (j.is_number_float()) {
        const double v = j.get<double>();
        if (v >= 0 && v <= 9007199254740992.0 && v == std::floor(v)) return std::uint64_t(v);
    }
    bad_key(path, "expected a nonnegative integer", &j);
}

inline std::complex<double> complex_at(const json& j, const std::string& path) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
        return {j[0].get<double>(), j[1].get<double>()};
    bad_key(path, "expected a number or [re, im] pair", &j);
}

inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace detail

struct RunConfig {
    // network: exactly one of the two
    std::optional<Eigen::MatrixXd> matrix;
    std::optional<std::pair<Eigen::Index, double>> mean_field;  // (n, alpha)

    // schedule: exactly one of the two
    std::optional<std::pair<double, double>> polya;  // (a, b)
    std::optional<std::pair<double, double>> power;  // (c, gamma)

    Z0Spec z0;
    std::optional<std::uint64_t> horizon;
    std::vector<std::uint64_t> checkpoints;
    std::uint64_t seed = 0;
    std::optional<std::uint64_t> replications;
    double theta = 0.05;
    std::optional<ExperimentKind> experiment;
    std::optional<double> alpha0;
    std::optional<double> alpha_true;
    std::optional<Eigen::VectorXd> a_vector;
    CiBasis ci_basis = CiBasis::NTilde;
    double sync_threshold = 0.05;
    std::optional<std::string> output_path;
    std::vector<LemmaProbe> probes;

    std::uint64_t config_hash = 0;

    WeightedNetwork build_network() const {
        if (mean_field)
            return mean_field_network(mean_field->first, mean_field->second);
        if (matrix) return WeightedNetwork::validate(*matrix);
        throw ConfigSemanticError("network: required for this command");
    }

    RateSchedule build_schedule() const {
        if (polya) return RateSchedule::polya(polya->first, polya->second);
        if (power) return RateSchedule::power(power->first, power->second);
        throw ConfigSemanticError("schedule: required for this command");
    }
};

inline RunConfig parse_config(const std::string& text,
                              std::optional<std::uint64_t> seed_override = {}) {
    using detail::bad_key;
    using detail::json;

    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigParseError(e.what());
    }
    if (!root.is_object()) throw ConfigParseError("top level must be an object");

    static const char* known[] = {"network",   "schedule",   "z0",         "horizon",
                                  "checkpoints", "seed",     "replications", "theta",
                                  "experiment", "alpha0",    "alpha_true", "a_vector",
                                  "ci_basis",  "sync_threshold", "output_path", "probes"};
    for (auto it = root.begin(); it != root.end(); ++it) {
        bool ok = false;
        for (const char* k : known) ok = ok || it.key() == k;
        if (!ok) bad_key(it.key(), "unknown key");
    }

    RunConfig cfg;

    if (root.contains("network")) {
        const json& net = root["network"];
        if (!net.is_object()) bad_key("network", "expected an object", &net);
        if (net.contains("mean_field") == net.contains("matrix"))
            bad_key("network", "exactly one of mean_field or matrix required");
        if (net.contains("mean_field")) {
            const json& mf = net["mean_field"];
            if (!mf.is_object() || !mf.contains("n") || !mf.contains("alpha"))
                bad_key("network.mean_field", "expected {n, alpha}", &mf);
            const std::uint64_t n = detail::uint_at(mf["n"], "network.mean_field.n");
            if (n < 2 || n > 4096) bad_key("network.mean_field.n", "must lie in [2, 4096]", &mf["n"]);
            const double alpha = detail::num_at(mf["alpha"], "network.mean_field.alpha");
            if (!(alpha > 0.0 && alpha <= 1.0))
                bad_key("network.mean_field.alpha", "must lie in (0, 1]", &mf["alpha"]);
            cfg.mean_field = {Eigen::Index(n), alpha};
        } else {
            const json& m = net["matrix"];
            if (!m.is_array() || m.empty()) bad_key("network.matrix", "expected a nonempty array");
            const std::size_t n = m.size();
            Eigen::MatrixXd w(n, n);
            for (std::size_t i = 0; i < n; ++i) {
                if (!m[i].is_array() || m[i].size() != n)
                    bad_key("network.matrix", "must be square");
                for (std::size_t j = 0; j < n; ++j)
                    w(Eigen::Index(i), Eigen::Index(j)) =
                        detail::num_at(m[i][j], "network.matrix[" + std::to_string(i) + "][" +
                                                    std::to_string(j) + "]");
            }
            cfg.matrix = std::move(w);
        }
    }

    if (root.contains("schedule")) {
        const json& s = root["schedule"];
        if (!s.is_object()) bad_key("schedule", "expected an object", &s);
        if (s.contains("polya") == s.contains("power"))
            bad_key("schedule", "exactly one of polya or power required");
        if (s.contains("polya")) {
            const json& p = s["polya"];
            if (!p.is_object() || !p.contains("a") || !p.contains("b"))
                bad_key("schedule.polya", "expected {a, b}", &p);
            cfg.polya = {detail::num_at(p["a"], "schedule.polya.a"),
                         detail::num_at(p["b"], "schedule.polya.b")};
        } else {
            const json& p = s["power"];
            if (!p.is_object() || !p.contains("c") || !p.contains("gamma"))
                bad_key("schedule.power", "expected {c, gamma}", &p);
            cfg.power = {detail::num_at(p["c"], "schedule.power.c"),
                         detail::num_at(p["gamma"], "schedule.power.gamma")};
        }
    }

    if (root.contains("z0")) {
        const json& z = root["z0"];
        if (z.is_string() && z.get<std::string>() == "uniform") {
            cfg.z0.kind = Z0Kind::Uniform;
        } else if (z.is_number()) {
            cfg.z0.kind = Z0Kind::Scalar;
            cfg.z0.scalar = z.get<double>();
            if (cfg.z0.scalar < 0.0 || cfg.z0.scalar > 1.0)
                bad_key("z0", "must lie in [0, 1]", &z);
        } else if (z.is_array()) {
            cfg.z0.kind = Z0Kind::Vector;
            cfg.z0.vector.resize(Eigen::Index(z.size()));
            for (std::size_t j = 0; j < z.size(); ++j) {
                const double v = detail::num_at(z[j], "z0[" + std::to_string(j) + "]");
                if (v < 0.0 || v > 1.0) bad_key("z0[" + std::to_string(j) + "]",
                                                "must lie in [0, 1]", &z[j]);
                cfg.z0.vector(Eigen::Index(j)) = v;
            }
        } else {
            bad_key("z0", "expected a number, array or \"uniform\"", &z);
        }
    }

    if (root.contains("horizon")) cfg.horizon = detail::uint_at(root["horizon"], "horizon");

    if (root.contains("checkpoints")) {
        const json& cps = root["checkpoints"];
        if (!cps.is_array() || cps.empty()) bad_key("checkpoints", "expected a nonempty array");
        for (std::size_t i = 0; i < cps.size(); ++i) {
            const std::uint64_t v =
                detail::uint_at(cps[i], "checkpoints[" + std::to_string(i) + "]");
            if (!cfg.checkpoints.empty() && v <= cfg.checkpoints.back())
                bad_key("checkpoints", "must be strictly increasing");
            cfg.checkpoints.push_back(v);
        }
    }

    if (root.contains("seed")) cfg.seed = detail::uint_at(root["seed"], "seed");
    if (seed_override) cfg.seed = *seed_override;

    if (root.contains("replications"))
        cfg.replications = detail::uint_at(root["replications"], "replications");

    if (root.contains("theta")) {
        cfg.theta = detail::num_at(root["theta"], "theta");
        if (!(cfg.theta > 0.0 && cfg.theta < 1.0)) bad_key("theta", "must lie in (0, 1)",
                                                           &root["theta"]);
    }

    if (root.contains("experiment")) {
        const json& e = root["experiment"];
        if (!e.is_string()) bad_key("experiment", "expected a string", &e);
        const std::string name = e.get<std::string>();
        if (name == "synchronization") cfg.experiment = ExperimentKind::Synchronization;
        else if (name == "clt_covariance") cfg.experiment = ExperimentKind::CltCovariance;
        else if (name == "ci_coverage") cfg.experiment = ExperimentKind::CiCoverage;
        else if (name == "test_size") cfg.experiment = ExperimentKind::TestSize;
        else if (name == "test_power") cfg.experiment = ExperimentKind::TestPower;
        else bad_key("experiment", "unknown experiment kind", &e);
    }

    if (root.contains("alpha0")) {
        cfg.alpha0 = detail::num_at(root["alpha0"], "alpha0");
        if (!(*cfg.alpha0 > 0.0 && *cfg.alpha0 <= 1.0))
            bad_key("alpha0", "must lie in (0, 1]", &root["alpha0"]);
    }
    if (root.contains("alpha_true")) {
        cfg.alpha_true = detail::num_at(root["alpha_true"], "alpha_true");
        if (!(*cfg.alpha_true > 0.0 && *cfg.alpha_true <= 1.0))
            bad_key("alpha_true", "must lie in (0, 1]", &root["alpha_true"]);
    }

    if (root.contains("a_vector")) {
        const json& a = root["a_vector"];
        if (!a.is_array() || a.empty()) bad_key("a_vector", "expected a nonempty array");
        Eigen::VectorXd v(Eigen::Index(a.size()));
        for (std::size_t j = 0; j < a.size(); ++j)
            v(Eigen::Index(j)) = detail::num_at(a[j], "a_vector[" + std::to_string(j) + "]");
        cfg.a_vector = std::move(v);
    }

    if (root.contains("ci_basis")) {
        const json& b = root["ci_basis"];
        if (!b.is_string()) bad_key("ci_basis", "expected a string", &b);
        const std::string name = b.get<std::string>();
        if (name == "ztilde") cfg.ci_basis = CiBasis::ZTilde;
        else if (name == "ntilde") cfg.ci_basis = CiBasis::NTilde;
        else if (name == "aweighted") cfg.ci_basis = CiBasis::AWeighted;
        else bad_key("ci_basis", "expected ztilde, ntilde or aweighted", &b);
    }

    if (root.contains("sync_threshold")) {
        cfg.sync_threshold = detail::num_at(root["sync_threshold"], "sync_threshold");
        if (!(cfg.sync_threshold > 0.0)) bad_key("sync_threshold", "must be positive",
                                                 &root["sync_threshold"]);
    }

    if (root.contains("output_path")) {
        const json& o = root["output_path"];
        if (!o.is_string()) bad_key("output_path", "expected a string", &o);
        cfg.output_path = o.get<std::string>();
    }

    if (root.contains("probes")) {
        const json& ps = root["probes"];
        if (!ps.is_array() || ps.empty()) bad_key("probes", "expected a nonempty array");
        for (std::size_t i = 0; i < ps.size(); ++i) {
            const std::string path = "probes[" + std::to_string(i) + "]";
            const json& p = ps[i];
            if (!p.is_object() || !p.contains("e") || !p.contains("x") || !p.contains("y") ||
                !p.contains("n"))
                bad_key(path, "expected {e, x, y, n}", &p);
            LemmaProbe probe;
            probe.e = int(detail::uint_at(p["e"], path + ".e"));
            if (probe.e > 2) bad_key(path + ".e", "must be 0, 1 or 2", &p["e"]);
            probe.x = detail::complex_at(p["x"], path + ".x");
            probe.y = detail::complex_at(p["y"], path + ".y");
            probe.n = detail::uint_at(p["n"], path + ".n");
            if (probe.n < 10) bad_key(path + ".n", "must be at least 10", &p["n"]);
            cfg.probes.push_back(probe);
        }
    }

    // canonical effective config: re-parse with the override folded in so the
    // hash identifies what actually ran
    json canonical = root;
    canonical["seed"] = cfg.seed;
    cfg.config_hash = detail::fnv1a64(canonical.dump());
    return cfg;
}

inline RunConfig load_config(const std::string& path,
                             std::optional<std::uint64_t> seed_override = {}) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read config file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), seed_override);
}

// canonical text form; parse(serialize(cfg)) is equivalent to cfg and
// serialize is a fixed point after one round
inline std::string serialize_config(const RunConfig& cfg) {
    detail::json root = detail::json::object();

    if (cfg.mean_field) {
        root["network"]["mean_field"] = {{"n", std::int64_t(cfg.mean_field->first)},
                                         {"alpha", cfg.mean_field->second}};
    } else if (cfg.matrix) {
        detail::json rows = detail::json::array();
        for (Eigen::Index i = 0; i < cfg.matrix->rows(); ++i) {
            detail::json row = detail::json::array();
            for (Eigen::Index j = 0; j < cfg.matrix->cols(); ++j)
                row.push_back((*cfg.matrix)(i, j));
            rows.push_back(row);
        }
        root["network"]["matrix"] = rows;
    }

    if (cfg.polya)
        root["schedule"]["polya"] = {{"a", cfg.polya->first}, {"b", cfg.polya->second}};
    else if (cfg.power)
        root["schedule"]["power"] = {{"c", cfg.power->first}, {"gamma", cfg.power->second}};

    switch (cfg.z0.kind) {
        case Z0Kind::Scalar: root["z0"] = cfg.z0.scalar; break;
        case Z0Kind::Vector: {
            detail::json v = detail::json::array();
            for (Eigen::Index j = 0; j < cfg.z0.vector.size(); ++j)
                v.push_back(cfg.z0.vector(j));
            root["z0"] = v;
            break;
        }
        default: root["z0"] = "uniform";
    }

    if (cfg.horizon) root["horizon"] = *cfg.horizon;
    if (!cfg.checkpoints.empty()) root["checkpoints"] = cfg.checkpoints;
    root["seed"] = cfg.seed;
    if (cfg.replications) root["replications"] = *cfg.replications;
    root["theta"] = cfg.theta;
    if (cfg.experiment) root["experiment"] = experiment_name(*cfg.experiment);
    if (cfg.alpha0) root["alpha0"] = *cfg.alpha0;
    if (cfg.alpha_true) root["alpha_true"] = *cfg.alpha_true;
    if (cfg.a_vector) {
        detail::json v = detail::json::array();
        for (Eigen::Index j = 0; j < cfg.a_vector->size(); ++j) v.push_back((*cfg.a_vector)(j));
        root["a_vector"] = v;
    }
    root["ci_basis"] = ci_basis_name(cfg.ci_basis);
    root["sync_threshold"] = cfg.sync_threshold;
    if (cfg.output_path) root["output_path"] = *cfg.output_path;
    if (!cfg.probes.empty()) {
        detail::json ps = detail::json::array();
        for (const LemmaProbe& p : cfg.probes)
            ps.push_back({{"e", p.e},
                          {"x", {p.x.real(), p.x.imag()}},
                          {"y", {p.y.real(), p.y.imag()}},
                          {"n", p.n}});
        root["probes"] = ps;
    }
    return root.dump(2) + "\n";
}

}

// rspnet command line front end

#include <cstdint>
#include <string>

#include <CLI11.hpp>

#include "rspnet/commands.hpp"
#include "rspnet/version.hpp"

int main(int argc, char** argv) {
    CLI::App app{"simulation and inference toolkit for interacting reinforced processes"};
    app.set_version_flag("--version", std::string(rspnet::version));
    app.require_subcommand(1);

    rspnet::CliOptions opts;
    std::uint64_t seed = 0;

    const char* names[] = {"analyze", "simulate", "mc", "ci", "test", "lemma-oracle"};
    const char* blurbs[] = {"spectral and covariance report for a network",
                            "run one trajectory and record checkpoints",
                            "replicated Monte Carlo experiments",
                            "confidence intervals along one trajectory",
                            "mean-field chi-square test along one trajectory",
                            "finite-n limit sums against their closed forms"};
    for (int i = 0; i < 6; ++i) {
        CLI::App* sub = app.add_subcommand(names[i], blurbs[i]);
        sub->add_option("--config", opts.config_path, "path to the run configuration")
            ->required();
        sub->add_option("--out", opts.out_dir, "output directory")->capture_default_str();
        sub->add_option("--seed", seed, "override the config master seed")
            ->check(CLI::NonNegativeNumber);
        sub->add_option("--threads", opts.threads, "worker threads for mc")
            ->check(CLI::Range(1u, 256u))
            ->capture_default_str();
        sub->add_flag("--dry-run", opts.dry_run, "validate the config without running");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    CLI::App* sub = app.get_subcommands().front();
    if (sub->count("--seed") > 0) opts.seed_override = seed;
    return rspnet::dispatch(sub->get_name(), opts);
}

#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "impent/impent.hpp"

namespace {

int cmd_run(const std::string& path, const std::string& out, std::optional<std::uint64_t> seed, std::size_t threads) {
    impent::ExperimentConfig cfg;
    try {
        cfg = impent::load_config(path);
        if (seed) cfg.seed = *seed;
    } catch (const impent::invalid_input& e) {
        std::cerr << path << ": " << e.what() << "\n";
        return 2;
    }
    const auto t0 = std::chrono::steady_clock::now();
    impent::RunResult r;
    try {
        r = impent::run_suite(cfg, threads);
    } catch (const impent::invalid_input& e) {
        std::cerr << path << ": " << e.what() << "\n";
        return 2;
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    r.timings.emplace_back("total", wall);
    const auto w = impent::write_report(cfg, r, out.empty() ? cfg.output_dir : out);

    for (const auto& c : r.checks) std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
    for (const auto& f : r.flags) std::cout << "FLAG " << f << "\n";
    if (r.skipped) std::cout << "SKIPPED " << r.skip_reason << "\n";
    if (r.table) {
        const auto& e = r.table->estimates;
        std::printf("h_bar_r %.6f  h_bar_s %.6f  h_hat_r %.6f  h_hat_s %.6f  h_r %.6f  h_s %.6f\n", e.h_bar_r, e.h_bar_s,
                    e.h_hat_r, e.h_hat_s, e.h_r, e.h_s);
    }
    std::cout << "wrote " << w.csv.string() << ", " << w.summary.string() << "\n";
    std::fprintf(stderr, "%s finished in %.2f s\n", cfg.name.c_str(), wall);
    return r.exit_code();
}

int cmd_validate(const std::string& path) {
    try {
        const auto cfg = impent::load_config(path);
        std::cout << path << ": ok (" << cfg.name << ", suite " << impent::to_string(cfg.suite) << ", system "
                  << cfg.system.catalog << ")\n";
        return 0;
    } catch (const impent::invalid_input& e) {
        std::cerr << path << ": " << e.what() << "\n";
        return 2;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"impent: entropy estimators for continuous and impulsive semiflows"};
    app.require_subcommand(1);

    std::string config, out;
    std::optional<std::uint64_t> seed;
    std::size_t threads = 0;
    auto* run = app.add_subcommand("run", "run the suite selected by a config");
    run->add_option("config", config, "experiment config (JSON)")->required();
    run->add_option("--out", out, "output directory (default: the config's output.dir)");
    run->add_option("--seed", seed, "override the sample seed");
    run->add_option("--threads", threads, "worker threads (default: IMPENT_THREADS, else all cores)");

    auto* cat = app.add_subcommand("catalog", "list built-in systems");

    std::string vconfig;
    auto* val = app.add_subcommand("validate", "parse and validate a config without running it");
    val->add_option("config", vconfig, "experiment config (JSON)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (*run) return cmd_run(config, out, seed, threads ? threads : impent::default_threads());
        if (*cat) {
            for (const auto& e : impent::catalog_entries()) std::printf("%-22s %s\n", e.name, e.summary);
            std::printf("%-22s %s\n", "ode", "user vector field: circle_nonuniform, torus_linear, interval_logistic");
            return 0;
        }
        if (*val) return cmd_validate(vconfig);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

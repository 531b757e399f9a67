// amqw: spectra, analytic bands, walks, effective models and sweeps of the
// two-boson atom-molecule Hubbard ring, driven by a JSON config.
//
//   amqw --config run.json [--set params.g=4] [--out dir] [--jobs N] [--check]

#include <chrono>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "amqw/cli.hpp"

namespace cli = amqw::cli;

int main(int argc, char** argv)
{
    CLI::App app{"Two-boson atom-molecule Hubbard ring simulator"};
    app.set_version_flag("--version", std::string(cli::version));

    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir;
    unsigned jobs = 1;
    bool check_only = false;
    app.add_option("-c,--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    app.add_option("-s,--set", overrides, "Override a config entry, e.g. params.g=4 (repeatable)");
    app.add_option("-o,--out", out_dir, "Output directory (overrides the config's output)");
    app.add_option("-j,--jobs", jobs, "Worker threads for sweeps (0 = hardware concurrency)");
    app.add_flag("--check", check_only, "Validate the config and exit");
    CLI11_PARSE(app, argc, argv);

    cli::json cfg = cli::json::object();
    try {
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            cfg = cli::json::parse(in);
        }
        for (const auto& o : overrides)
            cli::apply_override(cfg, o);
        if (!out_dir.empty())
            cfg["output"] = out_dir;
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return cli::ConfigFailure;
    }

    const auto issues = cli::validate(cfg);
    for (const auto& i : issues)
        std::cerr << "config error: " << i << '\n';
    if (!issues.empty())
        return cli::ConfigFailure;
    if (check_only) {
        std::cout << "config ok\n";
        return cli::Ok;
    }
    if (jobs == 0)
        jobs = std::max(1u, std::thread::hardware_concurrency());

    const auto start = std::chrono::steady_clock::now();
    try {
        const cli::RunConfig rc = cli::parse(cfg);
        const cli::RunReport report = cli::run(rc, jobs);
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        cli::write_meta(rc, report, wall);
        for (const auto& f : report.files)
            std::cout << (rc.output / f).string() << '\n';
        if (report.summary.contains("warnings"))
            for (const auto& w : report.summary["warnings"])
                std::cerr << "warning: " << w.get<std::string>() << '\n';
    } catch (const cli::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return cli::ConfigFailure;
    } catch (const amqw::InvalidArgument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return cli::ConfigFailure;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return cli::NumericalFailure;
    }
    return cli::Ok;
}

#include "commands.hpp"
#include "config.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;

int main(int argc, char** argv) {
    CLI::App app{"kamred: reducibility of quasi-periodic sl(2,R) cocycles "
                 "(KAM reduction, arithmetic conditions, rotation numbers, counterexamples)"};
    app.require_subcommand(0, 1);

    std::string config_path, out_dir = "out";
    unsigned seed = 12345;
    app.add_option("--config", config_path, "experiment config file")->required();
    app.add_option("--out", out_dir, "output directory (default: out)");
    app.add_option("--seed", seed, "seed for randomized residual grids");

    // subcommand names override the command key in the config
    std::vector<std::string> names = {"psi-scan", "conditions", "reduce",
                                      "rotation", "lyapunov", "counterexample"};
    for (const auto& n : names)
        app.add_subcommand(n, "run the " + n + " experiment")->fallthrough();

    CLI11_PARSE(app, argc, argv);

    std::string override_cmd;
    for (auto* sub : app.get_subcommands())
        override_cmd = sub->get_name();

    kamred::cli::ojson report;
    int status = 0;
    try {
        kamred::cli::Config cfg = kamred::cli::Config::parse_file(config_path);
        if (!override_cmd.empty())
            cfg.command = override_cmd;
        if (cfg.command.empty())
            throw kamred::cli::ConfigError("no command given (config key 'command' or a subcommand)");
        kamred::cli::RunContext ctx{out_dir, seed};
        report = kamred::cli::run_experiment(cfg, ctx);
    } catch (const kamred::cli::ConfigError& e) {
        report["error"] = {{"type", "config"}, {"message", e.what()}};
        status = 2;
    } catch (const std::exception& e) {
        report["error"] = {{"type", "runtime"}, {"message", e.what()}};
        status = 1;
    }

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    std::ofstream out(fs::path(out_dir) / "report.json");
    out << report.dump(2) << "\n";
    out.close();
    if (status != 0)
        std::cerr << report.dump(2) << "\n";
    else
        std::cout << "report written to " << (fs::path(out_dir) / "report.json").string() << "\n";
    return status;
}

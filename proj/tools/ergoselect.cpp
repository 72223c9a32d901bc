// ergoselect <command> --config <path> [--out <dir>] [--workers <k>]
//
// Commands are the experiment names; the config's experiment.name must match
// unless the command is "run" (which takes the name from the config).

#include "ergoselect/experiments.hpp"

#include "CLI11.hpp"

#include <cstdlib>
#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"ergoselect: discounted selection experiments for degenerate viscous "
                 "Hamilton-Jacobi equations on the torus"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    int workers = 0;

    const std::vector<std::string> names = {"run",        "solve",     "ergodic",  "vv-gap",
                                            "adjoint",    "mather",    "regularize", "select",
                                            "theorem-a",  "theorem-b", "theorem-c"};
    for (const auto& name : names) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON run configuration")->required();
        sub->add_option("--out", out_dir, "output directory (overrides config)");
        sub->add_option("--workers", workers, "worker count (config takes precedence)");
    }

    CLI11_PARSE(app, argc, argv);
    const std::string command = app.get_subcommands().front()->get_name();

    try {
        ergoselect::RunConfig cfg = ergoselect::parse_config(config_path);
        if (command != "run" && command != cfg.experiment.name) {
            std::cerr << "config error: experiment.name '" << cfg.experiment.name
                      << "' does not match command '" << command << "'\n";
            return ergoselect::kExitConfig;
        }
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        // worker precedence: config > --workers > environment > 1
        if (cfg.workers <= 1) {
            if (workers > 0) cfg.workers = workers;
            else if (const char* env = std::getenv("ERGOSELECT_WORKERS")) cfg.workers = std::atoi(env);
            if (cfg.workers < 1) cfg.workers = 1;
        }
        return ergoselect::run_experiment(cfg, std::cout);
    } catch (const ergoselect::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return ergoselect::kExitConfig;
    } catch (const ergoselect::AssumptionViolation& e) {
        std::cerr << e.what() << "\n";
        return ergoselect::kExitConfig;
    } catch (const ergoselect::NonConvergence& e) {
        std::cerr << e.what() << "\n";
        return ergoselect::kExitSolver;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return ergoselect::kExitCertificate;
    }
}

#pragma once

// JSON run configuration: strict parsing (unknown keys rejected), model
// validation, default filling, and the round-trippable echo.

#include "ergoselect/io.hpp"
#include "ergoselect/solver.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ergoselect {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitSolver = 3;
inline constexpr int kExitCertificate = 4;

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct ExperimentParams {
    std::string name;
    double lambda = 0.01;
    double eta = 0.0;
    std::vector<double> lambda_seq;
    std::vector<double> eta_seq;
    std::vector<double> x0;          // axis-0 coordinates of Dirac sources
    double tol = 1e-8;
    int max_iter = 100;
    double lambda_ceiling = 0.5;
    unsigned seed = 20250810;
    int max_mode = 3;
    std::optional<double> c_h;       // absent: estimate (or oracle for 1D first-order)
    bool richardson = false;
    int n_representatives = 8;
    std::string eta_rule = "default";  // per-experiment default | "zero" | "square"
    double slack_c = 5.0;            // slack = slack_c * (h + lambda_min + eta)
    std::vector<double> reg_eta = {0.2, 0.1, 0.05};
};

struct RunConfig {
    HamiltonianSpec hamiltonian;
    DiffusionSpec diffusion;
    DiscountSpec discount;
    PotentialSpec potential;
    PeriodicGrid grid;
    ExperimentParams experiment;
    std::filesystem::path out_dir = "run";
    std::vector<std::string> formats = {"csv", "json"};
    int workers = 1;

    nlohmann::json echo;  // normalized config with defaults filled
};

RunConfig parse_config(const std::filesystem::path& path);
RunConfig parse_config_json(const nlohmann::json& j);
nlohmann::json emit_config(const RunConfig& config);

ProblemSpec make_problem(const RunConfig& config);

}  // namespace ergoselect

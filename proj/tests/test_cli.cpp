#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ergoselect/experiments.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace ergoselect;
namespace fs = std::filesystem;

namespace {

nlohmann::json minimal_config(const std::string& name, const std::string& out) {
    nlohmann::json j;
    j["model"]["hamiltonian"] = {{"family", "mechanical"},
                                 {"potential", {{"offset", 0.0},
                                                {"terms", {{{"axis", 0}, {"amplitude", 1.0},
                                                            {"frequency", 2}, {"phase", 0.0}}}}}}};
    j["model"]["diffusion"] = {{"axes", {{{"family", "zero"}}}}};
    j["model"]["discount"] = {{"family", "linear"}};
    j["model"]["potential"] = {{"type", "zero"}};
    j["grid"] = {{"dim", 1}, {"n", 128}};
    j["experiment"] = {{"name", name}, {"lambda", 0.01}, {"c_h", 1.0}};
    j["output"] = {{"dir", out}};
    return j;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace

TEST_CASE("parse_config fills defaults and echoes them") {
    auto cfg = parse_config_json(minimal_config("solve", "run"));
    CHECK(cfg.experiment.tol == 1e-8);
    CHECK(cfg.experiment.eta == 0.0);
    CHECK(cfg.experiment.lambda_ceiling == 0.5);
    CHECK(cfg.grid.n_per_axis == 128);
    CHECK(cfg.echo["experiment"]["tol"] == 1e-8);
}

TEST_CASE("parse_config round trip") {
    auto cfg = parse_config_json(minimal_config("solve", "run"));
    auto cfg2 = parse_config_json(emit_config(cfg));
    CHECK(emit_config(cfg2) == emit_config(cfg));
}

TEST_CASE("schema violations are rejected with named fields") {
    auto good = minimal_config("solve", "run");

    auto bad = good;
    bad["experiment"]["lambda"] = -0.1;
    CHECK_THROWS_WITH_AS(parse_config_json(bad), doctest::Contains("lambda"), ConfigError);

    bad = good;
    bad["unknown_block"] = 1;
    CHECK_THROWS_WITH_AS(parse_config_json(bad), doctest::Contains("unknown_block"), ConfigError);

    bad = good;
    bad["experiment"]["typo_key"] = true;
    CHECK_THROWS_WITH_AS(parse_config_json(bad), doctest::Contains("typo_key"), ConfigError);

    bad = good;
    bad["experiment"]["name"] = "not-an-experiment";
    CHECK_THROWS_AS(parse_config_json(bad), ConfigError);

    bad = good;
    bad["experiment"]["lambda"] = 0.9;  // above the default ceiling: refused before solve
    CHECK_THROWS_WITH_AS(parse_config_json(bad), doctest::Contains("ceiling"), ConfigError);

    // ExpSpatial sigma crossing zero fails the model validators
    bad = good;
    bad["model"]["discount"] = {{"family", "exp_spatial"},
                                {"sigma", {{"offset", 0.5},
                                           {"terms", {{{"axis", 0}, {"amplitude", 1.0},
                                                       {"frequency", 1}, {"phase", 0.0}}}}}}};
    CHECK_THROWS_AS(parse_config_json(bad), ConfigError);

    bad = good;
    bad["experiment"]["lambda_seq"] = {0.01, 0.02};  // must be decreasing
    CHECK_THROWS_AS(parse_config_json(bad), ConfigError);
}

TEST_CASE("solve experiment writes a run directory with a complete manifest") {
    fs::path dir = fs::temp_directory_path() / "ergoselect_test_solve";
    fs::remove_all(dir);
    auto j = minimal_config("solve", dir.string());
    j["model"]["hamiltonian"]["potential"]["terms"] = nlohmann::json::array();  // W = 0
    j["experiment"]["c_h"] = 0.0;
    auto cfg = parse_config_json(j);
    std::ostringstream log;
    CHECK(run_experiment(cfg, log) == kExitOk);

    REQUIRE(fs::exists(dir / "manifest.json"));
    auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
    CHECK(manifest["status"] == "ok");
    CHECK(manifest["version"] == kToolVersion);

    // u.csv is all zeros for the trivial model
    GridField u = parse_grid_field_csv(slurp(dir / "u.csv"));
    CHECK(u.max_abs() <= 1e-10);

    // every file is inventoried with its content hash
    for (const auto& f : manifest["files"]) {
        fs::path fp = dir / f["name"].get<std::string>();
        REQUIRE(fs::exists(fp));
        CHECK(f["fnv1a64"].get<std::string>() == fnv1a64_hex(slurp(fp)));
    }
}

TEST_CASE("determinism: identical config and version produce identical CSV bytes") {
    fs::path a = fs::temp_directory_path() / "ergoselect_det_a";
    fs::path b = fs::temp_directory_path() / "ergoselect_det_b";
    fs::remove_all(a);
    fs::remove_all(b);
    auto ja = minimal_config("adjoint", a.string());
    ja["experiment"]["lambda"] = 0.02;
    ja["experiment"]["eta"] = 4e-4;
    ja["experiment"]["x0"] = {0.25};
    auto jb = ja;
    jb["output"]["dir"] = b.string();

    std::ostringstream log;
    REQUIRE(run_experiment(parse_config_json(ja), log) == kExitOk);
    REQUIRE(run_experiment(parse_config_json(jb), log) == kExitOk);
    CHECK(slurp(a / "sigma_0.csv") == slurp(b / "sigma_0.csv"));
    CHECK(!slurp(a / "sigma_0.csv").empty());
}

TEST_CASE("grid CSV round trip is bit exact") {
    PeriodicGrid g(1, 32);
    GridField f = GridField::from_function(g, [](const Vec2& x) {
        return std::sin(2.0 * M_PI * x[0]) * 1.0e-7 + 0.123456789012345678;
    });
    GridField back = parse_grid_field_csv(grid_field_csv(f, "u"));
    CHECK((back.values - f.values).abs().maxCoeff() == 0.0);
}

TEST_CASE("ergodic experiment reports c_H near 1 for the running example") {
    fs::path dir = fs::temp_directory_path() / "ergoselect_test_ergodic";
    fs::remove_all(dir);
    auto j = minimal_config("ergodic", dir.string());
    j["grid"]["n"] = 256;
    j["experiment"].erase("c_h");
    j["experiment"]["lambda_seq"] = {1e-2, 5e-3, 2.5e-3};
    j["experiment"]["tol"] = 1e-9;
    std::ostringstream log;
    CHECK(run_experiment(parse_config_json(j), log) == kExitOk);
    auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
    CHECK(std::abs(manifest["ergodic"]["c_h"].get<double>() - 1.0) <= 0.01);
}

TEST_CASE("theorem-c experiment writes the rate table and passes its certificates") {
    fs::path dir = fs::temp_directory_path() / "ergoselect_test_tc";
    fs::remove_all(dir);
    auto j = minimal_config("theorem-c", dir.string());
    j["grid"]["n"] = 512;
    j["experiment"].erase("c_h");
    j["experiment"]["lambda_seq"] = {0.05, 0.025, 0.0125, 0.00625};
    j["experiment"]["tol"] = 1e-9;
    std::ostringstream log;
    CHECK(run_experiment(parse_config_json(j), log) == kExitOk);
    auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
    CHECK(manifest["status"] == "ok");
    REQUIRE(fs::exists(dir / "rate.csv"));
    std::string rate = slurp(dir / "rate.csv");
    CHECK(rate.find("lambda,error,bound") == 0);
}

TEST_CASE("worker pool does not change the vv-gap table bytes") {
    fs::path a = fs::temp_directory_path() / "ergoselect_w1";
    fs::path b = fs::temp_directory_path() / "ergoselect_w2";
    fs::remove_all(a);
    fs::remove_all(b);
    auto ja = minimal_config("vv-gap", a.string());
    ja["experiment"]["lambda"] = 0.05;
    ja["experiment"]["eta_seq"] = {0.08, 0.04, 0.02};
    ja["experiment"]["tol"] = 1e-9;
    auto jb = ja;
    jb["output"]["dir"] = b.string();
    jb["workers"] = 2;
    std::ostringstream log;
    REQUIRE(run_experiment(parse_config_json(ja), log) == kExitOk);
    REQUIRE(run_experiment(parse_config_json(jb), log) == kExitOk);
    CHECK(slurp(a / "table.csv") == slurp(b / "table.csv"));
    CHECK(!slurp(a / "table.csv").empty());
}

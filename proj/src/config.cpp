#include "ergoselect/config.hpp"

#include <fstream>
#include <set>

namespace ergoselect {

using nlohmann::json;

namespace {

void require_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key())) throw ConfigError(where + ": unknown key '" + it.key() + "'");
}

double get_number(const json& j, const std::string& where) {
    if (!j.is_number()) throw ConfigError(where + ": expected a number");
    return j.get<double>();
}

CosineSum parse_cosine_sum(const json& j, const std::string& where, int dim) {
    require_keys(j, where, {"offset", "terms"});
    CosineSum c;
    if (j.contains("offset")) c.offset = get_number(j["offset"], where + ".offset");
    if (j.contains("terms")) {
        if (!j["terms"].is_array()) throw ConfigError(where + ".terms: expected an array");
        int t = 0;
        for (const auto& jt : j["terms"]) {
            const std::string wt = where + ".terms[" + std::to_string(t++) + "]";
            require_keys(jt, wt, {"axis", "amplitude", "frequency", "phase"});
            CosineTerm term;
            if (jt.contains("axis")) term.axis = jt["axis"].get<int>();
            if (term.axis < 0 || term.axis >= dim) throw ConfigError(wt + ".axis: out of range");
            if (jt.contains("amplitude")) term.amplitude = get_number(jt["amplitude"], wt + ".amplitude");
            if (jt.contains("frequency")) {
                if (!jt["frequency"].is_number_integer() || jt["frequency"].get<int>() < 1)
                    throw ConfigError(wt + ".frequency: expected a positive integer");
                term.frequency = jt["frequency"].get<int>();
            }
            if (jt.contains("phase")) term.phase = get_number(jt["phase"], wt + ".phase");
            c.terms.push_back(term);
        }
    }
    return c;
}

json emit_cosine_sum(const CosineSum& c) {
    json j;
    j["offset"] = c.offset;
    j["terms"] = json::array();
    for (const auto& t : c.terms)
        j["terms"].push_back({{"axis", t.axis},
                              {"amplitude", t.amplitude},
                              {"frequency", t.frequency},
                              {"phase", t.phase}});
    return j;
}

std::vector<double> parse_positive_sorted(const json& j, const std::string& where, bool decreasing) {
    if (!j.is_array() || j.empty()) throw ConfigError(where + ": expected a non-empty array");
    std::vector<double> out;
    for (const auto& v : j) {
        double x = get_number(v, where);
        if (!(x > 0.0)) throw ConfigError(where + ": entries must be strictly positive");
        out.push_back(x);
    }
    for (std::size_t i = 1; i < out.size(); ++i) {
        if (decreasing && !(out[i] < out[i - 1]))
            throw ConfigError(where + ": entries must be strictly decreasing");
        if (!decreasing && !(out[i] > out[i - 1]))
            throw ConfigError(where + ": entries must be strictly increasing");
    }
    return out;
}

}  // namespace

RunConfig parse_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return parse_config_json(j);
}

RunConfig parse_config_json(const json& j) {
    require_keys(j, "config", {"model", "grid", "experiment", "output", "workers"});
    RunConfig cfg;

    // grid
    if (!j.contains("grid")) throw ConfigError("config.grid: required");
    require_keys(j["grid"], "grid", {"dim", "n"});
    int dim = j["grid"].value("dim", 1);
    if (dim < 1 || dim > 2) throw ConfigError("grid.dim: must be 1 or 2");
    if (!j["grid"].contains("n")) throw ConfigError("grid.n: required");
    int n = j["grid"]["n"].get<int>();
    if (n < 8) throw ConfigError("grid.n: must be >= 8");
    cfg.grid = PeriodicGrid(dim, n);

    // model
    if (!j.contains("model")) throw ConfigError("config.model: required");
    require_keys(j["model"], "model", {"hamiltonian", "diffusion", "discount", "potential"});
    const json& jm = j["model"];

    if (!jm.contains("hamiltonian")) throw ConfigError("model.hamiltonian: required");
    require_keys(jm["hamiltonian"], "model.hamiltonian", {"family", "potential"});
    const std::string hfam = jm["hamiltonian"].value("family", "mechanical");
    if (hfam != "mechanical") throw ConfigError("model.hamiltonian.family: only 'mechanical' ships");
    cfg.hamiltonian = HamiltonianSpec::mechanical(
        jm["hamiltonian"].contains("potential")
            ? parse_cosine_sum(jm["hamiltonian"]["potential"], "model.hamiltonian.potential", dim)
            : CosineSum::constant(0.0));

    cfg.diffusion = DiffusionSpec::zero(dim);
    if (jm.contains("diffusion")) {
        require_keys(jm["diffusion"], "model.diffusion", {"axes"});
        if (jm["diffusion"].contains("axes")) {
            const json& ja = jm["diffusion"]["axes"];
            if (!ja.is_array() || int(ja.size()) != dim)
                throw ConfigError("model.diffusion.axes: expected one entry per axis");
            cfg.diffusion.axes.clear();
            int ax = 0;
            for (const auto& je : ja) {
                const std::string wax = "model.diffusion.axes[" + std::to_string(ax++) + "]";
                require_keys(je, wax, {"family", "theta", "k"});
                DiffusionAxis a;
                const std::string fam = je.value("family", "zero");
                if (fam == "zero") a.family = DiffusionFamily::Zero;
                else if (fam == "constant") a.family = DiffusionFamily::Constant;
                else if (fam == "sin2") a.family = DiffusionFamily::SinSq;
                else throw ConfigError(wax + ".family: unknown family '" + fam + "'");
                a.theta = je.value("theta", 0.0);
                a.k = je.value("k", 1);
                if (a.theta < 0.0) throw ConfigError(wax + ".theta: must be >= 0");
                cfg.diffusion.axes.push_back(a);
            }
        }
    }

    cfg.discount = DiscountSpec::linear();
    if (jm.contains("discount")) {
        require_keys(jm["discount"], "model.discount", {"family", "sigma"});
        const std::string fam = jm["discount"].value("family", "linear");
        CosineSum sigma = jm["discount"].contains("sigma")
                              ? parse_cosine_sum(jm["discount"]["sigma"], "model.discount.sigma", dim)
                              : CosineSum::constant(1.0);
        if (fam == "linear") cfg.discount = DiscountSpec::linear();
        else if (fam == "spatial_linear") cfg.discount = DiscountSpec::spatial_linear(sigma);
        else if (fam == "exp_spatial") cfg.discount = DiscountSpec::exp_spatial(sigma);
        else throw ConfigError("model.discount.family: unknown family '" + fam + "'");
    }

    cfg.potential = PotentialSpec::zero();
    if (jm.contains("potential")) {
        require_keys(jm["potential"], "model.potential", {"type", "form"});
        const std::string type = jm["potential"].value("type", "zero");
        if (type == "zero") cfg.potential = PotentialSpec::zero();
        else if (type == "closed_form")
            cfg.potential = PotentialSpec::closed_form(
                parse_cosine_sum(jm["potential"].value("form", json::object()), "model.potential.form", dim));
        else throw ConfigError("model.potential.type: unknown type '" + type + "'");
    }

    // experiment
    if (!j.contains("experiment")) throw ConfigError("config.experiment: required");
    const json& je = j["experiment"];
    require_keys(je, "experiment",
                 {"name", "lambda", "eta", "lambda_seq", "eta_seq", "x0", "tol", "max_iter",
                  "lambda_ceiling", "seed", "max_mode", "c_h", "richardson", "n_representatives",
                  "eta_rule", "slack_c", "reg_eta"});
    auto& ex = cfg.experiment;
    if (!je.contains("name")) throw ConfigError("experiment.name: required");
    ex.name = je["name"].get<std::string>();
    static const std::set<std::string> kNames = {"solve",      "ergodic",   "vv-gap",   "adjoint",
                                                 "mather",     "regularize", "select",  "theorem-a",
                                                 "theorem-b",  "theorem-c"};
    if (!kNames.count(ex.name)) throw ConfigError("experiment.name: unknown experiment '" + ex.name + "'");

    if (je.contains("lambda")) {
        ex.lambda = get_number(je["lambda"], "experiment.lambda");
        if (!(ex.lambda > 0.0)) throw ConfigError("experiment.lambda: must be > 0");
    }
    if (je.contains("eta")) {
        ex.eta = get_number(je["eta"], "experiment.eta");
        if (ex.eta < 0.0) throw ConfigError("experiment.eta: must be >= 0");
    }
    if (je.contains("lambda_seq"))
        ex.lambda_seq = parse_positive_sorted(je["lambda_seq"], "experiment.lambda_seq", true);
    if (je.contains("eta_seq"))
        ex.eta_seq = parse_positive_sorted(je["eta_seq"], "experiment.eta_seq", true);
    if (je.contains("x0")) {
        if (!je["x0"].is_array()) throw ConfigError("experiment.x0: expected an array");
        for (const auto& v : je["x0"]) {
            double x = get_number(v, "experiment.x0");
            if (x < 0.0 || x >= 1.0) throw ConfigError("experiment.x0: entries must lie in [0,1)");
            ex.x0.push_back(x);
        }
    }
    if (je.contains("tol")) {
        ex.tol = get_number(je["tol"], "experiment.tol");
        if (!(ex.tol > 0.0)) throw ConfigError("experiment.tol: must be > 0");
    }
    if (je.contains("max_iter")) ex.max_iter = je["max_iter"].get<int>();
    if (je.contains("lambda_ceiling"))
        ex.lambda_ceiling = get_number(je["lambda_ceiling"], "experiment.lambda_ceiling");
    if (je.contains("seed")) ex.seed = je["seed"].get<unsigned>();
    if (je.contains("max_mode")) {
        ex.max_mode = je["max_mode"].get<int>();
        if (ex.max_mode < 1) throw ConfigError("experiment.max_mode: must be >= 1");
    }
    if (je.contains("c_h")) {
        if (je["c_h"].is_string()) {
            if (je["c_h"].get<std::string>() != "estimate")
                throw ConfigError("experiment.c_h: expected a number or 'estimate'");
        } else {
            ex.c_h = get_number(je["c_h"], "experiment.c_h");
        }
    }
    if (je.contains("richardson")) ex.richardson = je["richardson"].get<bool>();
    if (je.contains("n_representatives")) ex.n_representatives = je["n_representatives"].get<int>();
    if (je.contains("eta_rule")) {
        ex.eta_rule = je["eta_rule"].get<std::string>();
        if (ex.eta_rule != "default" && ex.eta_rule != "zero" && ex.eta_rule != "square")
            throw ConfigError("experiment.eta_rule: expected 'default', 'zero' or 'square'");
    }
    if (je.contains("slack_c")) ex.slack_c = get_number(je["slack_c"], "experiment.slack_c");
    if (je.contains("reg_eta"))
        ex.reg_eta = parse_positive_sorted(je["reg_eta"], "experiment.reg_eta", true);

    if (ex.lambda > ex.lambda_ceiling)
        throw ConfigError("experiment.lambda: exceeds lambda_ceiling (refused before solve)");
    for (double lam : ex.lambda_seq)
        if (lam > ex.lambda_ceiling)
            throw ConfigError("experiment.lambda_seq: entry exceeds lambda_ceiling");

    // output
    if (j.contains("output")) {
        require_keys(j["output"], "output", {"dir", "formats"});
        if (j["output"].contains("dir")) cfg.out_dir = j["output"]["dir"].get<std::string>();
        if (j["output"].contains("formats")) {
            cfg.formats.clear();
            for (const auto& f : j["output"]["formats"]) {
                std::string s = f.get<std::string>();
                if (s != "csv" && s != "json") throw ConfigError("output.formats: unknown format '" + s + "'");
                cfg.formats.push_back(s);
            }
        }
    }
    if (j.contains("workers")) {
        cfg.workers = j["workers"].get<int>();
        if (cfg.workers < 1) throw ConfigError("workers: must be >= 1");
    }

    // model validators run on the assembled problem (range probed at R = 1)
    ProblemSpec probe = make_problem(cfg);
    ValidationReport val = validate_assumptions(probe, 1.0);
    if (!val.ok) throw ConfigError("model: " + val.failure);

    cfg.echo = emit_config(cfg);
    return cfg;
}

nlohmann::json emit_config(const RunConfig& cfg) {
    json j;
    j["grid"] = {{"dim", cfg.grid.dim}, {"n", cfg.grid.n_per_axis}};

    json jm;
    jm["hamiltonian"] = {{"family", "mechanical"},
                         {"potential", emit_cosine_sum(cfg.hamiltonian.potential_w)}};
    json axes = json::array();
    for (const auto& a : cfg.diffusion.axes) {
        const char* fam = a.family == DiffusionFamily::Zero ? "zero"
                          : a.family == DiffusionFamily::Constant ? "constant" : "sin2";
        axes.push_back({{"family", fam}, {"theta", a.theta}, {"k", a.k}});
    }
    jm["diffusion"] = {{"axes", axes}};
    const char* dfam = cfg.discount.family == DiscountFamily::Linear ? "linear"
                       : cfg.discount.family == DiscountFamily::SpatialLinear ? "spatial_linear"
                                                                              : "exp_spatial";
    jm["discount"] = {{"family", dfam}, {"sigma", emit_cosine_sum(cfg.discount.sigma)}};
    if (cfg.potential.kind == PotentialSpec::Kind::ClosedForm && !cfg.potential.form.terms.empty())
        jm["potential"] = {{"type", "closed_form"}, {"form", emit_cosine_sum(cfg.potential.form)}};
    else if (cfg.potential.kind == PotentialSpec::Kind::ClosedForm)
        jm["potential"] = {{"type", "zero"}};
    j["model"] = jm;

    const auto& ex = cfg.experiment;
    json jex;
    jex["name"] = ex.name;
    jex["lambda"] = ex.lambda;
    jex["eta"] = ex.eta;
    if (!ex.lambda_seq.empty()) jex["lambda_seq"] = ex.lambda_seq;
    if (!ex.eta_seq.empty()) jex["eta_seq"] = ex.eta_seq;
    if (!ex.x0.empty()) jex["x0"] = ex.x0;
    jex["tol"] = ex.tol;
    jex["max_iter"] = ex.max_iter;
    jex["lambda_ceiling"] = ex.lambda_ceiling;
    jex["seed"] = ex.seed;
    jex["max_mode"] = ex.max_mode;
    if (ex.c_h) jex["c_h"] = *ex.c_h;
    jex["richardson"] = ex.richardson;
    jex["n_representatives"] = ex.n_representatives;
    jex["eta_rule"] = ex.eta_rule;
    jex["slack_c"] = ex.slack_c;
    jex["reg_eta"] = ex.reg_eta;
    j["experiment"] = jex;

    j["output"] = {{"dir", cfg.out_dir.string()}, {"formats", cfg.formats}};
    j["workers"] = cfg.workers;
    return j;
}

ProblemSpec make_problem(const RunConfig& cfg) {
    ProblemSpec p;
    p.hamiltonian = cfg.hamiltonian;
    p.diffusion = cfg.diffusion;
    p.discount = cfg.discount;
    p.potential = cfg.potential;
    p.grid = cfg.grid;
    p.c_h = cfg.experiment.c_h.value_or(0.0);
    return p;
}

}  // namespace ergoselect

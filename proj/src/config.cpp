#include "pecurves/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "pecurves/errors.hpp"

namespace pec {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key())) throw ConfigError("unknown key '" + it.key() + "' in " + where);
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(where + "." + key + ": " + e.what());
    }
}

template <class T>
void read_opt(const json& j, const char* key, std::optional<T>& out, const std::string& where) {
    if (!j.contains(key)) return;
    if (j.at(key).is_null()) {
        out.reset();
        return;
    }
    T v{};
    read(j, key, v, where);
    out = v;
}

CGridConfig parse_grid(const json& j, const std::string& where) {
    CGridConfig g;
    check_keys(j, {"values", "count", "from_c_star", "to", "to_c_star_star", "spacing"}, where);
    read(j, "values", g.values, where);
    read(j, "count", g.count, where);
    read(j, "from_c_star", g.from_c_star, where);
    read_opt(j, "to", g.to, where);
    read_opt(j, "to_c_star_star", g.to_c_star_star, where);
    read(j, "spacing", g.spacing, where);
    if (g.to_c_star_star) g.to.reset();
    if (g.values.empty()) {
        if (g.count < 2) throw ConfigError(where + ".count must be at least 2");
        if (!g.to && !g.to_c_star_star) throw ConfigError(where + " needs 'to' or 'to_c_star_star'");
        if (g.spacing != "geometric" && g.spacing != "linear")
            throw ConfigError(where + ".spacing must be 'geometric' or 'linear'");
    }
    return g;
}

json grid_json(const CGridConfig& g) {
    json j;
    j["values"] = g.values;
    j["count"] = g.count;
    j["from_c_star"] = g.from_c_star;
    j["to"] = g.to ? json(*g.to) : json(nullptr);
    j["to_c_star_star"] = g.to_c_star_star ? json(*g.to_c_star_star) : json(nullptr);
    j["spacing"] = g.spacing;
    return j;
}

}  // namespace

std::vector<double> CGridConfig::resolve(double c_star, double c_star_star) const {
    if (!values.empty()) {
        std::vector<double> v = values;
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
        return v;
    }
    const double lo = from_c_star * c_star;
    const double hi = to ? *to : *to_c_star_star * c_star_star;
    if (!(hi > lo)) {
        std::ostringstream os;
        os << "c grid is empty: lower end " << lo << " is not below upper end " << hi;
        throw ConfigError(os.str());
    }
    return spacing == "linear" ? linear_grid(lo, hi, count) : geometric_grid(lo, hi, count);
}

OptimizerParams RunConfig::optimizer() const {
    OptimizerParams p;
    p.multistart = multistart;
    p.seed = seed;
    p.threads = threads;
    p.max_iter = max_iter;
    p.grad_tol = grad_tol;
    p.residual_tol = residual_tol;
    p.cone_eps = cone_eps;
    p.lbfgs_memory = lbfgs_memory;
    return p;
}

bool OutputConfig::wants(const std::string& f) const {
    return std::find(formats.begin(), formats.end(), f) != formats.end();
}

ExperimentConfig ExperimentConfig::from_json(const json& root) {
    ExperimentConfig cfg;
    check_keys(root, {"problem", "run", "output"}, "config");

    if (root.contains("problem")) {
        const json& j = root.at("problem");
        const std::string w = "problem";
        check_keys(j, {"type", "dimension", "nodes", "domain", "p", "alpha", "beta", "a", "b", "a_file", "b_file", "L",
                       "eps_reg", "max_side_2d", "conjecture"},
                   w);
        auto& p = cfg.problem;
        read(j, "type", p.type, w);
        read(j, "dimension", p.dimension, w);
        if (j.contains("dimension") && !j.contains("nodes")) p.nodes.assign(static_cast<std::size_t>(p.dimension), 31);
        if (j.contains("dimension") && !j.contains("domain"))
            p.domain.assign(static_cast<std::size_t>(std::max(p.dimension, 0)), {0.0, 1.0});
        read(j, "nodes", p.nodes, w);
        read(j, "domain", p.domain, w);
        read(j, "p", p.p, w);
        read(j, "alpha", p.alpha, w);
        read(j, "beta", p.beta, w);
        read(j, "a", p.a, w);
        read(j, "b", p.b, w);
        read(j, "a_file", p.a_file, w);
        read(j, "b_file", p.b_file, w);
        read(j, "L", p.L, w);
        read(j, "eps_reg", p.eps_reg, w);
        read(j, "max_side_2d", p.max_side_2d, w);
        if (j.contains("conjecture") && !j.at("conjecture").is_null()) {
            const json& cj = j.at("conjecture");
            check_keys(cj, {"center", "radius", "eps_schedule"}, "problem.conjecture");
            ConjectureConfig cc;
            std::vector<double> center;
            read(cj, "center", center, "problem.conjecture");
            if (!center.empty()) {
                if (center.size() > 2) throw ConfigError("problem.conjecture.center has more than two coordinates");
                cc.center = {center[0], center.size() > 1 ? center[1] : 0.0};
            }
            read(cj, "radius", cc.radius, "problem.conjecture");
            read(cj, "eps_schedule", cc.eps_schedule, "problem.conjecture");
            p.conjecture = cc;
        }
    }

    if (root.contains("run")) {
        const json& j = root.at("run");
        const std::string w = "run";
        check_keys(j, {"branches", "k", "negative_side", "multistart", "seed", "threads", "max_iter", "grad_tol",
                       "residual_tol", "cone_eps", "lbfgs_memory", "c_grid", "limit_levels", "limit_tolerance_ratio",
                       "lambda_bar", "intersect_k", "delta_fractions", "zero_tol"},
                   w);
        auto& r = cfg.run;
        read(j, "branches", r.branches, w);
        read(j, "k", r.k, w);
        read(j, "negative_side", r.negative_side, w);
        read(j, "multistart", r.multistart, w);
        read(j, "seed", r.seed, w);
        read(j, "threads", r.threads, w);
        read(j, "max_iter", r.max_iter, w);
        read(j, "grad_tol", r.grad_tol, w);
        read(j, "residual_tol", r.residual_tol, w);
        read(j, "cone_eps", r.cone_eps, w);
        read(j, "lbfgs_memory", r.lbfgs_memory, w);
        if (j.contains("c_grid")) {
            const json& g = j.at("c_grid");
            check_keys(g, {"plus", "minus"}, "run.c_grid");
            if (g.contains("plus")) r.plus_grid = parse_grid(g.at("plus"), "run.c_grid.plus");
            if (g.contains("minus")) r.minus_grid = parse_grid(g.at("minus"), "run.c_grid.minus");
        }
        read(j, "limit_levels", r.limit_levels, w);
        read(j, "limit_tolerance_ratio", r.limit_tolerance_ratio, w);
        read_opt(j, "lambda_bar", r.lambda_bar, w);
        read(j, "intersect_k", r.intersect_k, w);
        read(j, "delta_fractions", r.delta_fractions, w);
        read(j, "zero_tol", r.zero_tol, w);
    }

    if (root.contains("output")) {
        const json& j = root.at("output");
        check_keys(j, {"directory", "formats"}, "output");
        read(j, "directory", cfg.output.directory, "output");
        read(j, "formats", cfg.output.formats, "output");
    }

    // Validation.
    const auto& p = cfg.problem;
    if (p.type != "dirichlet" && p.type != "truncated_rn")
        throw ConfigError("problem.type must be 'dirichlet' or 'truncated_rn'");
    if (p.dimension != 1 && p.dimension != 2) throw ConfigError("problem.dimension must be 1 or 2");
    if (p.nodes.size() != static_cast<std::size_t>(p.dimension))
        throw ConfigError("problem.nodes needs one entry per dimension");
    if (p.type == "dirichlet" && p.domain.size() != static_cast<std::size_t>(p.dimension))
        throw ConfigError("problem.domain needs one [lo, hi] pair per dimension");
    if (p.type == "truncated_rn" && !(p.L > 0.0)) throw ConfigError("problem.L must be positive for truncated_rn");
    Exponents{p.alpha, p.p, p.beta}.validate();
    const auto& r = cfg.run;
    for (const auto& b : r.branches) parse_branch(b);
    for (int k : r.k)
        if (k < 1) throw ConfigError("run.k entries must be >= 1");
    for (int k : r.intersect_k)
        if (k < 1) throw ConfigError("run.intersect_k entries must be >= 1");
    if (r.multistart < 1) throw ConfigError("run.multistart must be >= 1");
    if (r.max_iter < 1) throw ConfigError("run.max_iter must be >= 1");
    if (!(r.residual_tol > 0.0) || !(r.grad_tol > 0.0)) throw ConfigError("run tolerances must be positive");
    if (r.limit_levels.size() < 2) throw ConfigError("run.limit_levels needs at least two levels");
    for (double c : r.limit_levels)
        if (!(c < 0.0)) throw ConfigError("run.limit_levels must be negative");
    for (const auto& f : cfg.output.formats)
        if (f != "csv" && f != "json" && f != "svg") throw ConfigError("output.formats accepts csv, json, svg");
    if (p.conjecture && p.type != "dirichlet") throw ConfigError("problem.conjecture requires a dirichlet problem");
    return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
    }
    return from_json(j);
}

json ExperimentConfig::to_json() const {
    json j;
    const auto& p = problem;
    json pj;
    pj["type"] = p.type;
    pj["dimension"] = p.dimension;
    pj["nodes"] = p.nodes;
    pj["domain"] = p.domain;
    pj["p"] = p.p;
    pj["alpha"] = p.alpha;
    pj["beta"] = p.beta;
    pj["a"] = p.a;
    pj["b"] = p.b;
    pj["a_file"] = p.a_file;
    pj["b_file"] = p.b_file;
    pj["L"] = p.L;
    pj["eps_reg"] = p.eps_reg;
    pj["max_side_2d"] = p.max_side_2d;
    if (p.conjecture) {
        pj["conjecture"] = {{"center", p.conjecture->center},
                            {"radius", p.conjecture->radius},
                            {"eps_schedule", p.conjecture->eps_schedule}};
    } else {
        pj["conjecture"] = nullptr;
    }
    j["problem"] = pj;

    const auto& r = run;
    json rj;
    rj["branches"] = r.branches;
    rj["k"] = r.k;
    rj["negative_side"] = r.negative_side;
    rj["multistart"] = r.multistart;
    rj["seed"] = r.seed;
    rj["threads"] = r.threads;
    rj["max_iter"] = r.max_iter;
    rj["grad_tol"] = r.grad_tol;
    rj["residual_tol"] = r.residual_tol;
    rj["cone_eps"] = r.cone_eps;
    rj["lbfgs_memory"] = r.lbfgs_memory;
    rj["c_grid"] = {{"plus", grid_json(r.plus_grid)}, {"minus", grid_json(r.minus_grid)}};
    rj["limit_levels"] = r.limit_levels;
    rj["limit_tolerance_ratio"] = r.limit_tolerance_ratio;
    rj["lambda_bar"] = r.lambda_bar ? json(*r.lambda_bar) : json(nullptr);
    rj["intersect_k"] = r.intersect_k;
    rj["delta_fractions"] = r.delta_fractions;
    rj["zero_tol"] = r.zero_tol;
    j["run"] = rj;

    j["output"] = {{"directory", output.directory}, {"formats", output.formats}};
    return j;
}

BuiltProblem build_problem(const ExperimentConfig& cfg) {
    const auto& p = cfg.problem;
    const Exponents e{p.alpha, p.p, p.beta};
    Grid grid;
    if (p.type == "truncated_rn") {
        grid = p.dimension == 1 ? Grid::line(p.nodes[0], -p.L, p.L)
                                : Grid::rect(p.nodes[0], p.nodes[1], -p.L, p.L, -p.L, p.L);
    } else {
        grid = p.dimension == 1 ? Grid::line(p.nodes[0], p.domain[0][0], p.domain[0][1])
                                : Grid::rect(p.nodes[0], p.nodes[1], p.domain[0][0], p.domain[0][1], p.domain[1][0],
                                             p.domain[1][1]);
    }
    grid.validate(p.max_side_2d);

    WeightField w;
    if (!p.a_file.empty()) {
        w.a = read_weight_csv(p.a_file, grid);
        w.a_source = "file:" + p.a_file;
    } else {
        w.a = sample_cells(grid, Expression::parse(p.a));
        w.a_source = p.a;
    }
    if (!p.b_file.empty()) {
        w.b = read_weight_csv(p.b_file, grid);
        w.b_source = "file:" + p.b_file;
    } else {
        w.b = sample_cells(grid, Expression::parse(p.b));
        w.b_source = p.b;
    }

    PLaplacianProblem prob;
    prob.grid = grid;
    prob.weights = w;
    prob.p = p.p;
    prob.exponents = e;
    prob.eps_reg = p.eps_reg;
    prob.max_side_2d = p.max_side_2d;

    if (p.type == "truncated_rn")
        return {make_truncated_instance(grid, w, p.p, e, p.L), prob, std::nullopt};

    std::optional<ConjectureWeight> cw;
    if (p.conjecture) {
        cw = construct_weight_for_conjecture(prob, p.conjecture->center, p.conjecture->radius,
                                             p.conjecture->eps_schedule, cfg.run.optimizer());
        prob.weights = cw->weights;
    }
    return {make_instance(prob), prob, cw};
}

}  // namespace pec

#include "proxopt/bench.hpp"

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace proxopt {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw ConfigError("config: " + msg); }

std::string where(const std::string& section, const std::string& key)
{
    return "[" + section + "] " + key;
}

double get_number(const toml::node& n, const std::string& at)
{
    if (auto v = n.value<double>()) return *v;  // accepts integers too
    fail(at + " must be a number");
}

long long get_integer(const toml::node& n, const std::string& at)
{
    if (auto v = n.as_integer()) return v->get();
    if (auto d = n.as_floating_point()) {
        const double x = d->get();
        if (x == std::floor(x) && std::abs(x) < 9e15) return static_cast<long long>(x);
    }
    fail(at + " must be an integer");
}

bool get_bool(const toml::node& n, const std::string& at)
{
    if (auto v = n.value<bool>()) return *v;
    fail(at + " must be true or false");
}

std::string get_string(const toml::node& n, const std::string& at)
{
    if (auto v = n.value<std::string>()) return *v;
    fail(at + " must be a string");
}

std::vector<double> get_numbers(const toml::node& n, const std::string& at)
{
    const auto* arr = n.as_array();
    if (!arr) fail(at + " must be an array of numbers");
    std::vector<double> out;
    for (const auto& e : *arr) out.push_back(get_number(e, at));
    return out;
}

std::vector<std::string> get_strings(const toml::node& n, const std::string& at)
{
    const auto* arr = n.as_array();
    if (!arr) fail(at + " must be an array of strings");
    std::vector<std::string> out;
    for (const auto& e : *arr) out.push_back(get_string(e, at));
    return out;
}

Index get_size(const toml::node& n, const std::string& at)
{
    const long long v = get_integer(n, at);
    if (v < 1) fail(at + " must be >= 1");
    return static_cast<Index>(v);
}

void parse_problem(const toml::table& t, ProblemConfig& pc)
{
    for (const auto& [k, node] : t) {
        const std::string key(k.str());
        const std::string at = where("problem", key);
        if (key == "type") pc.type = get_string(node, at);
        else if (key == "n") pc.n = get_size(node, at);
        else if (key == "angles") pc.angles = get_size(node, at);
        else if (key == "bins") pc.bins = get_size(node, at);
        else if (key == "alpha") pc.alpha = get_number(node, at);
        else if (key == "counts") pc.counts = get_number(node, at);
        else if (key == "noise") pc.noise = get_number(node, at);
        else if (key == "correlation") pc.correlation = get_number(node, at);
        else if (key == "coupling") pc.coupling = get_string(node, at);
        else if (key == "rows") pc.rows = get_size(node, at);
        else if (key == "cols") pc.cols = get_size(node, at);
        else if (key == "lambda") pc.lambda = get_number(node, at);
        else if (key == "matrix") pc.matrix = get_numbers(node, at);
        else if (key == "data") pc.data = get_numbers(node, at);
        else fail("unknown key " + at);
    }
    static const std::set<std::string> types{"pet", "rof", "lasso", "pwls", "quadratic"};
    if (!pc.type.empty() && !types.count(pc.type)) fail("unknown problem type '" + pc.type + "'");
    if (pc.coupling != "full" && pc.coupling != "diagonal")
        fail("[problem] coupling must be \"full\" or \"diagonal\"");
    if (!pc.matrix.empty() || !pc.data.empty()) {
        if (static_cast<Index>(pc.matrix.size()) != pc.rows * pc.cols)
            fail("[problem] matrix must hold rows * cols entries");
        if (static_cast<Index>(pc.data.size()) != pc.rows) fail("[problem] data must hold rows entries");
    }
    if (!(pc.correlation > -1.0 && pc.correlation < 1.0))
        fail("[problem] correlation must lie in (-1, 1)");
}

// returns false for keys that are not solver parameters
bool apply_solver_key(const std::string& section, const std::string& key, const toml::node& node,
                      SolverConfig& c)
{
    const std::string at = where(section, key);
    if (key == "lambda") c.lambda = get_number(node, at);
    else if (key == "step") c.step = get_number(node, at);
    else if (key == "tau") c.tau = get_number(node, at);
    else if (key == "sigma") c.sigma = get_number(node, at);
    else if (key == "gamma") c.gamma = get_number(node, at);
    else if (key == "theta") c.theta = get_number(node, at);
    else if (key == "max_iter") c.max_iter = static_cast<int>(get_size(node, at));
    else if (key == "tol") c.tol = get_number(node, at);
    else if (key == "inner_tol") c.inner_tol = get_number(node, at);
    else if (key == "inner_decay") c.inner_decay = get_number(node, at);
    else if (key == "inner_max_iter") c.inner_max_iter = static_cast<int>(get_size(node, at));
    else if (key == "cg_iters") c.cg_iters = static_cast<int>(get_size(node, at));
    else if (key == "damping") c.damping = get_number(node, at);
    else if (key == "certified") c.certified = get_bool(node, at);
    else if (key == "log_every") c.log_every = static_cast<int>(get_size(node, at));
    else if (key == "record_time") c.record_time = get_bool(node, at);
    else if (key == "mu") c.mu = get_number(node, at);
    else if (key == "disc_tau") c.disc_tau = get_number(node, at);
    else if (key == "noise_level") c.noise_level = get_number(node, at);
    else if (key == "xstep") {
        const std::string v = get_string(node, at);
        if (v == "auto") c.xstep = XStep::automatic;
        else if (v == "dense") c.xstep = XStep::exact_dense;
        else if (v == "cg") c.xstep = XStep::cg;
        else fail(at + " must be auto, dense or cg");
    } else {
        return false;
    }
    return true;
}

void finish_method(SolverRun& run)
{
    if (!is_known_method(run.method)) fail("unknown solver method '" + run.method + "'");
    run.cfg.precondition = run.method == "pdhgmp_precond";
    run.cfg.accelerate = run.method == "fb_em_tv_nes83";
}

void parse_solver(const toml::table& t, RunConfig& rc)
{
    SolverConfig common;
    std::vector<std::string> order;
    bool have_runs = false;
    for (const auto& [k, node] : t) {
        const std::string key(k.str());
        if (node.is_table()) continue;
        if (key == "runs") {
            order = get_strings(node, where("solver", key));
            have_runs = true;
        } else if (!apply_solver_key("solver", key, node, common)) {
            fail("unknown key " + where("solver", key));
        }
    }

    // labelled runs: [solver.<label>] with a method key and overrides
    std::map<std::string, SolverRun> labelled;
    for (const auto& [k, node] : t) {
        if (!node.is_table()) continue;
        const std::string label(k.str());
        const std::string section = "solver." + label;
        SolverRun run;
        run.label = label;
        run.cfg = common;
        for (const auto& [k2, n2] : *node.as_table()) {
            const std::string key(k2.str());
            if (key == "method") run.method = get_string(n2, where(section, key));
            else if (!apply_solver_key(section, key, n2, run.cfg))
                fail("unknown key " + where(section, key));
        }
        if (run.method.empty()) fail("[" + section + "] needs a method");
        finish_method(run);
        labelled.emplace(label, std::move(run));
    }

    rc.solver_defaults = common;
    if (!have_runs)
        for (const auto& [label, run] : labelled) order.push_back(label);

    std::set<std::string> seen;
    for (const auto& label : order) {
        if (!seen.insert(label).second) fail("run label '" + label + "' listed twice");
        auto it = labelled.find(label);
        if (it != labelled.end()) {
            rc.runs.push_back(it->second);
        } else {
            SolverRun run;
            run.label = label;
            run.method = label;
            run.cfg = common;
            finish_method(run);
            rc.runs.push_back(std::move(run));
        }
    }
    for (const auto& [label, run] : labelled)
        if (!seen.count(label)) fail("[solver." + label + "] is not listed in [solver] runs");
}

void parse_bench(const toml::table& t, RunConfig& rc)
{
    for (const auto& [k, node] : t) {
        const std::string key(k.str());
        const std::string at = where("bench", key);
        if (key == "thresholds") rc.thresholds = get_numbers(node, at);
        else if (key == "seed") {
            const long long s = get_integer(node, at);
            if (s < 0) fail(at + " must be >= 0");
            rc.seed = static_cast<std::uint64_t>(s);
        } else if (key == "threads") rc.threads = static_cast<int>(get_size(node, at));
        else if (key == "out") rc.out_dir = get_string(node, at);
        else if (key == "reference") rc.reference = get_string(node, at);
        else if (key == "digest") rc.reference_digest = get_string(node, at);
        else if (key == "gt_iterations") rc.gt_iterations = static_cast<int>(get_size(node, at));
        else fail("unknown key " + at);
    }
    if (rc.thresholds.empty()) fail("[bench] thresholds must not be empty");
    for (size_t i = 0; i < rc.thresholds.size(); ++i) {
        if (!(rc.thresholds[i] > 0.0)) fail("[bench] thresholds must be positive");
        if (i > 0 && !(rc.thresholds[i] < rc.thresholds[i - 1]))
            fail("[bench] thresholds must be strictly decreasing");
    }
}

} // namespace

RunConfig parse_config(const std::string& text)
{
    toml::table root;
    try {
        root = toml::parse(text);
    } catch (const toml::parse_error& e) {
        std::ostringstream os;
        os << "config: " << e.description() << " at line " << e.source().begin.line;
        throw ConfigError(os.str());
    }
    RunConfig rc;
    rc.source = text;
    for (const auto& [k, node] : root) {
        const std::string key(k.str());
        if (!node.is_table()) fail("top-level key '" + key + "' outside a section");
        if (key == "problem") parse_problem(*node.as_table(), rc.problem);
        else if (key == "solver") parse_solver(*node.as_table(), rc);
        else if (key == "bench") parse_bench(*node.as_table(), rc);
        else fail("unknown section [" + key + "]");
    }
    return rc;
}

RunConfig load_config(const std::string& path)
{
    std::ifstream is(path);
    if (!is) throw ConfigError("config: cannot read " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_config(ss.str());
}

} // namespace proxopt

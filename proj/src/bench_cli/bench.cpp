#include "proxopt/bench.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

namespace proxopt {

namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

const std::map<std::string, Splitting>& method_table()
{
    static const std::map<std::string, Splitting> table{
        {"fbs", Splitting::proximal_gradient},
        {"fista", Splitting::proximal_gradient},
        {"admm", Splitting::admm},
        {"split_bregman", Splitting::admm},
        {"drs", Splitting::admm},
        {"pidsplit", Splitting::pidsplit},
        {"linearized_admm", Splitting::pdhg},
        {"pdhgmp", Splitting::pdhg},
        {"pdhgmp_precond", Splitting::pdhg},
        {"fb_em_tv", Splitting::variable_metric},
        {"fb_em_tv_nes83", Splitting::variable_metric},
    };
    return table;
}

std::uint32_t u32(Index v) { return static_cast<std::uint32_t>(v); }

Vector gaussian(SeededRng& rng, Index n)
{
    Vector v(n);
    for (Index i = 0; i < n; ++i) v[i] = rng.normal();
    return v;
}

// drawn row by row
Matrix gaussian_matrix(SeededRng& rng, Index rows, Index cols)
{
    Matrix M(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) M(i, j) = rng.normal();
    return M;
}

// ---------------------------------------------------------------------------
// instances

Instance pet_instance(const ProblemConfig& pc, SeededRng& rng)
{
    const LinearOperator K = LinearOperator::radon({pc.n, pc.angles, pc.bins});
    const Vector img = make_phantom(pet_phantom(pc.n));
    PoissonTvSpec s;
    s.K = K;
    s.counts = simulate_poisson_sinogram(K, img, pc.counts, rng);
    s.alpha = pc.alpha;
    s.height = s.width = pc.n;
    Instance inst;
    // the reconstruction lives on the count scale
    inst.clean = img * (pc.counts / K.apply(img).sum());
    inst.height = inst.width = pc.n;
    inst.spec = std::move(s);
    return inst;
}

Instance rof_instance(const ProblemConfig& pc, SeededRng& rng)
{
    Vector img = make_phantom(pet_phantom(pc.n));
    img /= img.maxCoeff();
    RofSpec s;
    s.f = img + pc.noise * gaussian(rng, img.size());
    s.height = s.width = pc.n;
    s.alpha = pc.alpha;
    Instance inst;
    inst.clean = img;
    inst.height = inst.width = pc.n;
    inst.spec = std::move(s);
    return inst;
}

Instance lasso_instance(const ProblemConfig& pc, SeededRng& rng)
{
    LassoSpec s;
    s.lambda = pc.lambda;
    Instance inst;
    if (!pc.matrix.empty()) {
        Matrix K(pc.rows, pc.cols);
        for (Index i = 0; i < pc.rows; ++i)
            for (Index j = 0; j < pc.cols; ++j) K(i, j) = pc.matrix[static_cast<size_t>(i * pc.cols + j)];
        s.K = LinearOperator::dense(K);
        s.b = Eigen::Map<const Vector>(pc.data.data(), pc.rows);
    } else {
        const Matrix K = gaussian_matrix(rng, pc.rows, pc.cols) / std::sqrt(static_cast<double>(pc.rows));
        Vector x = Vector::Zero(pc.cols);
        const Index k = std::max<Index>(1, pc.cols / 5);
        for (Index j = 0; j < k; ++j) {
            const Index at = static_cast<Index>(rng.uniform() * static_cast<double>(pc.cols)) % pc.cols;
            x[at] = (rng.uniform() < 0.5 ? -1.0 : 1.0) * (1.0 + rng.uniform());
        }
        s.K = LinearOperator::dense(K);
        s.b = K * x + pc.noise * gaussian(rng, pc.rows);
        inst.clean = x;
    }
    inst.spec = std::move(s);
    return inst;
}

Instance pwls_instance(const ProblemConfig& pc, SeededRng& rng)
{
    const LinearOperator K = LinearOperator::radon({pc.n, pc.angles, pc.bins});
    const auto mats = material_phantoms(pc.n);
    const Index n = pc.n * pc.n, L = static_cast<Index>(mats.size());
    Vector clean(L * n);
    for (Index l = 0; l < L; ++l) clean.segment(l * n, n) = make_phantom(mats[static_cast<size_t>(l)]);
    const Vector mean = LinearOperator::kron_identity(K, L).apply(clean);

    // heteroscedastic per-ray deviations, correlated across channels
    const Index m = K.rows();
    std::vector<double> peak(static_cast<size_t>(L));
    for (Index l = 0; l < L; ++l) peak[static_cast<size_t>(l)] = mean.segment(l * m, m).cwiseAbs().maxCoeff();
    std::vector<Matrix> blocks;
    blocks.reserve(static_cast<size_t>(m));
    for (Index i = 0; i < m; ++i) {
        Vector sd(L);
        for (Index l = 0; l < L; ++l)
            sd[l] = pc.noise * (0.25 * peak[static_cast<size_t>(l)] + 0.75 * std::abs(mean[l * m + i]));
        Matrix B = pc.correlation * sd * sd.transpose();
        B.diagonal() = sd.array().square();
        blocks.push_back(B);
    }

    PwlsSpec s;
    s.K = K;
    s.channels = L;
    s.cov = BlockCovariance::from_ray_blocks(blocks);
    s.data = simulate_correlated_sinograms(mean, s.cov, rng);
    s.alpha = pc.alpha;
    s.height = s.width = pc.n;
    s.coupling = pc.coupling == "diagonal" ? Coupling::diagonal : Coupling::full;
    Instance inst;
    inst.clean = clean;
    inst.height = inst.width = pc.n;
    inst.spec = std::move(s);
    return inst;
}

// 1/2||x - f||^2 + 1/2||A x - c||^2, small enough for a direct solve
Instance quadratic_instance(const ProblemConfig& pc, SeededRng& rng)
{
    const Matrix A = gaussian_matrix(rng, pc.rows, pc.cols);
    const Vector f = gaussian(rng, pc.cols), c = gaussian(rng, pc.rows);
    CompositeProblem p;
    p.name = "quadratic";
    p.dim = pc.cols;
    p.g = ProxSpec::squared_distance(1.0, f);
    p.h = ProxSpec::squared_distance(1.0, c);
    p.A = LinearOperator::dense(A);
    p.x0 = Vector::Zero(pc.cols);
    Instance inst;
    inst.custom = std::move(p);
    return inst;
}

std::string read_file(const std::string& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) throw InvalidArgument("cannot read " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& bytes)
{
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot write " + path);
    os << bytes;
    if (!os) throw Error("write failed: " + path);
}

void ensure_dir(const std::string& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error("cannot create " + dir + ": " + ec.message());
}

std::string reference_path(const RunConfig& rc)
{
    return rc.reference.empty() ? (fs::path(rc.out_dir) / "reference.proximg").string() : rc.reference;
}

// identifies the data a reference was computed for
std::string problem_fingerprint(const RunConfig& rc)
{
    const ProblemConfig& p = rc.problem;
    Json j{{"type", p.type},       {"n", p.n},
           {"angles", p.angles},   {"bins", p.bins},
           {"alpha", p.alpha},     {"counts", p.counts},
           {"noise", p.noise},     {"correlation", p.correlation},
           {"coupling", p.coupling}, {"rows", p.rows},
           {"cols", p.cols},       {"lambda", p.lambda},
           {"matrix", p.matrix},   {"data", p.data},
           {"seed", rc.seed},      {"gt_iterations", rc.gt_iterations}};
    return sha256_hex(j.dump());
}

// rejects step sizes that break the convergence certificate before anything runs
void precheck(const Instance& inst, const SolverRun& run)
{
    CompositeProblem prob;
    try {
        prob = instantiate(inst, method_splitting(run.method));
    } catch (const InvalidArgument& e) {
        throw ConfigError("run '" + run.label + "': " + e.what());
    }
    const SolverConfig& c = run.cfg;
    if (!c.certified) return;
    auto bad = [&](const std::string& why) {
        throw ConfigError("run '" + run.label + "': " + why + " violates the convergence condition");
    };
    if (run.method == "pdhgmp" && c.tau > 0.0 && c.sigma > 0.0) {
        const double nA = power_method_norm(prob.A, 1e-10, 100000, c.seed).norm;
        if (!(c.tau * c.sigma * nA * nA < 1.0)) bad("tau * sigma * ||A||^2 >= 1");
    }
    if (run.method == "linearized_admm" && c.tau > 0.0) {
        const double nA = power_method_norm(prob.A, 1e-10, 100000, c.seed).norm;
        if (!(c.tau * c.gamma * nA * nA < 1.0)) bad("tau * gamma * ||A||^2 >= 1");
    }
    if ((run.method == "fbs" || run.method == "fista") && c.step > 0.0 && prob.smooth) {
        const double eL = c.step * prob.smooth->lipschitz;
        if (run.method == "fbs" ? !(eL < 2.0) : eL > 1.0 + 1e-12) bad("step * L");
    }
}

} // namespace

// ---------------------------------------------------------------------------

bool is_known_method(const std::string& method) { return method_table().count(method) > 0; }

Splitting method_splitting(const std::string& method)
{
    const auto it = method_table().find(method);
    if (it == method_table().end()) throw ConfigError("unknown solver method '" + method + "'");
    return it->second;
}

std::vector<std::uint32_t> Instance::dims() const
{
    if (spec && std::holds_alternative<PwlsSpec>(*spec))
        return {u32(std::get<PwlsSpec>(*spec).channels), u32(height), u32(width)};
    if (height > 0) return {u32(height), u32(width)};
    if (custom) return {u32(custom->dim)};
    return {u32(std::get<LassoSpec>(*spec).K.cols())};
}

Instance make_instance(const ProblemConfig& pc, std::uint64_t seed)
{
    SeededRng rng(seed);
    if (pc.type == "pet") return pet_instance(pc, rng);
    if (pc.type == "rof") return rof_instance(pc, rng);
    if (pc.type == "lasso") return lasso_instance(pc, rng);
    if (pc.type == "pwls") return pwls_instance(pc, rng);
    if (pc.type == "quadratic") return quadratic_instance(pc, rng);
    throw ConfigError(pc.type.empty() ? "config: [problem] type is required"
                                      : "config: unknown problem type '" + pc.type + "'");
}

CompositeProblem instantiate(const Instance& inst, Splitting splitting)
{
    if (inst.custom) {
        require(splitting == Splitting::admm || splitting == Splitting::pdhg,
                std::string("quadratic toy cannot be solved with the ") + splitting_name(splitting) +
                    " splitting");
        return *inst.custom;
    }
    require(inst.spec.has_value(), "instance has no problem");
    ProblemSpec spec = *inst.spec;
    auto counter = std::make_shared<OpCounter>();
    // count the measurement operator of the least-squares models too
    if (auto* l = std::get_if<LassoSpec>(&spec)) l->K = LinearOperator::counted(l->K, counter);
    else if (auto* w = std::get_if<PwlsSpec>(&spec)) w->K = LinearOperator::counted(w->K, counter);
    else if (auto* p = std::get_if<PoissonTvSpec>(&spec)) p->counter = counter;
    CompositeProblem prob = build_problem(spec, splitting);
    if (!std::holds_alternative<RofSpec>(spec)) prob.counter = counter;
    if (!std::holds_alternative<PoissonTvSpec>(spec) && !std::holds_alternative<RofSpec>(spec)) {
        const ProblemSpec plain = *inst.spec;
        prob.objective = [plain](const Vector& x) { return objective_eval(plain, x); };
    }
    return prob;
}

SolveResult run_method(const Instance& inst, const SolverRun& run,
                       std::shared_ptr<const Vector> reference, double target)
{
    const Splitting sp = method_splitting(run.method);
    const CompositeProblem prob = instantiate(inst, sp);
    SolverConfig cfg = run.cfg;
    cfg.reference = std::move(reference);
    cfg.target_rel_err = target;
    cfg.precondition = run.method == "pdhgmp_precond";
    cfg.accelerate = run.method == "fb_em_tv_nes83";

    const std::string& m = run.method;
    if (m == "fbs") return run_proximal_gradient(prob, cfg);
    if (m == "fista") return run_fast_proximal_gradient(prob, cfg);
    if (m == "admm") return run_admm(prob, cfg);
    if (m == "split_bregman") return run_split_bregman(prob, cfg);
    if (m == "drs") return run_drs_dual(prob, cfg);
    if (m == "pidsplit") return run_pidsplit(prob, cfg);
    if (m == "linearized_admm") return run_proximal_admm(prob, cfg, ProximalMetric{});
    if (m == "pdhgmp" || m == "pdhgmp_precond") return run_pdhgmp(prob, cfg);
    return run_variable_metric_fb(prob, cfg);
}

// ---------------------------------------------------------------------------
// reports

std::vector<BenchRow> threshold_rows(const std::string& label, const ConvergenceRecord& rec,
                                     const std::vector<double>& thresholds)
{
    std::vector<BenchRow> out;
    for (double eps : thresholds) {
        BenchRow row;
        row.solver = label;
        row.epsilon = eps;
        row.failed = rec.diverged;
        const ConvergenceRow* at = rec.rows.empty() ? nullptr : &rec.rows.back();
        const int hit = rec.first_below(eps);
        if (hit >= 0) {
            for (const auto& r : rec.rows)
                if (r.iter == hit) {
                    at = &r;
                    break;
                }
            row.iters = hit;
            row.reached = true;
        }
        if (at) {
            row.fwd_evals = at->fwd_evals;
            row.adj_evals = at->adj_evals;
            row.inner_iters = at->inner_iters;
            row.elapsed_s = at->wall_s;
        }
        out.push_back(row);
    }
    return out;
}

std::string BenchReport::json() const
{
    Json runs = Json::array();
    for (const auto& r : rows) {
        Json j{{"solver", r.solver},
               {"epsilon", r.epsilon},
               {"iters", r.reached ? Json(r.iters) : Json(nullptr)},
               {"fwd_evals", r.fwd_evals},
               {"adj_evals", r.adj_evals},
               {"inner_iters", r.inner_iters},
               {"elapsed_s", r.elapsed_s},
               {"reached", r.reached}};
        if (r.failed) j["failed"] = true;
        runs.push_back(std::move(j));
    }
    return Json{{"runs", runs}}.dump(2) + "\n";
}

std::string BenchReport::table() const
{
    std::string out = fmt::format("{:<22} {:>9} {:>8} {:>9} {:>9} {:>10} {:>10}  {}\n", "solver",
                                  "epsilon", "iters", "K", "K^T", "inner", "seconds", "status");
    for (const auto& r : rows) {
        const std::string status = r.failed ? "failed" : r.reached ? "reached" : "not reached";
        out += fmt::format("{:<22} {:>9.3g} {:>8} {:>9} {:>9} {:>10} {:>10.3f}  {}\n", r.solver,
                           r.epsilon, r.reached ? std::to_string(r.iters) : "-", r.fwd_evals,
                           r.adj_evals, r.inner_iters, r.elapsed_s, status);
    }
    return out;
}

// ---------------------------------------------------------------------------
// commands

GroundTruthFiles cmd_groundtruth(const RunConfig& rc)
{
    const Instance inst = make_instance(rc.problem, rc.seed);
    const GroundTruth gt = compute_ground_truth(instantiate(inst, Splitting::pdhg), rc.gt_iterations);

    ImageData img;
    img.dims = inst.dims();
    img.values = gt.u;
    const std::string bytes = proximg_bytes(img);

    GroundTruthFiles files;
    files.image_path = reference_path(rc);
    files.sidecar_path = files.image_path + ".json";
    files.digest = sha256_hex(bytes);
    const fs::path parent = fs::path(files.image_path).parent_path();
    if (!parent.empty()) ensure_dir(parent.string());
    write_file(files.image_path, bytes);

    Json side{{"format", "PROXIMG1"},
              {"sha256", files.digest},
              {"dims", img.dims},
              {"iterations", gt.iterations},
              {"method", "pdhgmp_precond"},
              {"problem", rc.problem.type},
              {"seed", rc.seed},
              {"problem_fingerprint", problem_fingerprint(rc)},
              {"warnings", gt.warnings}};
    write_file(files.sidecar_path, side.dump(2) + "\n");
    return files;
}

Vector load_verified_reference(const RunConfig& rc)
{
    const std::string path = reference_path(rc);
    if (!fs::exists(path)) throw InvalidArgument("missing reference " + path + "; run groundtruth first");
    const std::string bytes = read_file(path);
    const std::string digest = sha256_hex(bytes);

    Json side;
    try {
        side = Json::parse(read_file(path + ".json"));
    } catch (const Json::exception& e) {
        throw DigestMismatch("reference sidecar unreadable: " + std::string(e.what()));
    }
    const std::string recorded = side.value("sha256", std::string());
    if (digest != recorded)
        throw DigestMismatch("reference " + path + " has digest " + digest + ", sidecar records " + recorded);
    if (!rc.reference_digest.empty() && digest != rc.reference_digest)
        throw DigestMismatch("reference " + path + " does not match the configured digest");
    if (side.value("problem_fingerprint", std::string()) != problem_fingerprint(rc))
        throw DigestMismatch("reference " + path + " was computed for a different problem");

    std::istringstream is(bytes);
    return read_proximg(is).values;
}

BenchReport cmd_bench(const RunConfig& rc)
{
    if (rc.runs.empty()) throw ConfigError("config: [solver] lists no runs");
    const Instance inst = make_instance(rc.problem, rc.seed);
    for (const auto& run : rc.runs) precheck(inst, run);

    const auto reference = std::make_shared<const Vector>(load_verified_reference(rc));
    Index expect = 1;
    for (auto d : inst.dims()) expect *= d;
    if (reference->size() != expect)
        throw DigestMismatch("reference size does not match the problem");
    const double target = rc.thresholds.back();
    ensure_dir(rc.out_dir);

    // each worker owns its problem and solver state; assembly happens after the join
    const size_t n = rc.runs.size();
    std::vector<ConvergenceRecord> records(n);
    std::atomic<size_t> next{0};
    auto worker = [&] {
        for (size_t i = next++; i < n; i = next++) {
            SolverRun run = rc.runs[i];
            run.cfg.seed = rc.seed;
            try {
                records[i] = run_method(inst, run, reference, target).record;
            } catch (const std::exception& e) {
                records[i].solver = run.method;
                records[i].diverged = true;
                records[i].warnings.push_back(e.what());
            }
        }
    };
    const int threads = std::max(1, std::min<int>(rc.threads, static_cast<int>(n)));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    BenchReport report;
    for (size_t i = 0; i < n; ++i) {
        const std::string& label = rc.runs[i].label;
        write_file((fs::path(rc.out_dir) / (label + ".csv")).string(), records[i].csv());
        for (auto& row : threshold_rows(label, records[i], rc.thresholds)) report.rows.push_back(row);
        report.records.emplace_back(label, std::move(records[i]));
    }
    write_file((fs::path(rc.out_dir) / "summary.json").string(), report.json());
    write_file((fs::path(rc.out_dir) / "summary.txt").string(), report.table());
    return report;
}

SolveResult cmd_single(const RunConfig& rc, const std::string& family)
{
    static const std::map<std::string, std::pair<std::string, std::string>> families{
        {"denoise", {"rof", "pdhgmp"}},
        {"lasso", {"lasso", "fista"}},
        {"pet", {"pet", "pidsplit"}},
        {"pwls", {"pwls", "pdhgmp"}}};
    const auto it = families.find(family);
    if (it == families.end()) throw ConfigError("unknown command '" + family + "'");
    const auto& [type, default_method] = it->second;

    ProblemConfig pc = rc.problem;
    if (pc.type.empty()) pc.type = type;
    if (pc.type != type)
        throw ConfigError("config: " + family + " needs [problem] type = \"" + type + "\", got \"" +
                          pc.type + "\"");

    SolverRun run;
    if (!rc.runs.empty()) {
        run = rc.runs.front();
    } else {
        run.label = default_method;
        run.method = default_method;
        run.cfg = rc.solver_defaults;
    }
    run.cfg.seed = rc.seed;
    const Instance inst = make_instance(pc, rc.seed);
    precheck(inst, run);
    SolveResult res = run_method(inst, run);

    ensure_dir(rc.out_dir);
    ImageData img;
    img.dims = inst.dims();
    img.values = res.x;
    save_proximg((fs::path(rc.out_dir) / "solution.proximg").string(), img);
    write_file((fs::path(rc.out_dir) / (run.label + ".csv")).string(), res.record.csv());
    return res;
}

} // namespace proxopt

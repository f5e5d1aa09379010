#pragma once

#include "proxopt/problems.hpp"
#include "proxopt/simulate.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace proxopt {

/// Malformed or inconsistent configuration (CLI exit code 2).
struct ConfigError : InvalidArgument {
    using InvalidArgument::InvalidArgument;
};

/// Stored reference does not match its recorded digest (CLI exit code 3).
struct DigestMismatch : Error {
    using Error::Error;
};

struct ProblemConfig {
    std::string type;  // pet | rof | lasso | pwls | quadratic

    // image geometry (pet, rof, pwls)
    Index n = 64;
    Index angles = 90;
    Index bins = 95;

    double alpha = 0.1;
    double counts = 2e5;         // pet: expected total
    double noise = 0.1;          // rof: gaussian std; pwls: per-channel std scale
    double correlation = 0.9;    // pwls: ray-wise channel correlation
    std::string coupling = "full";

    // lasso
    Index rows = 20, cols = 20;
    double lambda = 0.1;
    std::vector<double> matrix;  // explicit row-major K, optional
    std::vector<double> data;    // explicit b, optional
};

struct SolverRun {
    std::string label;   // unique; names the CSV
    std::string method;  // ppa, fbs, fista, admm, split_bregman, drs, pidsplit,
                         // linearized_admm, pdhgmp, pdhgmp_precond, fb_em_tv, fb_em_tv_nes83
    SolverConfig cfg;
};

struct RunConfig {
    ProblemConfig problem;
    std::vector<SolverRun> runs;
    SolverConfig solver_defaults;  // [solver] keys, used when no run is listed
    std::vector<double> thresholds{0.05, 0.005};
    std::uint64_t seed = 1;
    int threads = 1;
    std::string out_dir = "out";
    std::string reference;         // PROXIMG1 path; default <out>/reference.proximg
    std::string reference_digest;  // optional expected digest
    int gt_iterations = 20000;
    std::string source;            // config text, kept for provenance
};

/// Parses the TOML configuration. Unknown sections or keys throw ConfigError.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Solver family that a method id runs on.
Splitting method_splitting(const std::string& method);
bool is_known_method(const std::string& method);

/// Generated data for a problem config.
struct Instance {
    std::optional<ProblemSpec> spec;
    std::optional<CompositeProblem> custom;  // quadratic toy
    Vector clean;                            // noiseless signal when known
    Index height = 0, width = 0;             // image shape of the unknown
    std::vector<std::uint32_t> dims() const;
};

Instance make_instance(const ProblemConfig& pc, std::uint64_t seed);
CompositeProblem instantiate(const Instance& inst, Splitting splitting);

/// Runs one method on a fresh problem; `reference` enables relative errors.
SolveResult run_method(const Instance& inst, const SolverRun& run,
                       std::shared_ptr<const Vector> reference = {}, double target = 0.0);

struct BenchRow {
    std::string solver;
    double epsilon = 0.0;
    int iters = -1;
    long long fwd_evals = 0, adj_evals = 0, inner_iters = 0;
    double elapsed_s = 0.0;
    bool reached = false;
    bool failed = false;
};

struct BenchReport {
    std::vector<BenchRow> rows;
    std::vector<std::pair<std::string, ConvergenceRecord>> records;  // label, log

    std::string json() const;
    std::string table() const;
};

/// Threshold rows for one log; reached only when the crossing is a logged row.
std::vector<BenchRow> threshold_rows(const std::string& label, const ConvergenceRecord& rec,
                                     const std::vector<double>& thresholds);

struct GroundTruthFiles {
    std::string image_path, sidecar_path, digest;
};

GroundTruthFiles cmd_groundtruth(const RunConfig& rc);

/// Loads the reference and checks it against the sidecar digest (and the
/// configured digest if any). Throws DigestMismatch on any difference.
Vector load_verified_reference(const RunConfig& rc);

/// Runs every configured solver against the verified reference, writes one
/// CSV per run plus summary.json and summary.txt into out_dir.
BenchReport cmd_bench(const RunConfig& rc);

/// Single-run wrappers; `family` is denoise, lasso, pet or pwls. Writes the
/// solution (PROXIMG1) and the CSV of the first configured run.
SolveResult cmd_single(const RunConfig& rc, const std::string& family);

} // namespace proxopt

#pragma once

#include "proxopt/linops.hpp"
#include "proxopt/prox.hpp"

#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace proxopt {

// ---------------------------------------------------------------------------
// Problem description
// ---------------------------------------------------------------------------

/// 1/2 ||M x - c||^2
struct LeastSquares {
    LinearOperator M;
    Vector c;
};

struct SmoothTerm {
    std::function<double(const Vector&)> value;
    std::function<Vector(const Vector&)> gradient;
    double lipschitz = 0.0;
    std::optional<LeastSquares> lsq;  // set when the term is a least-squares fit
};

/// Smooth term 1/2 ||M x - c||^2 with L = ||M||^2 from the power method.
SmoothTerm make_least_squares(LinearOperator M, Vector c);

/// Extra data of the Poisson-TV model used by the EM-type solvers.
struct PoissonTvData {
    LinearOperator K;    // counted sinogram map
    Vector counts;
    Vector sensitivity;  // K' 1, computed once without counting
    double alpha = 0.0;
    Index height = 0, width = 0;
};

/* minimize  s(x) + g(x) + h(A x)
 * where s is an optional smooth term, g and h are proximable. */
struct CompositeProblem {
    Index dim = 0;
    std::optional<SmoothTerm> smooth;
    ProxSpec g;
    ProxSpec h;
    LinearOperator A;
    Vector x0;
    std::shared_ptr<OpCounter> counter;           // counts evaluations of the measurement operator
    std::function<double(const Vector&)> objective;  // must not touch counted operators
    std::optional<PoissonTvData> poisson;
    std::string name;

    double evaluate(const Vector& x) const;
    void validate() const;
};

// ---------------------------------------------------------------------------
// Configuration and logs
// ---------------------------------------------------------------------------

enum class XStep { automatic, exact_dense, cg };

struct IterateView {
    int iter;
    const Vector* x = nullptr;
    const Vector* y = nullptr;
    const Vector* b = nullptr;  // scaled multiplier
    const Vector* t = nullptr;  // DRS auxiliary
    const Vector* p = nullptr;  // unscaled dual
};

using Observer = std::function<void(const IterateView&)>;

struct SolverConfig {
    double lambda = 1.0;  // PPA prox weight
    double step = 0.0;    // FBS / DRS step eta; 0 selects 1/L for FBS, 1 for DRS
    double tau = 0.0;     // primal step; 0 selects a default
    double sigma = 0.0;   // dual step; 0 selects a default
    double gamma = 1.0;   // augmented Lagrangian weight
    double theta = 1.0;   // extrapolation

    int max_iter = 1000;
    double tol = 1e-10;            // relative iterate change; 0 disables
    double target_rel_err = 0.0;   // stop once rel_err <= target (needs reference)

    double inner_tol = 5e-3;       // delta of the inner stopping rule
    double inner_decay = 1.0;      // delta_r = inner_tol * inner_decay^r
    int inner_max_iter = 200;
    int cg_iters = 2;
    XStep xstep = XStep::automatic;

    bool precondition = false;
    bool accelerate = false;
    double damping = 1.0;          // eta in (0, 1] of the variable-metric step
    bool certified = true;

    double disc_tau = 1.02;        // discrepancy principle factor
    double noise_level = 0.0;      // ||noise||
    double mu = 1.0;               // Bregman data weight

    bool record_time = false;
    int log_every = 1;             // log every k-th iteration plus the last one
    int threads = 1;
    std::uint64_t seed = 1;
    std::shared_ptr<const Vector> reference;
    Observer observer;
};

struct ConvergenceRow {
    int iter = 0;
    double objective = 0.0;
    double rel_err = 0.0;
    double primal_res = 0.0;
    double dual_change = 0.0;
    long long fwd_evals = 0;
    long long adj_evals = 0;
    long long inner_iters = 0;
    double elapsed_s = 0.0;  // written to CSV; 0 unless cfg.record_time
    double wall_s = 0.0;     // always measured, never written to CSV
};

struct ConvergenceRecord {
    static constexpr const char* kHeader =
        "iter,objective,rel_err,primal_res,dual_change,fwd_evals,adj_evals,inner_iters,elapsed_s";

    std::string solver;
    std::vector<ConvergenceRow> rows;
    std::vector<std::string> warnings;
    bool diverged = false;

    void write_csv(std::ostream& os) const;
    std::string csv() const;
    /// First logged iteration with rel_err <= eps, or -1.
    int first_below(double eps) const;
};

struct SolveResult {
    Vector x, y, b, t, p;
    ConvergenceRecord record;
};

// ---------------------------------------------------------------------------
// Solvers
// ---------------------------------------------------------------------------

SolveResult run_ppa(const CompositeProblem& prob, const SolverConfig& cfg);
SolveResult run_proximal_gradient(const CompositeProblem& prob, const SolverConfig& cfg);
SolveResult run_fast_proximal_gradient(const CompositeProblem& prob, const SolverConfig& cfg);
SolveResult run_admm(const CompositeProblem& prob, const SolverConfig& cfg);
SolveResult run_pidsplit(const CompositeProblem& prob, const SolverConfig& cfg);

/// R in the proximal term 1/2 ||x - x_r||_R^2.
struct ProximalMetric {
    enum class Kind { explicit_diag, linearized } kind = Kind::linearized;
    Vector diag;  // explicit_diag only
};

SolveResult run_proximal_admm(const CompositeProblem& prob, const SolverConfig& cfg,
                              const ProximalMetric& R);

/// Douglas-Rachford on min g + h with both proxes given.
SolveResult run_drs(const ProxMap& prox_g, const ProxMap& prox_h, const Vector& t0,
                    const SolverConfig& cfg,
                    const std::function<double(const Vector&)>& objective = {});
SolveResult run_drs(const ProxSpec& g, const ProxSpec& h, const Vector& t0, const SolverConfig& cfg);

/// Douglas-Rachford applied to the Fenchel dual of min s + g + h(A.).
/// t and p are dual quantities; x is the primal point recovered from the
/// last prox step of the dual function.
SolveResult run_drs_dual(const CompositeProblem& prob, const SolverConfig& cfg);

SolveResult run_pdhgmp(const CompositeProblem& prob, const SolverConfig& cfg);
SolveResult run_variable_metric_fb(const CompositeProblem& prob, const SolverConfig& cfg);
SolveResult run_split_bregman(const CompositeProblem& prob, const SolverConfig& cfg,
                              bool verify = false);

struct BregmanResult {
    Vector x;               // iterate returned by the stopping rule
    int stop_index = -1;    // outer iteration at which the rule fired, -1 if never
    std::vector<Vector> path;
    std::vector<double> fidelity;  // ||A x_r - f||
    ConvergenceRecord record;
};

enum class BregmanInner { admm, pdhg };

/// Bregman iteration for min g(x) s.t. Ax = f, stopped by the discrepancy
/// principle. With full_path the loop continues to max_iter after the rule
/// fires so that the whole iterate path is available.
BregmanResult run_bregman_iteration(const ProxSpec& g, const LinearOperator& A, const Vector& f,
                                    const SolverConfig& cfg,
                                    BregmanInner inner = BregmanInner::admm,
                                    bool full_path = false);

// ---------------------------------------------------------------------------
// Building blocks shared with tests
// ---------------------------------------------------------------------------

/* argmin_x s(x) + g(x) + gamma/2 ||A x - v||^2 + 1/2 ||x - x_prev||^2_R */
class XStepSolver {
public:
    XStepSolver(const CompositeProblem& prob, double gamma, XStep mode, int cg_iters,
                Vector r_diag = {});
    Vector solve(const Vector& v, const Vector& x_prev);
    long long inner_iterations() const { return inner_; }

private:
    const CompositeProblem& prob_;
    double gamma_;
    XStep mode_;
    int cg_iters_;
    Vector r_;
    enum class Path { prox, dense, cg } path_;
    double qweight_ = 0.0;
    Vector rhs_const_;  // linear part independent of v
    Eigen::LLT<Matrix> llt_;
    std::unique_ptr<Eigen::CompleteOrthogonalDecomposition<Matrix>> cod_;
    Vector jacobi_;
    long long inner_ = 0;
    Vector apply_h(const Vector& x) const;
};

} // namespace proxopt

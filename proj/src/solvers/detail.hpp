#pragma once

#include "proxopt/solvers.hpp"

#include <chrono>

namespace proxopt::detail {

/* Appends rows to a ConvergenceRecord and applies the shared stopping rule:
 * relative iterate change, target relative error, max_iter, divergence. */
class Logger {
public:
    Logger(std::string solver, const SolverConfig& cfg, const CompositeProblem* prob,
           std::function<double(const Vector&)> objective = {});

    void initial(const Vector& x);

    /// Returns true when the run should stop.
    bool step(int iter, const Vector& x, const Vector& x_prev, double primal_res,
              double dual_change, long long inner_iters);

    void warn(std::string msg) { record.warnings.push_back(std::move(msg)); }

    ConvergenceRecord record;

private:
    const SolverConfig& cfg_;
    const CompositeProblem* prob_;
    std::function<double(const Vector&)> objective_;
    long long fwd0_ = 0, adj0_ = 0;
    std::chrono::steady_clock::time_point start_;

    ConvergenceRow make_row(int iter, const Vector& x, double primal_res, double dual_change,
                            long long inner) const;
};

void notify(const SolverConfig& cfg, int iter, const Vector& x, const Vector* y = nullptr,
            const Vector* b = nullptr, const Vector* t = nullptr, const Vector* p = nullptr);

/// prox_{eta (g + h o A)} when one of the terms vanishes and A = I.
ProxMap nonsmooth_prox(const CompositeProblem& prob);

/// Sum of squared block norms: 8 for gradients, 1 for identities, power
/// method estimates otherwise.
double norm_sq_bound(const LinearOperator& A, std::uint64_t seed);

Vector column_sq_norms(const LinearOperator& A);

} // namespace proxopt::detail

#include "detail.hpp"

#include <cmath>

namespace proxopt {

namespace {

SolveResult pdhg_preconditioned(const CompositeProblem& prob, const SolverConfig& cfg,
                                detail::Logger& log)
{
    // tau and sigma rescale the diagonal steps; the step condition needs tau sigma <= 1
    const double ts = cfg.tau > 0.0 ? cfg.tau : 1.0, ss = cfg.sigma > 0.0 ? cfg.sigma : 1.0;
    if (ts * ss > 1.0 + 1e-12) {
        const std::string msg = "pdhgmp_precond: tau * sigma > 1, convergence not certified";
        if (cfg.certified) throw InvalidArgument(msg);
        log.warn(msg);
    }
    const auto pre = diag_precond_vectors(prob.A);
    const Vector T = prob.g.harmonize_steps(ts * pre.tau);
    const Vector S = prob.h.harmonize_steps(ss * pre.sigma);
    const double theta = cfg.theta;

    Vector x = prob.x0;
    Vector p = Vector::Zero(prob.A.rows());
    Vector p_bar = p;
    Vector y = prob.A.apply(x);
    log.initial(x);
    for (int r = 1;; ++r) {
        Vector x_new = prob.g.prox_diag(x - T.cwiseProduct(prob.A.adjoint(p_bar)), T);
        const Vector Ax = prob.A.apply(x_new);
        const Vector v = p + S.cwiseProduct(Ax);
        Vector p_new = prob.h.prox_conjugate_diag(v, S);
        // y is the primal split variable: p_new = p + S (A x - y)
        y = (v - p_new).cwiseQuotient(S);
        p_bar = p_new + theta * (p_new - p);
        const double dchange = (p_new - p).norm();
        p = std::move(p_new);
        std::swap(x, x_new);
        if (cfg.observer) {
            const Vector b = p.cwiseQuotient(S);
            detail::notify(cfg, r, x, &y, &b, nullptr, &p);
        }
        if (log.step(r, x, x_new, (Ax - y).norm(), dchange, 0)) break;
    }
    return {x, y, p.cwiseQuotient(S), {}, p, std::move(log.record)};
}

} // namespace

SolveResult run_pdhgmp(const CompositeProblem& prob, const SolverConfig& cfg)
{
    prob.validate();
    require(!prob.smooth, "pdhgmp: smooth terms are not supported, use a proximable g");
    require(cfg.theta >= 0.0 && cfg.theta <= 1.0, "pdhgmp: theta must lie in [0, 1]");
    if (cfg.precondition) {
        detail::Logger log("pdhgmp_precond", cfg, &prob);
        return pdhg_preconditioned(prob, cfg, log);
    }

    // norm estimates are set-up work and stay outside the logged counts

    const double bound = detail::norm_sq_bound(prob.A, cfg.seed);
    const double est = power_method_norm(prob.A, 1e-10, 100000, cfg.seed).norm;
    const double nsq = est * est;
    double tau = cfg.tau, sigma = cfg.sigma;
    if (tau <= 0.0 && sigma <= 0.0) sigma = 1.0 / std::sqrt(bound);
    if (tau <= 0.0) tau = std::min(1.0 / (sigma * bound), 0.99 / (sigma * nsq));
    if (sigma <= 0.0) sigma = std::min(1.0 / (tau * bound), 0.99 / (tau * nsq));
    require_positive(tau, "pdhgmp: tau");
    require_positive(sigma, "pdhgmp: sigma");
    detail::Logger log("pdhgmp", cfg, &prob);
    if (!(tau * sigma * nsq < 1.0)) {
        const std::string msg = "pdhgmp: tau * sigma * ||A||^2 >= 1, convergence not certified";
        if (cfg.certified) throw InvalidArgument(msg);
        log.warn(msg);
    }

    const double theta = cfg.theta;
    Vector x = prob.x0;
    Vector b = Vector::Zero(prob.A.rows());
    Vector b_bar = b;
    Vector y = prob.A.apply(x);
    log.initial(x);
    for (int r = 1;; ++r) {
        Vector x_new = prob.g.prox(x - tau * sigma * prob.A.adjoint(b_bar), tau);
        const Vector Ax = prob.A.apply(x_new);
        y = prob.h.prox(b + Ax, 1.0 / sigma);
        Vector b_new = b + Ax - y;
        b_bar = b_new + theta * (b_new - b);
        const double dchange = sigma * (b_new - b).norm();
        b = std::move(b_new);
        std::swap(x, x_new);
        if (cfg.observer) {
            const Vector p = sigma * b;
            detail::notify(cfg, r, x, &y, &b, nullptr, &p);
        }
        if (log.step(r, x, x_new, (Ax - y).norm(), dchange, 0)) break;
    }
    return {x, y, b, {}, sigma * b, std::move(log.record)};
}

} // namespace proxopt

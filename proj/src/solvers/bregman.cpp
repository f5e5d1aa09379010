#include "detail.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace proxopt {

BregmanResult run_bregman_iteration(const ProxSpec& g, const LinearOperator& A, const Vector& f,
                                    const SolverConfig& cfg, BregmanInner inner, bool full_path)
{
    require(A.valid(), "bregman: missing operator");
    require_dims(f.size(), A.rows(), "bregman data");
    require_positive(cfg.mu, "bregman: mu");
    require(cfg.noise_level >= 0.0, "bregman: noise level must be >= 0");
    require(cfg.disc_tau >= 1.0, "bregman: discrepancy factor must be >= 1");
    require(cfg.inner_max_iter >= 1, "bregman: inner_max_iter must be >= 1");

    const Index n = A.cols();
    const double mu = cfg.mu;
    const double threshold = cfg.disc_tau * cfg.noise_level;

    SolverConfig inner_cfg;
    inner_cfg.gamma = cfg.gamma;
    inner_cfg.max_iter = cfg.inner_max_iter;
    inner_cfg.tol = cfg.inner_tol;
    inner_cfg.log_every = cfg.inner_max_iter;
    inner_cfg.xstep = cfg.xstep;
    inner_cfg.cg_iters = cfg.cg_iters;
    inner_cfg.certified = cfg.certified;
    inner_cfg.seed = cfg.seed;

    // outer log: objective is g, the fidelity goes into primal_res
    SolverConfig log_cfg = cfg;
    log_cfg.tol = 0.0;
    log_cfg.target_rel_err = 0.0;
    std::function<double(const Vector&)> gval;
    if (g.has_value()) gval = [&g](const Vector& x) { return g.value(x); };
    else gval = [](const Vector&) { return std::numeric_limits<double>::quiet_NaN(); };
    detail::Logger log(inner == BregmanInner::admm ? "bregman_admm" : "bregman_pdhg", log_cfg,
                       nullptr, gval);

    BregmanResult out;
    Vector x = Vector::Zero(n);
    Vector q = Vector::Zero(f.size());  // subgradient p = A' q
    long long inner_total = 0;
    log.initial(x);

    for (int r = 1; r <= cfg.max_iter; ++r) {
        const Vector fr = f + q / mu;
        SolveResult sub;
        try {
            if (inner == BregmanInner::admm) {
                const double sm = std::sqrt(mu);
                CompositeProblem p;
                p.dim = n;
                p.smooth = make_least_squares(LinearOperator::scaled(A, sm), sm * fr);
                p.h = g;
                p.A = LinearOperator::identity(n);
                p.x0 = x;
                sub = run_admm(p, inner_cfg);
            } else {
                CompositeProblem p;
                p.dim = n;
                p.g = g;
                p.h = ProxSpec::squared_distance(mu, fr);
                p.A = A;
                p.x0 = x;
                sub = run_pdhgmp(p, inner_cfg);
            }
        } catch (const Error& e) {
            throw NumericalFailure("bregman: inner solve failed at outer iteration " +
                                   std::to_string(r) + ": " + e.what());
        }
        if (sub.record.diverged)
            throw NumericalFailure("bregman: inner solve diverged at outer iteration " +
                                   std::to_string(r));
        inner_total += sub.record.rows.empty() ? 0 : sub.record.rows.back().iter;

        const Vector x_old = x;
        x = sub.x;
        const Vector resid = f - A.apply(x);
        q += mu * resid;
        const double fid = resid.norm();
        out.path.push_back(x);
        out.fidelity.push_back(fid);
        detail::notify(cfg, r, x);

        const bool fired = out.stop_index < 0 && cfg.noise_level > 0.0 && fid <= threshold;
        if (fired) {
            out.stop_index = r;
            out.x = x;
        }
        const bool last = r == cfg.max_iter || (fired && !full_path);
        log.step(r, x, x_old, fid, (x - x_old).norm(), inner_total);
        if (last) break;
    }
    if (out.stop_index < 0) out.x = x;
    out.record = std::move(log.record);
    return out;
}

} // namespace proxopt

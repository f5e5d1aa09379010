#include "detail.hpp"

#include <cmath>

namespace proxopt {

SolveResult run_admm(const CompositeProblem& prob, const SolverConfig& cfg)
{
    prob.validate();
    require_positive(cfg.gamma, "admm: gamma");
    const double gamma = cfg.gamma;
    XStepSolver xs(prob, gamma, cfg.xstep, cfg.cg_iters);
    detail::Logger log("admm", cfg, &prob);

    Vector x = prob.x0;
    Vector Ax = prob.A.apply(x);
    Vector y = Ax;
    Vector b = Vector::Zero(Ax.size());
    log.initial(x);
    for (int r = 1;; ++r) {
        Vector x_new = xs.solve(y - b, x);
        Ax = prob.A.apply(x_new);
        Vector y_new = prob.h.prox(Ax + b, 1.0 / gamma);
        const Vector resid = Ax - y_new;
        b += resid;
        const double res = resid.norm();
        std::swap(x, x_new);
        y = std::move(y_new);
        if (cfg.observer) {
            const Vector p = gamma * b;
            detail::notify(cfg, r, x, &y, &b, nullptr, &p);
        }
        if (log.step(r, x, x_new, res, gamma * res, xs.inner_iterations())) break;
    }
    return {x, y, b, {}, gamma * b, std::move(log.record)};
}

SolveResult run_split_bregman(const CompositeProblem& prob, const SolverConfig& cfg, bool verify)
{
    prob.validate();
    require_positive(cfg.gamma, "split bregman: gamma");
    const double gamma = cfg.gamma;

    // reference trajectory from the scaled ADMM iteration
    std::vector<Vector> ref_x, ref_p;
    if (verify) {
        SolverConfig c = cfg;
        c.observer = [&](const IterateView& v) {
            ref_x.push_back(*v.x);
            ref_p.push_back(*v.p);
        };
        run_admm(prob, c);
    }

    XStepSolver xs(prob, gamma, cfg.xstep, cfg.cg_iters);
    detail::Logger log("split_bregman", cfg, &prob);
    Vector x = prob.x0;
    Vector Ax = prob.A.apply(x);
    Vector y = Ax;
    Vector p = Vector::Zero(Ax.size());
    log.initial(x);
    for (int r = 1;; ++r) {
        Vector x_new = xs.solve(y - p / gamma, x);
        Ax = prob.A.apply(x_new);
        y = prob.h.prox(Ax + p / gamma, 1.0 / gamma);
        const Vector resid = Ax - y;
        p += gamma * resid;
        std::swap(x, x_new);

        if (verify) {
            const auto k = static_cast<size_t>(r - 1);
            if (k >= ref_x.size() || (x - ref_x[k]).norm() > 1e-12 * (1.0 + x.norm()) ||
                (p - ref_p[k]).norm() > 1e-12 * (1.0 + p.norm()))
                throw NumericalFailure("split bregman: iterate " + std::to_string(r) +
                                       " differs from the ADMM iterate");
        }
        if (cfg.observer) {
            const Vector b = p / gamma;
            detail::notify(cfg, r, x, &y, &b, nullptr, &p);
        }
        const double res = resid.norm();
        if (log.step(r, x, x_new, res, gamma * res, xs.inner_iterations())) break;
    }
    return {x, y, p / gamma, {}, p, std::move(log.record)};
}

SolveResult run_pidsplit(const CompositeProblem& prob, const SolverConfig& cfg)
{
    prob.validate();
    require(prob.poisson.has_value(), "pidsplit: needs a Poisson-TV problem");
    const auto blocks = prob.A.blocks();
    require(blocks.size() == 3 && blocks[2].is_identity(),
            "pidsplit: operator must be the stack (K; grad; I)");
    require(prob.g.is_zero() && !prob.smooth, "pidsplit: all terms must live in h");
    require_positive(cfg.gamma, "pidsplit: gamma");
    require(cfg.cg_iters >= 1, "pidsplit: cg_iters must be >= 1");

    const double gamma = cfg.gamma;
    const LinearOperator& K = blocks[0];
    const LinearOperator& G = blocks[1];
    const Index m = K.rows(), q = G.rows(), n = prob.dim;

    // Jacobi preconditioner of I + K'K + G'G
    const Vector diag = Vector::Ones(n) + detail::column_sq_norms(K) + detail::column_sq_norms(G);

    detail::Logger log("pidsplit", cfg, &prob);
    Vector u = prob.x0;
    Vector Ku = K.apply(u);  // tracked by linearity afterwards
    Vector Gu = G.apply(u);
    Vector y(m + q + n);
    y << Ku, Gu, u;
    Vector b = Vector::Zero(m + q + n);
    long long inner = 0;
    log.initial(u);

    for (int r = 1;; ++r) {
        const Vector v = y - b;
        const Vector u_old = u;

        // PCG on (I + K'K + G'G) u = K'v1 + G'v2 + v3, warm started at u
        Vector res = K.adjoint(v.head(m) - Ku) + G.adjoint(v.segment(m, q) - Gu) + (v.tail(n) - u);
        Vector z = res.cwiseQuotient(diag);
        Vector dir = z;
        double rz = res.dot(z);
        for (int j = 0; j < cfg.cg_iters; ++j) {
            if (rz <= 0.0) break;
            const Vector Kp = K.apply(dir);
            const Vector Gp = G.apply(dir);
            const double pHp = dir.squaredNorm() + Kp.squaredNorm() + Gp.squaredNorm();
            if (!(pHp > 0.0)) break;
            const double alpha = rz / pHp;
            u += alpha * dir;
            Ku += alpha * Kp;
            Gu += alpha * Gp;
            ++inner;
            if (j + 1 == cfg.cg_iters) break;
            res -= alpha * (dir + K.adjoint(Kp) + G.adjoint(Gp));
            z = res.cwiseQuotient(diag);
            const double rz_new = res.dot(z);
            dir = z + (rz_new / rz) * dir;
            rz = rz_new;
        }

        Vector Au(m + q + n);
        Au << Ku, Gu, u;
        y = prob.h.prox(Au + b, 1.0 / gamma);
        const Vector resid = Au - y;
        b += resid;
        if (cfg.observer) {
            const Vector p = gamma * b;
            detail::notify(cfg, r, u, &y, &b, nullptr, &p);
        }
        const double rn = resid.norm();
        if (log.step(r, u, u_old, rn, gamma * rn, inner)) break;
    }
    return {u, y, b, {}, gamma * b, std::move(log.record)};
}

SolveResult run_proximal_admm(const CompositeProblem& prob, const SolverConfig& cfg,
                              const ProximalMetric& R)
{
    prob.validate();
    require_positive(cfg.gamma, "proximal admm: gamma");
    const double gamma = cfg.gamma;

    if (R.kind == ProximalMetric::Kind::explicit_diag) {
        require_dims(R.diag.size(), prob.dim, "proximal admm metric");
        XStepSolver xs(prob, gamma, cfg.xstep, cfg.cg_iters, R.diag);
        detail::Logger log("proximal_admm", cfg, &prob);
        Vector x = prob.x0;
        Vector Ax = prob.A.apply(x);
        Vector y = Ax;
        Vector b = Vector::Zero(Ax.size());
        log.initial(x);
        for (int r = 1;; ++r) {
            Vector x_new = xs.solve(y - b, x);
            Ax = prob.A.apply(x_new);
            y = prob.h.prox(Ax + b, 1.0 / gamma);
            const Vector resid = Ax - y;
            b += resid;
            std::swap(x, x_new);
            detail::notify(cfg, r, x, &y, &b);
            const double rn = resid.norm();
            if (log.step(r, x, x_new, rn, gamma * rn, xs.inner_iterations())) break;
        }
        return {x, y, b, {}, gamma * b, std::move(log.record)};
    }

    // linearized: R = I/tau - gamma A'A, so the x-step is a plain prox of g
    require(!prob.smooth, "linearized admm: g must be proximable");
    const double nA = power_method_norm(prob.A, 1e-10, 100000, cfg.seed).norm;
    const double tau = cfg.tau > 0.0 ? cfg.tau : 0.99 / (gamma * nA * nA);
    if (!(tau * gamma * nA * nA < 1.0))
        throw InvalidArgument("linearized admm: tau must satisfy tau * gamma * ||A||^2 < 1");

    detail::Logger log("linearized_admm", cfg, &prob);
    Vector x = prob.x0;
    Vector Ax = prob.A.apply(x);
    Vector y = Ax;
    Vector b = Vector::Zero(Ax.size());
    log.initial(x);
    for (int r = 1;; ++r) {
        Vector x_new = prob.g.prox(x - tau * gamma * prob.A.adjoint(Ax - y + b), tau);
        Ax = prob.A.apply(x_new);
        y = prob.h.prox(Ax + b, 1.0 / gamma);
        const Vector resid = Ax - y;
        b += resid;
        std::swap(x, x_new);
        detail::notify(cfg, r, x, &y, &b);
        const double rn = resid.norm();
        if (log.step(r, x, x_new, rn, gamma * rn, 0)) break;
    }
    return {x, y, b, {}, gamma * b, std::move(log.record)};
}

// ---------------------------------------------------------------------------
// Douglas-Rachford

SolveResult run_drs(const ProxMap& prox_g, const ProxMap& prox_h, const Vector& t0,
                    const SolverConfig& cfg, const std::function<double(const Vector&)>& objective)
{
    require(static_cast<bool>(prox_g) && static_cast<bool>(prox_h), "drs: missing prox");
    const double eta = cfg.step > 0.0 ? cfg.step : 1.0;
    detail::Logger log("drs", cfg, nullptr, objective);

    Vector t = t0;
    Vector x = prox_g(t, eta);
    log.initial(x);
    for (int r = 1;; ++r) {
        Vector t_new = prox_h(2.0 * x - t, eta) + t - x;
        Vector x_new = prox_g(t_new, eta);
        const double dt = (t_new - t).norm();
        t = std::move(t_new);
        std::swap(x, x_new);
        detail::notify(cfg, r, x, nullptr, nullptr, &t);
        if (log.step(r, x, x_new, 0.0, dt, 0)) break;
    }
    return {x, {}, {}, t, {}, std::move(log.record)};
}

SolveResult run_drs(const ProxSpec& g, const ProxSpec& h, const Vector& t0, const SolverConfig& cfg)
{
    std::function<double(const Vector&)> obj;
    if (g.has_value() && h.has_value())
        obj = [g, h](const Vector& x) { return g.value(x) + h.value(x); };
    return run_drs([g](const Vector& v, double e) { return g.prox(v, e); },
                   [h](const Vector& v, double e) { return h.prox(v, e); }, t0, cfg, obj);
}

SolveResult run_drs_dual(const CompositeProblem& prob, const SolverConfig& cfg)
{
    prob.validate();
    const double eta = cfg.step > 0.0 ? cfg.step : cfg.gamma;
    require_positive(eta, "drs dual: step");
    XStepSolver xs(prob, eta, cfg.xstep, cfg.cg_iters);
    detail::Logger log("drs_dual", cfg, &prob);

    // dual function phi(p) = (s + g)^*(-A'p); its prox at w is eta A xhat + w
    // where xhat minimizes s + g + eta/2 ||A x + w/eta||^2.
    const Index m = prob.A.rows();
    Vector t = Vector::Zero(m);
    Vector p = prob.h.prox_conjugate(t, eta);
    Vector x = prob.x0;
    Vector y = (t - p) / eta;
    log.initial(x);
    for (int r = 1;; ++r) {
        const Vector w = 2.0 * p - t;
        Vector x_new = xs.solve(-w / eta, x);
        const Vector Ax = prob.A.apply(x_new);
        Vector t_new = eta * Ax + w + t - p;
        Vector p_new = prob.h.prox_conjugate(t_new, eta);
        const double dt = (t_new - t).norm();
        t = std::move(t_new);
        p = std::move(p_new);
        y = (t - p) / eta;
        std::swap(x, x_new);
        if (cfg.observer) {
            const Vector b = p / eta;
            detail::notify(cfg, r, x, &y, &b, &t, &p);
        }
        if (log.step(r, x, x_new, (Ax - y).norm(), dt, xs.inner_iterations())) break;
    }
    return {x, y, p / eta, t, p, std::move(log.record)};
}

} // namespace proxopt

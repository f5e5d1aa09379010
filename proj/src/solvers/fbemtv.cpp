#include "detail.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace proxopt {

namespace {

constexpr double kFloor = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

// project each pixel's gradient pair onto the ball of radius lam
void project_dual(Vector& p, Index n, double lam)
{
    for (Index i = 0; i < n; ++i) {
        const double a = p[i], b = p[n + i];
        const double nrm = std::hypot(a, b);
        if (nrm > lam) {
            const double s = lam / nrm;
            p[i] = a * s;
            p[n + i] = b * s;
        }
    }
}

/* argmin_{u >= 0} 1/2 ||u - v||_w^2 + lam TV(u) with min(w) = 1, by the
 * Arrow-Hurwicz iteration without extrapolation. The primal starts cold at v,
 * p is the warm-started dual. */
struct WeightedTvResult {
    Vector u;
    int iters;
};

WeightedTvResult weighted_tv_prox(const LinearOperator& grad, const Vector& v, const Vector& w,
                                  double lam, Vector& p, double delta, int max_iter)
{
    const Index n = v.size();
    if (lam <= 0.0) {
        p.setZero();
        return {v.cwiseMax(0.0), 0};
    }
    // tau sigma ||grad||^2 < 1; the primal step is large since w >= 1 keeps it stable
    const double tau = 1.0, sigma = 0.98 / (8.0 * tau);
    const Vector wv = w.cwiseProduct(v);
    const Vector denom = (w.array() + 1.0 / tau).matrix();

    project_dual(p, n, lam);
    Vector u = v.cwiseMax(0.0);
    int k = 0;
    while (k < max_iter) {
        ++k;
        Vector p_new = p + sigma * grad.apply(u);
        project_dual(p_new, n, lam);
        const Vector z = u - tau * grad.adjoint(p_new);
        Vector u_new = ((wv + z / tau).cwiseQuotient(denom)).cwiseMax(0.0);

        const Vector du = u_new - u;
        const double gnorm = grad.apply(u_new).norm();
        const double dnum = ((p_new - p) / sigma + grad.apply(du)).norm();
        const double unorm = u_new.norm();
        const double d = gnorm > 0.0 ? dnum / gnorm : (dnum > 0.0 ? kInf : 0.0);
        const double pr = unorm > 0.0 ? du.norm() / unorm : (du.norm() > 0.0 ? kInf : 0.0);
        p = std::move(p_new);
        u = std::move(u_new);
        if (std::max(d, pr) <= delta) break;
    }
    return {u, k};
}

} // namespace

SolveResult run_variable_metric_fb(const CompositeProblem& prob, const SolverConfig& cfg)
{
    prob.validate();
    require(prob.poisson.has_value(), "variable metric fb: needs a Poisson-TV problem");
    const PoissonTvData& data = *prob.poisson;
    require((data.counts.array() >= 0.0).all(), "variable metric fb: counts must be >= 0");
    require((prob.x0.array() > 0.0).all(), "variable metric fb: initial image must be > 0");
    require_positive(cfg.inner_tol, "variable metric fb: inner tolerance");
    require(cfg.damping > 0.0 && cfg.damping <= 1.0, "variable metric fb: damping must lie in (0, 1]");
    require(cfg.inner_decay > 0.0 && cfg.inner_decay <= 1.0,
            "variable metric fb: inner decay must lie in (0, 1]");
    require(cfg.inner_max_iter >= 1, "variable metric fb: inner_max_iter must be >= 1");
    require(data.alpha >= 0.0, "variable metric fb: alpha must be >= 0");

    const Index n = prob.dim;
    require_dims(data.height * data.width, n, "variable metric fb image");
    const LinearOperator grad = LinearOperator::grad2d(data.height, data.width);
    const Vector s = data.sensitivity.cwiseMax(kFloor);
    const double eta = cfg.damping;

    detail::Logger log(cfg.accelerate ? "fb_em_tv_nes83" : "fb_em_tv", cfg, &prob);
    Vector u = prob.x0;
    Vector yv = u;             // extrapolated point (equals u without acceleration)
    Vector P = Vector::Zero(2 * n);  // dual of the TV prox, unnormalized
    double t = 1.0;
    long long inner = 0;
    double delta = cfg.inner_tol;
    log.initial(u);

    for (int r = 1;; ++r) {
        // EM step at yv
        const Vector Ky = data.K.apply(yv).cwiseMax(kFloor);
        const Vector back = data.K.adjoint(data.counts.cwiseQuotient(Ky));
        const Vector em = yv.cwiseProduct(back).cwiseQuotient(s);
        const Vector v = (1.0 - eta) * yv + eta * em;
        Vector w = s.cwiseQuotient(yv.cwiseMax(kFloor));

        // normalize the metric so that the inner step sizes stay meaningful; the
        // smallest weight sits on the brightest pixel, background weights blow up
        const double c = w.minCoeff();
        w /= c;
        const double lam = eta * data.alpha / c;
        Vector p = P / c;
        auto tv = weighted_tv_prox(grad, v, w, lam, p, delta, cfg.inner_max_iter);
        P = c * p;
        inner += tv.iters;
        delta *= cfg.inner_decay;

        Vector u_old = std::move(u);
        u = std::move(tv.u);
        if (cfg.accelerate) {
            const double t_new = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
            yv = (u + ((t - 1.0) / t_new) * (u - u_old)).cwiseMax(kFloor);
            t = t_new;
        } else {
            yv = u.cwiseMax(kFloor);
        }
        detail::notify(cfg, r, u);
        if (log.step(r, u, u_old, 0.0, (u - u_old).norm(), inner)) break;
    }
    return {u, {}, {}, {}, {}, std::move(log.record)};
}

} // namespace proxopt

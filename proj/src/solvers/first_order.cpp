#include "detail.hpp"

#include <cmath>

namespace proxopt {

SolveResult run_ppa(const CompositeProblem& prob, const SolverConfig& cfg)
{
    prob.validate();
    require_positive(cfg.lambda, "ppa: lambda");
    require(!prob.smooth, "ppa: g must be proximable, not a smooth term");
    const ProxMap prox = detail::nonsmooth_prox(prob);

    detail::Logger log("ppa", cfg, &prob);
    Vector x = prob.x0;
    log.initial(x);
    for (int r = 1;; ++r) {
        Vector next = prox(x, cfg.lambda);
        const double change = (next - x).norm();
        std::swap(x, next);
        detail::notify(cfg, r, x);
        if (log.step(r, x, next, 0.0, change, 0)) break;
    }
    return {x, {}, {}, {}, {}, std::move(log.record)};
}

namespace {

double fbs_step(const CompositeProblem& prob, const SolverConfig& cfg, double limit,
                const char* who, detail::Logger& log)
{
    require(prob.smooth.has_value(), std::string(who) + ": needs a smooth term");
    const double L = prob.smooth->lipschitz;
    const double eta = cfg.step > 0.0 ? cfg.step : 1.0 / L;
    // FBS needs eta L < 2; the accelerated rate needs eta L <= 1
    const bool ok = limit == 1.0 ? eta * L <= 1.0 + 1e-12 : eta * L < limit;
    if (!(eta > 0.0) || !ok) {
        const std::string msg = std::string(who) + ": step outside the convergent range";
        if (cfg.certified) throw InvalidArgument(msg);
        log.warn(msg);
    }
    return eta;
}

} // namespace

SolveResult run_proximal_gradient(const CompositeProblem& prob, const SolverConfig& cfg)
{
    prob.validate();
    detail::Logger log("fbs", cfg, &prob);
    const double eta = fbs_step(prob, cfg, 2.0, "proximal gradient", log);
    const ProxMap prox = detail::nonsmooth_prox(prob);

    Vector x = prob.x0;
    log.initial(x);
    for (int r = 1;; ++r) {
        Vector next = prox(x - eta * prob.smooth->gradient(x), eta);
        const double change = (next - x).norm();
        std::swap(x, next);
        detail::notify(cfg, r, x);
        if (log.step(r, x, next, 0.0, change, 0)) break;
    }
    return {x, {}, {}, {}, {}, std::move(log.record)};
}

SolveResult run_fast_proximal_gradient(const CompositeProblem& prob, const SolverConfig& cfg)
{
    prob.validate();
    detail::Logger log("fista", cfg, &prob);
    const double eta = fbs_step(prob, cfg, 1.0, "fast proximal gradient", log);
    const ProxMap prox = detail::nonsmooth_prox(prob);

    Vector x = prob.x0, z = prob.x0, y;
    log.initial(x);
    for (int r = 0;; ++r) {
        const double theta = 2.0 / (r + 2.0);
        y = (1.0 - theta) * x + theta * z;
        Vector next = prox(y - eta * prob.smooth->gradient(y), eta);
        z = x + (next - x) / theta;
        const double change = (next - x).norm();
        std::swap(x, next);
        detail::notify(cfg, r + 1, x, &y, nullptr, nullptr, nullptr);
        if (log.step(r + 1, x, next, 0.0, change, 0)) break;
    }
    return {x, y, {}, {}, {}, std::move(log.record)};
}

} // namespace proxopt

#include "proxopt/problems.hpp"

#include <cmath>
#include <limits>

namespace proxopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// per-pixel (vertical, horizontal) pairs of L channel-stacked gradients
GroupPartition tv_groups(Index n, Index channels)
{
    if (channels == 1) return GroupPartition::strided(n, 2);
    std::vector<std::vector<Index>> groups;
    groups.reserve(static_cast<size_t>(n * channels));
    for (Index l = 0; l < channels; ++l)
        for (Index i = 0; i < n; ++i) groups.push_back({l * 2 * n + i, l * 2 * n + n + i});
    return GroupPartition::from_groups(groups, 2 * n * channels);
}

ProxSpec tv_term(double alpha, Index n, Index channels, bool anisotropic)
{
    if (alpha == 0.0) return ProxSpec::zero();
    if (anisotropic) return ProxSpec::norm(Norm::l1, alpha);
    return ProxSpec::group_l21(alpha, tv_groups(n, channels));
}

double kl_value(const Vector& Ku, const Vector& f)
{
    double v = 0.0;
    for (Index m = 0; m < Ku.size(); ++m) {
        v += Ku[m];
        if (f[m] > 0.0) v -= f[m] * std::log(std::max(Ku[m], kKlFloor));
    }
    return v;
}

void check_image(Index h, Index w, Index n, const char* who)
{
    require(h >= 1 && w >= 1, std::string(who) + ": image sides must be >= 1");
    require_dims(h * w, n, who);
}

[[noreturn]] void unsupported(const char* model, Splitting s)
{
    throw InvalidArgument(std::string(model) + " cannot be solved with the " + splitting_name(s) +
                          " splitting");
}

// ---------------------------------------------------------------------------

void validate(const RofSpec& s)
{
    check_image(s.height, s.width, s.f.size(), "rof");
    require_finite(s.f, "rof data");
    require_positive(s.alpha, "rof: alpha");
}

void validate(const LassoSpec& s)
{
    require(s.K.valid(), "lasso: missing operator");
    require_dims(s.b.size(), s.K.rows(), "lasso data");
    require_finite(s.b, "lasso data");
    require_positive(s.lambda, "lasso: lambda");
}

void validate(const PoissonTvSpec& s)
{
    require(s.K.valid(), "poisson-tv: missing operator");
    require_dims(s.counts.size(), s.K.rows(), "poisson-tv counts");
    check_image(s.height, s.width, s.K.cols(), "poisson-tv");
    require_finite(s.counts, "poisson-tv counts");
    require((s.counts.array() >= 0.0).all(), "poisson-tv: counts must be >= 0");
    require(std::isfinite(s.alpha) && s.alpha >= 0.0, "poisson-tv: alpha must be >= 0");
}

void validate(const PwlsSpec& s)
{
    require(s.K.valid(), "pwls: missing operator");
    require(s.channels >= 1, "pwls: channels must be >= 1");
    require_dims(s.data.size(), s.channels * s.K.rows(), "pwls data");
    require_dims(s.cov.rays(), s.K.rows(), "pwls covariance rays");
    require_dims(s.cov.channels(), s.channels, "pwls covariance channels");
    check_image(s.height, s.width, s.K.cols(), "pwls");
    require_finite(s.data, "pwls data");
    require_positive(s.alpha, "pwls: alpha");
}

// ---------------------------------------------------------------------------

CompositeProblem build(const RofSpec& s, Splitting sp)
{
    validate(s);
    const Index n = s.f.size();
    CompositeProblem p;
    p.name = "rof";
    p.dim = n;
    p.x0 = Vector::Zero(n);
    switch (sp) {
    case Splitting::admm:
    case Splitting::pdhg:
        p.g = ProxSpec::squared_distance(1.0, s.f);
        p.h = tv_term(s.alpha, n, 1, s.anisotropic);
        p.A = LinearOperator::grad2d(s.height, s.width);
        return p;
    default:
        unsupported("rof", sp);
    }
}

CompositeProblem build(const LassoSpec& s, Splitting sp)
{
    validate(s);
    const Index d = s.K.cols();
    CompositeProblem p;
    p.name = "lasso";
    p.dim = d;
    p.x0 = Vector::Zero(d);
    switch (sp) {
    case Splitting::proximal_gradient:
    case Splitting::admm:
        p.smooth = make_least_squares(s.K, s.b);
        p.h = ProxSpec::norm(Norm::l1, s.lambda);
        p.A = LinearOperator::identity(d);
        return p;
    case Splitting::pdhg:
        p.g = ProxSpec::norm(Norm::l1, s.lambda);
        p.h = ProxSpec::squared_distance(1.0, s.b);
        p.A = s.K;
        return p;
    default:
        unsupported("lasso", sp);
    }
}

CompositeProblem build(const PoissonTvSpec& s, Splitting sp)
{
    validate(s);
    const Index n = s.K.cols(), m = s.K.rows();
    auto counter = s.counter ? s.counter : std::make_shared<OpCounter>();
    const LinearOperator Kc = LinearOperator::counted(s.K, counter);
    const LinearOperator G = LinearOperator::grad2d(s.height, s.width);
    const Vector sens = s.K.adjoint(Vector::Ones(m));

    CompositeProblem p;
    p.name = "poisson_tv";
    p.dim = n;
    p.counter = counter;
    p.poisson = PoissonTvData{Kc, s.counts, sens, s.alpha, s.height, s.width};
    // flat start with the measured total mass
    const double mass = sens.sum() > 0.0 ? s.counts.sum() / sens.sum() : 0.0;
    p.x0 = Vector::Constant(n, mass > 0.0 ? mass : 1.0);
    const PoissonTvSpec plain = s;
    p.objective = [plain](const Vector& u) { return objective_eval(plain, u); };

    const ProxSpec kl = ProxSpec::poisson_kl(s.counts);
    const ProxSpec tv = tv_term(s.alpha, n, 1, false);
    const ProxSpec pos = s.nonnegative ? ProxSpec::indicator(SetSpec::nonnegative(n)) : ProxSpec::zero();
    switch (sp) {
    case Splitting::admm:
    case Splitting::pidsplit:
        p.h = ProxSpec::blocks({{m, kl}, {2 * n, tv}, {n, pos}});
        p.A = LinearOperator::stack({Kc, G, LinearOperator::identity(n)});
        return p;
    case Splitting::pdhg:
        p.g = pos;
        p.h = ProxSpec::blocks({{m, kl}, {2 * n, tv}});
        p.A = LinearOperator::stack({Kc, G});
        return p;
    case Splitting::variable_metric:
        require(s.nonnegative, "poisson-tv: the EM splitting keeps iterates nonnegative");
        p.g = pos;
        p.h = tv;
        p.A = G;
        return p;
    default:
        unsupported("poisson-tv", sp);
    }
}

CompositeProblem build(const PwlsSpec& s, Splitting sp)
{
    validate(s);
    const Index n = s.K.cols(), L = s.channels;
    CompositeProblem p;
    p.name = "pwls";
    p.dim = L * n;
    p.x0 = Vector::Zero(L * n);
    switch (sp) {
    case Splitting::admm:
    case Splitting::pdhg:
        p.h = ProxSpec::blocks({{L * s.K.rows(), ProxSpec::correlated_quadratic(s.data, s.effective_cov())},
                                {2 * n * L, tv_term(s.alpha, n, L, false)}});
        p.A = LinearOperator::stack({LinearOperator::kron_identity(s.K, L),
                                     LinearOperator::kron_identity(LinearOperator::grad2d(s.height, s.width), L)});
        return p;
    default:
        unsupported("pwls", sp);
    }
}

} // namespace

BlockCovariance PwlsSpec::effective_cov() const
{
    return coupling == Coupling::full ? cov : cov.diagonal_only();
}

const char* splitting_name(Splitting s)
{
    switch (s) {
    case Splitting::proximal_gradient: return "proximal-gradient";
    case Splitting::admm: return "admm";
    case Splitting::pdhg: return "pdhg";
    case Splitting::pidsplit: return "pidsplit";
    case Splitting::variable_metric: return "variable-metric";
    }
    return "unknown";
}

CompositeProblem build_problem(const ProblemSpec& spec, Splitting splitting)
{
    return std::visit([&](const auto& s) { return build(s, splitting); }, spec);
}

double total_variation(const Vector& u, Index h, Index w, bool anisotropic)
{
    require_dims(u.size(), h * w, "total variation");
    const Vector d = LinearOperator::grad2d(h, w).apply(u);
    const Index n = h * w;
    double tv = 0.0;
    for (Index i = 0; i < n; ++i)
        tv += anisotropic ? std::abs(d[i]) + std::abs(d[n + i]) : std::hypot(d[i], d[n + i]);
    return tv;
}

double objective_eval(const ProblemSpec& spec, const Vector& x)
{
    return std::visit(
        [&](const auto& s) -> double {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, RofSpec>) {
                require_dims(x.size(), s.f.size(), "rof objective");
                return 0.5 * (x - s.f).squaredNorm() +
                       s.alpha * total_variation(x, s.height, s.width, s.anisotropic);
            } else if constexpr (std::is_same_v<T, LassoSpec>) {
                return 0.5 * (s.K.apply(x) - s.b).squaredNorm() + s.lambda * x.template lpNorm<1>();
            } else if constexpr (std::is_same_v<T, PoissonTvSpec>) {
                require_dims(x.size(), s.K.cols(), "poisson-tv objective");
                if (s.nonnegative && (x.array() < 0.0).any()) return kInf;
                double v = kl_value(s.K.apply(x), s.counts);
                if (s.alpha > 0.0) v += s.alpha * total_variation(x, s.height, s.width);
                return v;
            } else {
                const Index n = s.K.cols();
                require_dims(x.size(), s.channels * n, "pwls objective");
                const Vector r = LinearOperator::kron_identity(s.K, s.channels).apply(x) - s.data;
                double v = 0.5 * r.dot(s.effective_cov().apply_inverse(r));
                for (Index l = 0; l < s.channels; ++l)
                    v += s.alpha * total_variation(x.segment(l * n, n), s.height, s.width);
                return v;
            }
        },
        spec);
}

double relative_error(const Vector& u, const Vector& ref)
{
    require_dims(u.size(), ref.size(), "relative error");
    const double rn = ref.norm();
    if (!(rn > 0.0)) throw InvalidArgument("relative error: reference has zero norm");
    return (u - ref).norm() / rn;
}

Vector pwls_gradient(const PwlsSpec& spec, const Vector& u)
{
    validate(spec);
    require_dims(u.size(), spec.channels * spec.K.cols(), "pwls gradient");
    const LinearOperator KL = LinearOperator::kron_identity(spec.K, spec.channels);
    return KL.adjoint(spec.effective_cov().apply_inverse(KL.apply(u) - spec.data));
}

} // namespace proxopt

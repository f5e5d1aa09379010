#include "proxopt/prox.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>

namespace proxopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double soft1(double x, double lambda)
{
    if (x > lambda) return x - lambda;
    if (x < -lambda) return x + lambda;
    return 0.0;
}

bool all_equal(const Vector& v)
{
    return v.size() == 0 || (v.array() == v[0]).all();
}

void require_positive_steps(const Vector& steps, const char* where)
{
    for (Index i = 0; i < steps.size(); ++i)
        if (!(steps[i] > 0.0) || !std::isfinite(steps[i]))
            throw InvalidArgument(std::string(where) + ": step sizes must be positive");
}

} // namespace

// ---------------------------------------------------------------------------
// scalar catalog

double scalar_value(const ScalarProxSpec& g, double t)
{
    return std::visit(
        [&](const auto& s) -> double {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, ScalarQuadratic>) {
                return 0.5 * s.weight * t * t;
            } else if constexpr (std::is_same_v<T, ScalarAbs>) {
                return std::abs(t);
            } else {
                const double a = std::abs(t);
                return a <= s.delta ? t * t / (2.0 * s.delta) : a - 0.5 * s.delta;
            }
        },
        g);
}

double scalar_prox(const ScalarProxSpec& g, double x, double lambda)
{
    return std::visit(
        [&](const auto& s) -> double {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, ScalarQuadratic>) {
                return x / (1.0 + lambda * s.weight);
            } else if constexpr (std::is_same_v<T, ScalarAbs>) {
                return soft1(x, lambda);
            } else {
                if (std::abs(x) <= s.delta + lambda) return x * s.delta / (s.delta + lambda);
                return x > 0.0 ? x - lambda : x + lambda;
            }
        },
        g);
}

bool smooth_at_zero(const ScalarProxSpec& g)
{
    return !std::holds_alternative<ScalarAbs>(g);
}

static void validate_scalar(const ScalarProxSpec& g)
{
    if (const auto* q = std::get_if<ScalarQuadratic>(&g))
        require(q->weight >= 0.0 && std::isfinite(q->weight), "quadratic weight must be >= 0");
    if (const auto* h = std::get_if<ScalarHuber>(&g)) require_positive(h->delta, "huber delta");
}

// ---------------------------------------------------------------------------
// group partitions

GroupPartition GroupPartition::from_groups(const std::vector<std::vector<Index>>& groups,
                                           Index dim)
{
    require(dim >= 1, "group partition: empty index range");
    std::vector<char> seen(static_cast<size_t>(dim), 0);
    GroupPartition p;
    p.dim_ = dim;
    p.offsets_.push_back(0);
    for (const auto& g : groups) {
        require(!g.empty(), "group partition: empty group");
        for (Index i : g) {
            require(i >= 0 && i < dim, "group partition: index out of range");
            if (seen[static_cast<size_t>(i)])
                throw InvalidArgument("group partition: overlapping groups");
            seen[static_cast<size_t>(i)] = 1;
            p.indices_.push_back(i);
        }
        p.offsets_.push_back(static_cast<Index>(p.indices_.size()));
    }
    if (static_cast<Index>(p.indices_.size()) != dim)
        throw InvalidArgument("group partition: groups do not cover the index range");
    return p;
}

GroupPartition GroupPartition::contiguous(Index n_groups, Index group_size)
{
    require(n_groups >= 1 && group_size >= 1, "group partition: bad sizes");
    GroupPartition p;
    p.dim_ = n_groups * group_size;
    p.indices_.resize(static_cast<size_t>(p.dim_));
    for (Index i = 0; i < p.dim_; ++i) p.indices_[static_cast<size_t>(i)] = i;
    for (Index g = 0; g <= n_groups; ++g) p.offsets_.push_back(g * group_size);
    return p;
}

GroupPartition GroupPartition::strided(Index n_groups, Index group_size)
{
    require(n_groups >= 1 && group_size >= 1, "group partition: bad sizes");
    GroupPartition p;
    p.dim_ = n_groups * group_size;
    p.offsets_.push_back(0);
    for (Index g = 0; g < n_groups; ++g) {
        for (Index k = 0; k < group_size; ++k) p.indices_.push_back(g + k * n_groups);
        p.offsets_.push_back(static_cast<Index>(p.indices_.size()));
    }
    return p;
}

// ---------------------------------------------------------------------------
// vector and matrix catalog

Vector soft_threshold(const Vector& x, double lambda)
{
    require(lambda >= 0.0 && std::isfinite(lambda), "soft_threshold: lambda must be >= 0");
    require_finite(x, "soft_threshold");
    Vector out(x.size());
    for (Index i = 0; i < x.size(); ++i) out[i] = soft1(x[i], lambda);
    return out;
}

Vector prox_vector_norm(const Vector& x, Norm p, double lambda)
{
    require_positive(lambda, "prox_vector_norm: lambda");
    require_finite(x, "prox_vector_norm");
    switch (p) {
    case Norm::l1: return soft_threshold(x, lambda);
    case Norm::l2: return x - project_l2_ball(x, lambda);
    case Norm::linf: return x - project_l1_ball(x, lambda);
    }
    throw InvalidArgument("prox_vector_norm: unsupported norm");
}

Vector prox_group_l21(const Vector& x, double lambda, const GroupPartition& part)
{
    require_positive(lambda, "prox_group_l21: lambda");
    require_dims(x.size(), part.dim(), "prox_group_l21");
    require_finite(x, "prox_group_l21");
    Vector out(x.size());
    part.for_each_group([&](Index, const Index* idx, Index n) {
        double sq = 0.0;
        for (Index k = 0; k < n; ++k) sq += x[idx[k]] * x[idx[k]];
        const double nrm = std::sqrt(sq);
        const double scale = nrm <= lambda ? 0.0 : 1.0 - lambda / nrm;
        for (Index k = 0; k < n; ++k) out[idx[k]] = scale * x[idx[k]];
    });
    return out;
}

Vector prox_elastic_net(const Vector& x, double lambda, double mu)
{
    require_positive(lambda, "prox_elastic_net: lambda");
    require(mu >= 0.0 && std::isfinite(mu), "prox_elastic_net: mu must be >= 0");
    return soft_threshold(x, lambda * mu) / (1.0 + lambda);
}

Vector prox_compose_abs(const ScalarProxSpec& g, double mu, double lambda, const Vector& x)
{
    if (!smooth_at_zero(g))
        throw InvalidArgument("prox_compose_abs: g must be differentiable at 0 with g'(0) = 0");
    validate_scalar(g);
    require_positive(lambda, "prox_compose_abs: lambda");
    require(mu >= 0.0 && std::isfinite(mu), "prox_compose_abs: mu must be >= 0");
    Vector out = soft_threshold(x, lambda * mu);
    for (Index i = 0; i < out.size(); ++i) out[i] = scalar_prox(g, out[i], lambda);
    return out;
}

double matrix_norm(const Matrix& X, MatrixNorm which)
{
    if (!X.allFinite()) throw NumericalFailure("matrix_norm: non-finite entries");
    if (X.size() == 0) return 0.0;
    const Vector s = Eigen::JacobiSVD<Matrix>(X).singularValues();
    switch (which) {
    case MatrixNorm::nuclear: return s.sum();
    case MatrixNorm::frobenius: return s.norm();
    case MatrixNorm::spectral: return s.size() ? s.maxCoeff() : 0.0;
    }
    throw InvalidArgument("matrix_norm: unsupported norm");
}

Matrix prox_matrix_norm(const Matrix& X, MatrixNorm which, double lambda)
{
    require_positive(lambda, "prox_matrix_norm: lambda");
    require(X.rows() >= 1 && X.cols() >= 1, "prox_matrix_norm: empty matrix");
    if (!X.allFinite()) throw NumericalFailure("prox_matrix_norm: non-finite entries");
    if ((X.array() == 0.0).all()) return X;

    Eigen::JacobiSVD<Matrix> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Vector s = svd.singularValues();
    const double cutoff = 1e-14 * s.maxCoeff();
    for (Index i = 0; i < s.size(); ++i)
        if (s[i] < cutoff) s[i] = 0.0;

    Norm gauge = Norm::l1;
    if (which == MatrixNorm::frobenius) gauge = Norm::l2;
    if (which == MatrixNorm::spectral) gauge = Norm::linf;
    const Vector shrunk = prox_vector_norm(s, gauge, lambda);
    return svd.matrixU() * shrunk.asDiagonal() * svd.matrixV().transpose();
}

Vector prox_separable_diag(const Vector& x, const Vector& weights, double lambda,
                           const ScalarProxSpec& f)
{
    require_dims(weights.size(), x.size(), "prox_separable_diag");
    require_positive(lambda, "prox_separable_diag: lambda");
    require_finite(x, "prox_separable_diag");
    validate_scalar(f);
    for (Index i = 0; i < weights.size(); ++i)
        if (!(weights[i] > 0.0) || !std::isfinite(weights[i]))
            throw InvalidArgument("prox_separable_diag: weights must be positive");
    Vector out(x.size());
    for (Index i = 0; i < x.size(); ++i) out[i] = scalar_prox(f, x[i], lambda / weights[i]);
    return out;
}

namespace {

// Positive root of y^2 - (v - t) y - t f = 0 without cancellation.
double kl_root(double v, double t, double f)
{
    const double c = v - t;
    if (f == 0.0) return std::max(c, 0.0);
    const double disc = std::sqrt(c * c + 4.0 * t * f);
    if (c >= 0.0) return 0.5 * (c + disc);
    return 2.0 * t * f / (disc - c);
}

} // namespace

Vector prox_poisson_kl(const Vector& v, double t, const Vector& counts)
{
    require_positive(t, "prox_poisson_kl: t");
    require_dims(counts.size(), v.size(), "prox_poisson_kl");
    require_finite(v, "prox_poisson_kl");
    require(counts.allFinite() && (counts.array() >= 0.0).all(),
            "prox_poisson_kl: counts must be nonnegative");
    Vector out(v.size());
    for (Index i = 0; i < v.size(); ++i) out[i] = kl_root(v[i], t, counts[i]);
    return out;
}

// ---------------------------------------------------------------------------
// ProxSpec

ProxSpec ProxSpec::norm(Norm p, double weight)
{
    require_positive(weight, "norm weight");
    return ProxSpec(NormTerm{p, weight});
}

ProxSpec ProxSpec::group_l21(double weight, GroupPartition part)
{
    require_positive(weight, "group weight");
    return ProxSpec(GroupL21{weight, std::move(part)});
}

ProxSpec ProxSpec::indicator(SetSpec set) { return ProxSpec(Indicator{std::move(set)}); }

ProxSpec ProxSpec::squared_distance(double weight, Vector target)
{
    require_positive(weight, "squared distance weight");
    require_finite(target, "squared distance target");
    return ProxSpec(SquaredDistance{weight, std::move(target)});
}

ProxSpec ProxSpec::elastic_net(double mu)
{
    require(mu >= 0.0 && std::isfinite(mu), "elastic net: mu must be >= 0");
    return ProxSpec(ElasticNet{mu});
}

ProxSpec ProxSpec::separable(ScalarProxSpec g)
{
    validate_scalar(g);
    return ProxSpec(Separable{g});
}

ProxSpec ProxSpec::poisson_kl(Vector counts)
{
    require(counts.allFinite() && (counts.array() >= 0.0).all(),
            "poisson data: counts must be nonnegative");
    return ProxSpec(PoissonKl{std::move(counts)});
}

ProxSpec ProxSpec::correlated_quadratic(Vector data, BlockCovariance cov)
{
    require_dims(data.size(), cov.dim(), "correlated quadratic");
    require_finite(data, "correlated quadratic data");
    return ProxSpec(CorrelatedQuadratic{std::move(data), std::move(cov)});
}

ProxSpec ProxSpec::blocks(std::vector<std::pair<Index, ProxSpec>> parts)
{
    require(!parts.empty(), "block separable: no blocks");
    BlockSeparable b;
    for (auto& [size, spec] : parts) {
        require(size >= 1, "block separable: empty block");
        b.blocks.push_back({size, std::make_shared<const ProxSpec>(std::move(spec))});
    }
    return ProxSpec(std::move(b));
}

ProxSpec ProxSpec::custom(ProxMap prox, std::string name)
{
    require(static_cast<bool>(prox), "custom prox: empty callable");
    return ProxSpec(Custom{std::move(prox), std::move(name)});
}

std::string ProxSpec::name() const
{
    return std::visit(
        [](const auto& s) -> std::string {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Zero>) return "zero";
            else if constexpr (std::is_same_v<T, NormTerm>)
                return s.p == Norm::l1 ? "l1" : s.p == Norm::l2 ? "l2" : "linf";
            else if constexpr (std::is_same_v<T, GroupL21>) return "group_l21";
            else if constexpr (std::is_same_v<T, Indicator>) return "indicator";
            else if constexpr (std::is_same_v<T, SquaredDistance>) return "squared_distance";
            else if constexpr (std::is_same_v<T, ElasticNet>) return "elastic_net";
            else if constexpr (std::is_same_v<T, Separable>) return "separable";
            else if constexpr (std::is_same_v<T, PoissonKl>) return "poisson_kl";
            else if constexpr (std::is_same_v<T, CorrelatedQuadratic>) return "correlated_quadratic";
            else if constexpr (std::is_same_v<T, BlockSeparable>) return "blocks";
            else return s.name.empty() ? "custom" : s.name;
        },
        f_);
}

namespace {

Index block_total(const ProxSpec::BlockSeparable& b)
{
    Index n = 0;
    for (const auto& blk : b.blocks) n += blk.size;
    return n;
}

} // namespace

Vector ProxSpec::prox(const Vector& x, double lambda) const
{
    require_positive(lambda, "prox: lambda");
    return std::visit(
        [&](const auto& s) -> Vector {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Zero>) {
                return x;
            } else if constexpr (std::is_same_v<T, NormTerm>) {
                return prox_vector_norm(x, s.p, lambda * s.weight);
            } else if constexpr (std::is_same_v<T, GroupL21>) {
                return prox_group_l21(x, lambda * s.weight, s.partition);
            } else if constexpr (std::is_same_v<T, Indicator>) {
                return s.set.project(x);
            } else if constexpr (std::is_same_v<T, SquaredDistance>) {
                require_dims(x.size(), s.target.size(), "squared distance prox");
                const double lw = lambda * s.weight;
                return (x + lw * s.target) / (1.0 + lw);
            } else if constexpr (std::is_same_v<T, ElasticNet>) {
                return prox_elastic_net(x, lambda, s.mu);
            } else if constexpr (std::is_same_v<T, Separable>) {
                require_finite(x, "separable prox");
                Vector out(x.size());
                for (Index i = 0; i < x.size(); ++i) out[i] = scalar_prox(s.g, x[i], lambda);
                return out;
            } else if constexpr (std::is_same_v<T, PoissonKl>) {
                return prox_poisson_kl(x, lambda, s.counts);
            } else if constexpr (std::is_same_v<T, CorrelatedQuadratic>) {
                require_dims(x.size(), s.data.size(), "correlated quadratic prox");
                return s.cov.solve_shifted(x, s.data, lambda);
            } else if constexpr (std::is_same_v<T, BlockSeparable>) {
                require_dims(x.size(), block_total(s), "block prox");
                Vector out(x.size());
                Index off = 0;
                for (const auto& blk : s.blocks) {
                    out.segment(off, blk.size) = blk.spec->prox(x.segment(off, blk.size), lambda);
                    off += blk.size;
                }
                return out;
            } else {
                Vector out = s.prox(x, lambda);
                require_dims(out.size(), x.size(), "custom prox output");
                return out;
            }
        },
        f_);
}

Vector ProxSpec::prox_diag(const Vector& x, const Vector& steps) const
{
    require_dims(steps.size(), x.size(), "prox_diag");
    require_positive_steps(steps, "prox_diag");
    return std::visit(
        [&](const auto& s) -> Vector {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Zero>) {
                return x;
            } else if constexpr (std::is_same_v<T, NormTerm>) {
                if (s.p == Norm::l1) {
                    require_finite(x, "prox_diag");
                    Vector out(x.size());
                    for (Index i = 0; i < x.size(); ++i) out[i] = soft1(x[i], s.weight * steps[i]);
                    return out;
                }
                require(all_equal(steps), "prox_diag: coupled norm needs a constant step");
                return prox(x, steps[0]);
            } else if constexpr (std::is_same_v<T, GroupL21>) {
                require_dims(x.size(), s.partition.dim(), "prox_diag group");
                require_finite(x, "prox_diag");
                Vector out(x.size());
                s.partition.for_each_group([&](Index, const Index* idx, Index n) {
                    const double lam = s.weight * steps[idx[0]];
                    double sq = 0.0;
                    for (Index k = 0; k < n; ++k) {
                        require(steps[idx[k]] == steps[idx[0]],
                                "prox_diag: steps must be constant within a group");
                        sq += x[idx[k]] * x[idx[k]];
                    }
                    const double nrm = std::sqrt(sq);
                    const double scale = nrm <= lam ? 0.0 : 1.0 - lam / nrm;
                    for (Index k = 0; k < n; ++k) out[idx[k]] = scale * x[idx[k]];
                });
                return out;
            } else if constexpr (std::is_same_v<T, Indicator>) {
                // box projections are separable and therefore metric-independent
                if (std::holds_alternative<Box>(s.set.variant())) return s.set.project(x);
                require(all_equal(steps), "prox_diag: non-separable set needs a constant step");
                return s.set.project(x);
            } else if constexpr (std::is_same_v<T, SquaredDistance>) {
                require_dims(x.size(), s.target.size(), "prox_diag squared distance");
                const Vector lw = steps * s.weight;
                return ((x.array() + lw.array() * s.target.array()) / (1.0 + lw.array())).matrix();
            } else if constexpr (std::is_same_v<T, ElasticNet>) {
                require_finite(x, "prox_diag");
                Vector out(x.size());
                for (Index i = 0; i < x.size(); ++i)
                    out[i] = soft1(x[i], steps[i] * s.mu) / (1.0 + steps[i]);
                return out;
            } else if constexpr (std::is_same_v<T, Separable>) {
                require_finite(x, "prox_diag");
                Vector out(x.size());
                for (Index i = 0; i < x.size(); ++i) out[i] = scalar_prox(s.g, x[i], steps[i]);
                return out;
            } else if constexpr (std::is_same_v<T, PoissonKl>) {
                require_dims(x.size(), s.counts.size(), "prox_diag poisson");
                require_finite(x, "prox_diag");
                Vector out(x.size());
                for (Index i = 0; i < x.size(); ++i) out[i] = kl_root(x[i], steps[i], s.counts[i]);
                return out;
            } else if constexpr (std::is_same_v<T, CorrelatedQuadratic>) {
                require_dims(x.size(), s.data.size(), "prox_diag correlated quadratic");
                return s.cov.solve_shifted_diag(x, s.data, steps);
            } else if constexpr (std::is_same_v<T, BlockSeparable>) {
                require_dims(x.size(), block_total(s), "prox_diag blocks");
                Vector out(x.size());
                Index off = 0;
                for (const auto& blk : s.blocks) {
                    out.segment(off, blk.size) = blk.spec->prox_diag(x.segment(off, blk.size),
                                                                     steps.segment(off, blk.size));
                    off += blk.size;
                }
                return out;
            } else {
                require(all_equal(steps), "prox_diag: custom prox needs a constant step");
                return prox(x, steps[0]);
            }
        },
        f_);
}

Vector ProxSpec::harmonize_steps(const Vector& steps) const
{
    require_positive_steps(steps, "harmonize_steps");
    Vector out = steps;
    std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, NormTerm>) {
                if (s.p != Norm::l1) out.setConstant(steps.minCoeff());
            } else if constexpr (std::is_same_v<T, GroupL21>) {
                require_dims(steps.size(), s.partition.dim(), "harmonize_steps");
                s.partition.for_each_group([&](Index, const Index* idx, Index n) {
                    double m = kInf;
                    for (Index k = 0; k < n; ++k) m = std::min(m, steps[idx[k]]);
                    for (Index k = 0; k < n; ++k) out[idx[k]] = m;
                });
            } else if constexpr (std::is_same_v<T, Indicator>) {
                if (!std::holds_alternative<Box>(s.set.variant())) out.setConstant(steps.minCoeff());
            } else if constexpr (std::is_same_v<T, CorrelatedQuadratic>) {
                require_dims(steps.size(), s.cov.dim(), "harmonize_steps");
                const Index m = s.cov.rays();
                const Index L = s.cov.channels();
                for (Index i = 0; i < m; ++i) {
                    double lo = kInf;
                    for (Index l = 0; l < L; ++l) lo = std::min(lo, steps[l * m + i]);
                    for (Index l = 0; l < L; ++l) out[l * m + i] = lo;
                }
            } else if constexpr (std::is_same_v<T, BlockSeparable>) {
                require_dims(steps.size(), block_total(s), "harmonize_steps");
                Index off = 0;
                for (const auto& blk : s.blocks) {
                    out.segment(off, blk.size) =
                        blk.spec->harmonize_steps(steps.segment(off, blk.size));
                    off += blk.size;
                }
            } else if constexpr (std::is_same_v<T, Custom>) {
                out.setConstant(steps.minCoeff());
            }
        },
        f_);
    return out;
}

Vector ProxSpec::prox_conjugate(const Vector& v, double sigma) const
{
    require_positive(sigma, "prox_conjugate: sigma");
    return v - sigma * prox(v / sigma, 1.0 / sigma);
}

Vector ProxSpec::prox_conjugate_diag(const Vector& v, const Vector& sigmas) const
{
    require_dims(sigmas.size(), v.size(), "prox_conjugate_diag");
    require_positive_steps(sigmas, "prox_conjugate_diag");
    const Vector scaled = (v.array() / sigmas.array()).matrix();
    const Vector inv = sigmas.cwiseInverse();
    return v - sigmas.cwiseProduct(prox_diag(scaled, inv));
}

bool ProxSpec::has_value() const
{
    if (std::holds_alternative<Custom>(f_)) return false;
    if (const auto* b = std::get_if<BlockSeparable>(&f_))
        return std::all_of(b->blocks.begin(), b->blocks.end(),
                           [](const Block& blk) { return blk.spec->has_value(); });
    return true;
}

double ProxSpec::value(const Vector& x) const
{
    return std::visit(
        [&](const auto& s) -> double {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Zero>) {
                return 0.0;
            } else if constexpr (std::is_same_v<T, NormTerm>) {
                return s.weight * vector_norm(x, s.p);
            } else if constexpr (std::is_same_v<T, GroupL21>) {
                require_dims(x.size(), s.partition.dim(), "group value");
                double total = 0.0;
                s.partition.for_each_group([&](Index, const Index* idx, Index n) {
                    double sq = 0.0;
                    for (Index k = 0; k < n; ++k) sq += x[idx[k]] * x[idx[k]];
                    total += std::sqrt(sq);
                });
                return s.weight * total;
            } else if constexpr (std::is_same_v<T, Indicator>) {
                return s.set.contains(x, 1e-9) ? 0.0 : kInf;
            } else if constexpr (std::is_same_v<T, SquaredDistance>) {
                require_dims(x.size(), s.target.size(), "squared distance value");
                return 0.5 * s.weight * (x - s.target).squaredNorm();
            } else if constexpr (std::is_same_v<T, ElasticNet>) {
                return 0.5 * x.squaredNorm() + s.mu * x.template lpNorm<1>();
            } else if constexpr (std::is_same_v<T, Separable>) {
                double total = 0.0;
                for (Index i = 0; i < x.size(); ++i) total += scalar_value(s.g, x[i]);
                return total;
            } else if constexpr (std::is_same_v<T, PoissonKl>) {
                require_dims(x.size(), s.counts.size(), "poisson value");
                double total = 0.0;
                for (Index i = 0; i < x.size(); ++i) {
                    if (x[i] < 0.0) return kInf;
                    total += x[i];
                    if (s.counts[i] > 0.0) total -= s.counts[i] * std::log(std::max(x[i], kKlFloor));
                }
                return total;
            } else if constexpr (std::is_same_v<T, CorrelatedQuadratic>) {
                require_dims(x.size(), s.data.size(), "correlated quadratic value");
                const Vector r = x - s.data;
                return 0.5 * r.dot(s.cov.apply_inverse(r));
            } else if constexpr (std::is_same_v<T, BlockSeparable>) {
                require_dims(x.size(), block_total(s), "block value");
                double total = 0.0;
                Index off = 0;
                for (const auto& blk : s.blocks) {
                    total += blk.spec->value(x.segment(off, blk.size));
                    off += blk.size;
                }
                return total;
            } else {
                throw InvalidArgument("value: custom prox '" + s.name + "' has no closed-form value");
            }
        },
        f_);
}

std::optional<ScaledIdentityQuadratic> ProxSpec::quadratic_form(Index dim) const
{
    if (is_zero()) return ScaledIdentityQuadratic{0.0, Vector::Zero(dim), 0.0};
    if (const auto* q = std::get_if<SquaredDistance>(&f_)) {
        require_dims(q->target.size(), dim, "quadratic_form");
        return ScaledIdentityQuadratic{q->weight, q->weight * q->target,
                                       0.5 * q->weight * q->target.squaredNorm()};
    }
    return std::nullopt;
}

EnvelopeValue moreau_envelope_eval(const ProxSpec& f, double lambda, const Vector& x)
{
    require_positive(lambda, "moreau_envelope_eval: lambda");
    if (!f.has_value())
        throw InvalidArgument("moreau_envelope_eval: function has no closed-form value");
    const Vector p = f.prox(x, lambda);
    const Vector diff = x - p;
    return {diff.squaredNorm() / (2.0 * lambda) + f.value(p), diff / lambda};
}

} // namespace proxopt

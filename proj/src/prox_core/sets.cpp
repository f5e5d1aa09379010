#include "proxopt/prox.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace proxopt {

Norm dual_norm(Norm p)
{
    switch (p) {
    case Norm::l1: return Norm::linf;
    case Norm::l2: return Norm::l2;
    case Norm::linf: return Norm::l1;
    }
    throw InvalidArgument("unsupported norm");
}

double vector_norm(const Vector& x, Norm p)
{
    switch (p) {
    case Norm::l1: return x.lpNorm<1>();
    case Norm::l2: return x.norm();
    case Norm::linf: return x.size() ? x.lpNorm<Eigen::Infinity>() : 0.0;
    }
    throw InvalidArgument("unsupported norm");
}

// ---------------------------------------------------------------------------

SetSpec SetSpec::affine(Matrix A, Vector b)
{
    require(A.rows() >= 1 && A.cols() >= 1, "affine set: empty matrix");
    require_dims(b.size(), A.rows(), "affine set");
    require(A.allFinite() && b.allFinite(), "affine set: non-finite data");
    auto factor = std::make_shared<Eigen::CompleteOrthogonalDecomposition<Matrix>>(A);
    const Vector particular = factor->solve(b);
    if ((A * particular - b).norm() > 1e-10 * (1.0 + b.norm()))
        throw InfeasibleSet("affine set: A x = b has no solution");
    return SetSpec(AffineSet{std::move(A), std::move(b), std::move(factor)});
}

SetSpec SetSpec::halfspace(Vector normal, double offset)
{
    require(normal.size() >= 1 && normal.allFinite() && std::isfinite(offset),
            "halfspace: invalid data");
    require(normal.norm() > 0.0, "halfspace: zero normal");
    return SetSpec(Halfspace{std::move(normal), offset});
}

SetSpec SetSpec::box(Vector lower, Vector upper)
{
    require_dims(upper.size(), lower.size(), "box");
    for (Index i = 0; i < lower.size(); ++i) {
        require(!std::isnan(lower[i]) && !std::isnan(upper[i]), "box: NaN bound");
        require(lower[i] <= upper[i], "box: lower bound exceeds upper bound");
        require(lower[i] < std::numeric_limits<double>::infinity() &&
                    upper[i] > -std::numeric_limits<double>::infinity(),
                "box: empty set");
    }
    return SetSpec(Box{std::move(lower), std::move(upper)});
}

SetSpec SetSpec::nonnegative(Index dim)
{
    return box(Vector::Zero(dim), Vector::Constant(dim, std::numeric_limits<double>::infinity()));
}

SetSpec SetSpec::simplex() { return SetSpec(Simplex{}); }

SetSpec SetSpec::ball(Norm q, double radius)
{
    require_positive(radius, "ball radius");
    return SetSpec(NormBall{q, radius});
}

Vector SetSpec::project(const Vector& x) const
{
    require_finite(x, "project_convex");
    return std::visit(
        [&](const auto& s) -> Vector {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, AffineSet>) {
                require_dims(x.size(), s.A.cols(), "affine projection");
                Vector out = x - s.factor->solve(s.A * x - s.b);
                // one refinement sweep against accumulated rounding
                out -= s.factor->solve(s.A * out - s.b);
                return out;
            } else if constexpr (std::is_same_v<T, Halfspace>) {
                require_dims(x.size(), s.normal.size(), "halfspace projection");
                const double excess = s.normal.dot(x) - s.offset;
                if (excess <= 0.0) return x;
                return x - (excess / s.normal.squaredNorm()) * s.normal;
            } else if constexpr (std::is_same_v<T, Box>) {
                require_dims(x.size(), s.lower.size(), "box projection");
                return x.cwiseMax(s.lower).cwiseMin(s.upper);
            } else if constexpr (std::is_same_v<T, Simplex>) {
                return project_simplex(x);
            } else {
                switch (s.q) {
                case Norm::l1: return project_l1_ball(x, s.radius);
                case Norm::l2: return project_l2_ball(x, s.radius);
                case Norm::linf: return project_linf_ball(x, s.radius);
                }
                throw InvalidArgument("unsupported ball");
            }
        },
        set_);
}

bool SetSpec::contains(const Vector& x, double tol) const
{
    return std::visit(
        [&](const auto& s) -> bool {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, AffineSet>) {
                if (x.size() != s.A.cols()) return false;
                return (s.A * x - s.b).norm() <= tol * (1.0 + s.b.norm());
            } else if constexpr (std::is_same_v<T, Halfspace>) {
                if (x.size() != s.normal.size()) return false;
                return s.normal.dot(x) - s.offset <= tol * (1.0 + std::abs(s.offset));
            } else if constexpr (std::is_same_v<T, Box>) {
                if (x.size() != s.lower.size()) return false;
                for (Index i = 0; i < x.size(); ++i)
                    if (x[i] < s.lower[i] - tol || x[i] > s.upper[i] + tol) return false;
                return true;
            } else if constexpr (std::is_same_v<T, Simplex>) {
                return x.minCoeff() >= -tol && std::abs(x.sum() - 1.0) <= tol;
            } else {
                return vector_norm(x, s.q) <= s.radius * (1.0 + tol);
            }
        },
        set_);
}

Vector project_convex(const Vector& x, const SetSpec& set) { return set.project(x); }

Vector project_simplex(const Vector& x)
{
    require(x.size() >= 1, "simplex projection: empty vector");
    require_finite(x, "simplex projection");

    // h(mu) = sum (x - mu)_+ - 1 is decreasing with a root in [max - 1, max].
    auto excess = [&](double mu) { return (x.array() - mu).cwiseMax(0.0).sum() - 1.0; };
    auto knot_inside = [&](double lo, double hi) {
        return ((x.array() > lo) && (x.array() < hi)).any();
    };

    double hi = x.maxCoeff();
    double lo = hi - 1.0;
    for (int it = 0; it < 200; ++it) {
        if (!knot_inside(lo, hi) || hi - lo <= 1e-14) break;
        const double mid = 0.5 * (lo + hi);
        (excess(mid) > 0.0 ? lo : hi) = mid;
    }

    // h is affine on the isolated interval; solve it exactly.
    const double cut = knot_inside(lo, hi) ? 0.5 * (lo + hi) : hi;
    double sum = 0.0;
    Index active = 0;
    for (Index i = 0; i < x.size(); ++i) {
        if (x[i] >= cut) {
            sum += x[i];
            ++active;
        }
    }
    const double mu = (sum - 1.0) / static_cast<double>(active);
    return (x.array() - mu).cwiseMax(0.0).matrix();
}

Vector project_l1_ball(const Vector& x, double radius)
{
    require_positive(radius, "l1 ball radius");
    require_finite(x, "l1 ball projection");
    if (x.lpNorm<1>() <= radius) return x;

    std::vector<Index> order(static_cast<size_t>(x.size()));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return std::abs(x[a]) > std::abs(x[b]); });

    double cumulative = 0.0;
    double mu = 0.0;
    for (size_t m = 0; m < order.size(); ++m) {
        const double a = std::abs(x[order[m]]);
        if (a <= 0.0) break;
        cumulative += a;
        const double candidate = (cumulative - radius) / static_cast<double>(m + 1);
        if (candidate <= a) mu = candidate;
    }
    return soft_threshold(x, mu);
}

Vector project_l2_ball(const Vector& x, double radius)
{
    require_positive(radius, "l2 ball radius");
    require_finite(x, "l2 ball projection");
    const double n = x.norm();
    if (n <= radius) return x;
    return (radius / n) * x;
}

Vector project_linf_ball(const Vector& x, double radius)
{
    require_positive(radius, "linf ball radius");
    require_finite(x, "linf ball projection");
    return x.cwiseMax(-radius).cwiseMin(radius);
}

} // namespace proxopt

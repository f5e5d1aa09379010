#pragma once

#include "proxopt/covariance.hpp"
#include "proxopt/types.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace proxopt {

enum class Norm { l1, l2, linf };

/// Dual exponent: l1 <-> linf, l2 <-> l2.
Norm dual_norm(Norm p);
double vector_norm(const Vector& x, Norm p);

// ---------------------------------------------------------------------------
// Convex sets
// ---------------------------------------------------------------------------

struct AffineSet {
    Matrix A;
    Vector b;
    // Least-norm solver for A z = r, shared between copies.
    std::shared_ptr<const Eigen::CompleteOrthogonalDecomposition<Matrix>> factor;
};

struct Halfspace {
    Vector normal;  // { x : <normal, x> <= offset }
    double offset = 0.0;
};

struct Box {
    Vector lower;  // entries may be -inf
    Vector upper;  // entries may be +inf
};

struct Simplex {};  // probability simplex { x >= 0, sum x = 1 }

struct NormBall {
    Norm q = Norm::l2;
    double radius = 1.0;
};

/* Non-empty closed convex set with an exact Euclidean projection.
 * Construct through the named factories; they validate the parameters. */
class SetSpec {
public:
    using Variant = std::variant<AffineSet, Halfspace, Box, Simplex, NormBall>;

    static SetSpec affine(Matrix A, Vector b);
    static SetSpec halfspace(Vector normal, double offset);
    static SetSpec box(Vector lower, Vector upper);
    static SetSpec nonnegative(Index dim);
    static SetSpec simplex();
    static SetSpec ball(Norm q, double radius);

    const Variant& variant() const { return set_; }

    Vector project(const Vector& x) const;
    bool contains(const Vector& x, double tol = 1e-12) const;

private:
    explicit SetSpec(Variant v) : set_(std::move(v)) {}
    Variant set_;
};

Vector project_convex(const Vector& x, const SetSpec& set);

// Individual projections, exposed for reuse by the norm proxes.
Vector project_simplex(const Vector& x);
Vector project_l1_ball(const Vector& x, double radius);
Vector project_l2_ball(const Vector& x, double radius);
Vector project_linf_ball(const Vector& x, double radius);

// ---------------------------------------------------------------------------
// Scalar functions admissible in the compose rule prox_{l(g + mu|.|)}
// ---------------------------------------------------------------------------

struct ScalarQuadratic {
    double weight = 1.0;  // g(t) = weight/2 t^2
};

struct ScalarAbs {};  // g(t) = |t|; not differentiable at 0

struct ScalarHuber {
    double delta = 1.0;  // t^2/(2 delta) for |t| <= delta, |t| - delta/2 otherwise
};

using ScalarProxSpec = std::variant<ScalarQuadratic, ScalarAbs, ScalarHuber>;

double scalar_value(const ScalarProxSpec& g, double t);
double scalar_prox(const ScalarProxSpec& g, double x, double lambda);
/// True when g'(0) exists and equals zero.
bool smooth_at_zero(const ScalarProxSpec& g);

// ---------------------------------------------------------------------------
// Group partitions for mixed l2/l1 norms
// ---------------------------------------------------------------------------

class GroupPartition {
public:
    static GroupPartition from_groups(const std::vector<std::vector<Index>>& groups,
                                      Index dim);
    /// Groups {0..s-1}, {s..2s-1}, ...
    static GroupPartition contiguous(Index n_groups, Index group_size);
    /// Groups {j, j+n, j+2n, ...}; matches channel-stacked gradients.
    static GroupPartition strided(Index n_groups, Index group_size);

    Index dim() const { return dim_; }
    Index size() const { return static_cast<Index>(offsets_.size()) - 1; }

    template <class F>
    void for_each_group(F&& f) const
    {
        for (Index g = 0; g < size(); ++g)
            f(g, &indices_[offsets_[g]], offsets_[g + 1] - offsets_[g]);
    }

private:
    std::vector<Index> indices_;
    std::vector<Index> offsets_;
    Index dim_ = 0;
};

// ---------------------------------------------------------------------------
// Catalog operations
// ---------------------------------------------------------------------------

enum class MatrixNorm { nuclear, frobenius, spectral };

Vector soft_threshold(const Vector& x, double lambda);
Vector prox_vector_norm(const Vector& x, Norm p, double lambda);
Vector prox_group_l21(const Vector& x, double lambda, const GroupPartition& part);
Vector prox_elastic_net(const Vector& x, double lambda, double mu);
Vector prox_compose_abs(const ScalarProxSpec& g, double mu, double lambda, const Vector& x);
Matrix prox_matrix_norm(const Matrix& X, MatrixNorm which, double lambda);
double matrix_norm(const Matrix& X, MatrixNorm which);
Vector prox_separable_diag(const Vector& x, const Vector& weights, double lambda,
                           const ScalarProxSpec& f);
Vector prox_poisson_kl(const Vector& v, double t, const Vector& counts);

/// Floor applied to the argument of log in the Poisson data term.
inline constexpr double kKlFloor = 1e-12;

// ---------------------------------------------------------------------------
// ProxSpec: a proximable function handed to the solvers
// ---------------------------------------------------------------------------

using ProxMap = std::function<Vector(const Vector&, double)>;

class ProxSpec;

/// Quadratic 1/2 x'Hx - c'x + const in closed form, H = weight * I.
struct ScaledIdentityQuadratic {
    double weight = 0.0;
    Vector linear;
    double constant = 0.0;
};

class ProxSpec {
public:
    struct Zero {};
    struct NormTerm {
        Norm p;
        double weight;
    };
    struct GroupL21 {
        double weight;
        GroupPartition partition;
    };
    struct Indicator {
        SetSpec set;
    };
    struct SquaredDistance {
        double weight;  // weight/2 ||x - target||^2
        Vector target;
    };
    struct ElasticNet {
        double mu;  // 1/2||x||^2 + mu ||x||_1
    };
    struct Separable {
        ScalarProxSpec g;  // sum_i g(x_i)
    };
    struct PoissonKl {
        Vector counts;  // sum_i y_i - f_i log y_i
    };
    struct CorrelatedQuadratic {
        Vector data;  // 1/2 ||z - data||^2_{Sigma^-1}
        BlockCovariance cov;
    };
    struct Block {
        Index size;
        std::shared_ptr<const ProxSpec> spec;
    };
    struct BlockSeparable {
        std::vector<Block> blocks;
    };
    struct Custom {
        ProxMap prox;
        std::string name;
    };

    using Variant = std::variant<Zero, NormTerm, GroupL21, Indicator, SquaredDistance,
                                 ElasticNet, Separable, PoissonKl, CorrelatedQuadratic,
                                 BlockSeparable, Custom>;

    ProxSpec() : f_(Zero{}) {}

    static ProxSpec zero() { return ProxSpec(Zero{}); }
    static ProxSpec norm(Norm p, double weight = 1.0);
    static ProxSpec group_l21(double weight, GroupPartition part);
    static ProxSpec indicator(SetSpec set);
    static ProxSpec squared_distance(double weight, Vector target);
    static ProxSpec elastic_net(double mu);
    static ProxSpec separable(ScalarProxSpec g);
    static ProxSpec poisson_kl(Vector counts);
    static ProxSpec correlated_quadratic(Vector data, BlockCovariance cov);
    static ProxSpec blocks(std::vector<std::pair<Index, ProxSpec>> parts);
    static ProxSpec custom(ProxMap prox, std::string name);

    const Variant& variant() const { return f_; }
    bool is_zero() const { return std::holds_alternative<Zero>(f_); }
    std::string name() const;

    /// prox_{lambda f}(x)
    Vector prox(const Vector& x, double lambda) const;

    /// Componentwise-metric prox: argmin_y sum_i (y_i - x_i)^2 / (2 steps_i) + f(y).
    /// Only for functions that are separable with respect to `steps`; group
    /// functions need steps constant per group (see harmonize_steps).
    Vector prox_diag(const Vector& x, const Vector& steps) const;

    /// prox_{sigma f*}(v) by Moreau decomposition.
    Vector prox_conjugate(const Vector& v, double sigma) const;
    Vector prox_conjugate_diag(const Vector& v, const Vector& sigmas) const;

    /// Replaces each coupled group of step sizes by its minimum so that
    /// prox_diag is exact.
    Vector harmonize_steps(const Vector& steps) const;

    /// f(x); +infinity outside the domain. Throws for Custom.
    double value(const Vector& x) const;
    bool has_value() const;

    /// Quadratic structure for x-subproblem solvers (Zero, SquaredDistance).
    std::optional<ScaledIdentityQuadratic> quadratic_form(Index dim) const;

private:
    explicit ProxSpec(Variant v) : f_(std::move(v)) {}
    Variant f_;
};

struct EnvelopeValue {
    double value;
    Vector gradient;
};

/// Moreau envelope of lambda f at x with its gradient (x - prox)/lambda.
EnvelopeValue moreau_envelope_eval(const ProxSpec& f, double lambda, const Vector& x);

} // namespace proxopt

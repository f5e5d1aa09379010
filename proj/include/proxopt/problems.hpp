#pragma once

#include "proxopt/covariance.hpp"
#include "proxopt/solvers.hpp"

#include <memory>
#include <variant>

namespace proxopt {

/// 1/2 ||u - f||^2 + alpha TV(u) on an h x w image.
struct RofSpec {
    Vector f;
    Index height = 0, width = 0;
    double alpha = 0.0;
    bool anisotropic = false;
};

/// 1/2 ||K x - b||^2 + lambda ||x||_1
struct LassoSpec {
    LinearOperator K;
    Vector b;
    double lambda = 0.0;
};

/// sum_m (Ku)_m - f_m log (Ku)_m + alpha TV(u), u >= 0
struct PoissonTvSpec {
    LinearOperator K;
    Vector counts;
    double alpha = 0.0;
    Index height = 0, width = 0;
    bool nonnegative = true;
    std::shared_ptr<OpCounter> counter;  // created by build_problem when empty
};

enum class Coupling { diagonal, full };

/// 1/2 ||f - (I_L (x) K) u||^2_{Sigma^-1} + alpha sum_l TV(u_l)
struct PwlsSpec {
    LinearOperator K;
    Index channels = 1;
    Vector data;  // channel-major, length channels * K.rows()
    BlockCovariance cov;
    double alpha = 0.0;
    Index height = 0, width = 0;
    Coupling coupling = Coupling::full;

    /// Covariance actually used: cross-channel blocks dropped in diagonal mode.
    BlockCovariance effective_cov() const;
};

using ProblemSpec = std::variant<RofSpec, LassoSpec, PoissonTvSpec, PwlsSpec>;

enum class Splitting {
    proximal_gradient,  // smooth g plus a prox-friendly h with A = I
    admm,               // ADMM, split Bregman, dual DRS, explicit proximal ADMM
    pdhg,               // PDHGMp and linearized ADMM: g and h proximable
    pidsplit,           // Poisson-TV stacked as (K; grad; I)
    variable_metric,    // EM-type forward-backward
};

const char* splitting_name(Splitting s);

/// Binds the model to the (g, h, A) triple the solver family expects.
/// Throws InvalidArgument when the family cannot handle the model.
CompositeProblem build_problem(const ProblemSpec& spec, Splitting splitting);

/// Model objective; +inf when a flagged nonnegativity constraint is violated.
double objective_eval(const ProblemSpec& spec, const Vector& x);

/// ||u - ref|| / ||ref||
double relative_error(const Vector& u, const Vector& ref);

/// (I_L (x) K)' Sigma^-1 ((I_L (x) K) u - f)
Vector pwls_gradient(const PwlsSpec& spec, const Vector& u);

/// Isotropic (or anisotropic) total variation of an h x w image.
double total_variation(const Vector& u, Index h, Index w, bool anisotropic = false);

} // namespace proxopt

#include "detail.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

namespace proxopt {

SmoothTerm make_least_squares(LinearOperator M, Vector c)
{
    require_dims(c.size(), M.rows(), "least squares");
    SmoothTerm s;
    s.value = [M, c](const Vector& x) { return 0.5 * (M.apply(x) - c).squaredNorm(); };
    s.gradient = [M, c](const Vector& x) { return M.adjoint(M.apply(x) - c); };
    const double n = power_method_norm(M, 1e-12, 100000).norm;
    s.lipschitz = n * n;
    s.lsq = LeastSquares{std::move(M), std::move(c)};
    return s;
}

double CompositeProblem::evaluate(const Vector& x) const
{
    if (objective) return objective(x);
    double v = g.value(x);
    if (smooth) v += smooth->value(x);
    if (!h.is_zero()) v += h.value(A.apply(x));
    return v;
}

void CompositeProblem::validate() const
{
    require(dim >= 1, "problem: dimension must be >= 1");
    require(A.valid(), "problem: missing operator");
    require_dims(A.cols(), dim, "problem operator columns");
    require_dims(x0.size(), dim, "problem starting point");
    if (smooth) {
        require(static_cast<bool>(smooth->value) && static_cast<bool>(smooth->gradient),
                "problem: smooth term lacks value or gradient");
        require_positive(smooth->lipschitz, "problem: Lipschitz constant");
    }
    if (counter)
        require(static_cast<bool>(objective),
                "problem: counted operators need an uncounted objective evaluator");
}

void ConvergenceRecord::write_csv(std::ostream& os) const
{
    os << kHeader << '\n';
    for (const auto& r : rows)
        os << fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g},{},{},{},{:.17g}\n", r.iter,
                          r.objective, r.rel_err, r.primal_res, r.dual_change, r.fwd_evals,
                          r.adj_evals, r.inner_iters, r.elapsed_s);
}

std::string ConvergenceRecord::csv() const
{
    std::ostringstream os;
    write_csv(os);
    return os.str();
}

int ConvergenceRecord::first_below(double eps) const
{
    for (const auto& r : rows)
        if (r.rel_err <= eps) return r.iter;
    return -1;
}

namespace detail {

Logger::Logger(std::string solver, const SolverConfig& cfg, const CompositeProblem* prob,
               std::function<double(const Vector&)> objective)
    : cfg_(cfg), prob_(prob), objective_(std::move(objective)),
      start_(std::chrono::steady_clock::now())
{
    record.solver = std::move(solver);
    require(cfg.max_iter >= 1, "solver: max_iter must be >= 1");
    require(cfg.tol >= 0.0, "solver: tol must be >= 0");
    require(cfg.log_every >= 1, "solver: log_every must be >= 1");
    if (prob_ && prob_->counter) {
        fwd0_ = prob_->counter->forward;
        adj0_ = prob_->counter->adjoint;
    }
}

ConvergenceRow Logger::make_row(int iter, const Vector& x, double primal_res,
                                double dual_change, long long inner) const
{
    ConvergenceRow row;
    row.iter = iter;
    if (objective_) row.objective = objective_(x);
    else if (prob_) row.objective = prob_->evaluate(x);
    else row.objective = std::numeric_limits<double>::quiet_NaN();
    if (cfg_.reference) {
        const double rn = cfg_.reference->norm();
        row.rel_err = rn > 0.0 ? (x - *cfg_.reference).norm() / rn
                               : std::numeric_limits<double>::quiet_NaN();
    } else {
        row.rel_err = std::numeric_limits<double>::quiet_NaN();
    }
    row.primal_res = primal_res;
    row.dual_change = dual_change;
    if (prob_ && prob_->counter) {
        row.fwd_evals = prob_->counter->forward - fwd0_;
        row.adj_evals = prob_->counter->adjoint - adj0_;
    }
    row.inner_iters = inner;
    row.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    if (cfg_.record_time) row.elapsed_s = row.wall_s;
    return row;
}

void Logger::initial(const Vector& x) { record.rows.push_back(make_row(0, x, 0.0, 0.0, 0)); }

bool Logger::step(int iter, const Vector& x, const Vector& x_prev, double primal_res,
                  double dual_change, long long inner_iters)
{
    bool stop = iter >= cfg_.max_iter;
    // an overflowing norm counts as divergence as well
    if (!x.allFinite() || !std::isfinite(x.norm())) {
        record.diverged = true;
        stop = true;
    }
    // the iterate, the split residual and the dual change must all settle
    const double change = record.diverged ? 0.0 : (x - x_prev).norm();
    const double worst = std::max({change, primal_res, dual_change});
    if (!record.diverged && worst <= cfg_.tol * (1.0 + x_prev.norm())) stop = true;

    double rel = std::numeric_limits<double>::infinity();
    if (cfg_.reference && cfg_.target_rel_err > 0.0 && !record.diverged) {
        rel = (x - *cfg_.reference).norm() / cfg_.reference->norm();
        if (rel <= cfg_.target_rel_err) stop = true;
    }

    if (stop || iter % cfg_.log_every == 0) {
        ConvergenceRow row = make_row(iter, x, primal_res, dual_change, inner_iters);
        if (std::isnan(row.objective) && (objective_ || prob_)) {
            record.diverged = true;
            stop = true;
        }
        record.rows.push_back(row);
    }
    return stop;
}

void notify(const SolverConfig& cfg, int iter, const Vector& x, const Vector* y, const Vector* b,
            const Vector* t, const Vector* p)
{
    if (!cfg.observer) return;
    IterateView v{iter, &x, y, b, t, p};
    cfg.observer(v);
}

ProxMap nonsmooth_prox(const CompositeProblem& prob)
{
    if (prob.h.is_zero()) {
        const ProxSpec g = prob.g;
        return [g](const Vector& x, double eta) { return g.prox(x, eta); };
    }
    require(prob.A.is_identity(), "forward-backward: the nonsmooth term needs A = I");
    require(prob.g.is_zero(), "forward-backward: only one nonsmooth term is supported");
    const ProxSpec h = prob.h;
    return [h](const Vector& x, double eta) { return h.prox(x, eta); };
}

double norm_sq_bound(const LinearOperator& A, std::uint64_t seed)
{
    const auto blocks = A.blocks();
    if (!blocks.empty()) {
        double s = 0.0;
        for (const auto& b : blocks) s += norm_sq_bound(b, seed);
        return s;
    }
    if (A.kind() == "grad2d") return 8.0;
    if (A.kind() == "identity") return 1.0;
    const double n = power_method_norm(A, 1e-10, 100000, seed).norm;
    return n * n;
}

Vector column_sq_norms(const LinearOperator& A)
{
    const SparseMatrix M = A.materialize();
    Vector out = Vector::Zero(M.cols());
    for (Index i = 0; i < M.outerSize(); ++i)
        for (SparseMatrix::InnerIterator it(M, i); it; ++it)
            out[it.col()] += it.value() * it.value();
    return out;
}

} // namespace detail

// ---------------------------------------------------------------------------
// x-subproblem

XStepSolver::XStepSolver(const CompositeProblem& prob, double gamma, XStep mode, int cg_iters,
                         Vector r_diag)
    : prob_(prob), gamma_(gamma), mode_(mode), cg_iters_(cg_iters), r_(std::move(r_diag))
{
    require_positive(gamma, "x-step: gamma");
    const Index n = prob.dim;
    if (r_.size() != 0) {
        require_dims(r_.size(), n, "x-step metric");
        require((r_.array() >= 0.0).all(), "x-step metric must be nonnegative");
    }

    if (!prob.smooth && prob.A.is_identity()) {
        path_ = Path::prox;
        return;
    }

    const auto qf = prob.g.quadratic_form(n);
    if (!qf)
        throw InvalidArgument("x-step: g must be zero or a squared distance when A is not the "
                              "identity or a smooth term is present");
    if (prob.smooth && !prob.smooth->lsq)
        throw InvalidArgument("x-step: only least-squares smooth terms can be solved exactly");

    qweight_ = qf->weight;
    rhs_const_ = qf->linear;
    if (prob.smooth) rhs_const_ += prob.smooth->lsq->M.adjoint(prob.smooth->lsq->c);

    if (mode == XStep::automatic) mode = n <= 4096 ? XStep::exact_dense : XStep::cg;
    mode_ = mode;

    if (mode == XStep::exact_dense) {
        path_ = Path::dense;
        const SparseMatrix Am = prob.A.materialize();
        Matrix H = gamma * Matrix(Am.transpose() * Am);
        if (prob.smooth) {
            const SparseMatrix Mm = prob.smooth->lsq->M.materialize();
            H += Matrix(Mm.transpose() * Mm);
        }
        H.diagonal().array() += qweight_;
        if (r_.size()) H.diagonal() += r_;
        llt_.compute(H);
        // positive semidefinite systems fall back to the minimum-norm solution
        bool ok = llt_.info() == Eigen::Success;
        if (ok) {
            const Vector d = Matrix(llt_.matrixL()).diagonal();
            ok = d.minCoeff() > 1e-10 * d.maxCoeff();
        }
        if (!ok) cod_ = std::make_unique<Eigen::CompleteOrthogonalDecomposition<Matrix>>(H);
    } else {
        path_ = Path::cg;
        require(cg_iters >= 1, "x-step: cg_iters must be >= 1");
        jacobi_ = gamma * detail::column_sq_norms(prob.A);
        if (prob.smooth) jacobi_ += detail::column_sq_norms(prob.smooth->lsq->M);
        jacobi_.array() += qweight_;
        if (r_.size()) jacobi_ += r_;
        for (Index i = 0; i < n; ++i)
            if (!(jacobi_[i] > 0.0)) jacobi_[i] = 1.0;
    }
}

Vector XStepSolver::apply_h(const Vector& x) const
{
    Vector out = gamma_ * prob_.A.adjoint(prob_.A.apply(x)) + qweight_ * x;
    if (prob_.smooth) out += prob_.smooth->lsq->M.adjoint(prob_.smooth->lsq->M.apply(x));
    if (r_.size()) out += r_.cwiseProduct(x);
    return out;
}

Vector XStepSolver::solve(const Vector& v, const Vector& x_prev)
{
    if (path_ == Path::prox) {
        if (r_.size() == 0) return prob_.g.prox(v, 1.0 / gamma_);
        const Vector denom = (gamma_ + r_.array()).matrix();
        const Vector center = ((gamma_ * v.array() + r_.array() * x_prev.array()) / denom.array()).matrix();
        return prob_.g.prox_diag(center, denom.cwiseInverse());
    }

    Vector rhs = rhs_const_ + gamma_ * prob_.A.adjoint(v);
    if (r_.size()) rhs += r_.cwiseProduct(x_prev);

    if (path_ == Path::dense) return cod_ ? Vector(cod_->solve(rhs)) : Vector(llt_.solve(rhs));

    // Jacobi-preconditioned CG, warm started, fixed iteration count
    Vector x = x_prev;
    Vector r = rhs - apply_h(x);
    Vector z = r.cwiseQuotient(jacobi_);
    Vector p = z;
    double rz = r.dot(z);
    const double stop = 1e-28 * rhs.squaredNorm();
    for (int k = 0; k < cg_iters_; ++k) {
        if (r.squaredNorm() <= stop) break;
        const Vector q = apply_h(p);
        const double pq = p.dot(q);
        if (!(pq > 0.0)) break;
        const double alpha = rz / pq;
        x += alpha * p;
        r -= alpha * q;
        z = r.cwiseQuotient(jacobi_);
        const double rz_new = r.dot(z);
        p = z + (rz_new / rz) * p;
        rz = rz_new;
        ++inner_;
    }
    return x;
}

} // namespace proxopt

#include "proxopt/linops.hpp"
#include "proxopt/rng.hpp"

#include <cmath>
#include <ostream>

namespace proxopt {

SparseMatrix LinearOperator::Impl::materialize() const
{
    // column-by-column fallback
    std::vector<Eigen::Triplet<double>> trip;
    Vector e = Vector::Zero(cols()), col;
    for (Index j = 0; j < cols(); ++j) {
        e[j] = 1.0;
        apply(e, col);
        e[j] = 0.0;
        for (Index i = 0; i < col.size(); ++i)
            if (col[i] != 0.0) trip.emplace_back(i, j, col[i]);
    }
    SparseMatrix M(rows(), cols());
    M.setFromTriplets(trip.begin(), trip.end());
    return M;
}

namespace {

class IdentityOp final : public LinearOperator::Impl {
public:
    explicit IdentityOp(Index n) : n_(n) {}
    Index rows() const override { return n_; }
    Index cols() const override { return n_; }
    void apply(const Vector& x, Vector& out) const override { out = x; }
    void adjoint(const Vector& y, Vector& out) const override { out = y; }
    SparseMatrix materialize() const override
    {
        SparseMatrix I(n_, n_);
        I.setIdentity();
        return I;
    }
    std::string kind() const override { return "identity"; }

private:
    Index n_;
};

class DenseOp final : public LinearOperator::Impl {
public:
    explicit DenseOp(Matrix A) : A_(std::move(A)) {}
    Index rows() const override { return A_.rows(); }
    Index cols() const override { return A_.cols(); }
    void apply(const Vector& x, Vector& out) const override { out.noalias() = A_ * x; }
    void adjoint(const Vector& y, Vector& out) const override { out.noalias() = A_.transpose() * y; }
    SparseMatrix materialize() const override { return A_.sparseView(0.0, 0.0); }
    std::string kind() const override { return "dense"; }

private:
    Matrix A_;
};

class SparseOp final : public LinearOperator::Impl {
public:
    SparseOp(SparseMatrix A, std::string kind) : A_(std::move(A)), kind_(std::move(kind))
    {
        A_.makeCompressed();
    }
    Index rows() const override { return A_.rows(); }
    Index cols() const override { return A_.cols(); }
    void apply(const Vector& x, Vector& out) const override { out.noalias() = A_ * x; }
    void adjoint(const Vector& y, Vector& out) const override { out.noalias() = A_.transpose() * y; }
    SparseMatrix materialize() const override { return A_; }
    std::string kind() const override { return kind_; }

private:
    SparseMatrix A_;
    std::string kind_;
};

class Grad2dOp final : public LinearOperator::Impl {
public:
    Grad2dOp(Index h, Index w) : h_(h), w_(w) {}
    Index rows() const override { return 2 * h_ * w_; }
    Index cols() const override { return h_ * w_; }

    void apply(const Vector& u, Vector& out) const override
    {
        const Index n = h_ * w_;
        out.setZero(2 * n);
        for (Index r = 0; r < h_; ++r) {
            for (Index c = 0; c < w_; ++c) {
                const Index k = r * w_ + c;
                if (r + 1 < h_) out[k] = u[k + w_] - u[k];
                if (c + 1 < w_) out[n + k] = u[k + 1] - u[k];
            }
        }
    }

    // negative divergence
    void adjoint(const Vector& p, Vector& out) const override
    {
        const Index n = h_ * w_;
        out.setZero(n);
        for (Index r = 0; r < h_; ++r) {
            for (Index c = 0; c < w_; ++c) {
                const Index k = r * w_ + c;
                double v = 0.0;
                if (r + 1 < h_) v -= p[k];
                if (r > 0) v += p[k - w_];
                if (c + 1 < w_) v -= p[n + k];
                if (c > 0) v += p[n + k - 1];
                out[k] = v;
            }
        }
    }

    SparseMatrix materialize() const override
    {
        const Index n = h_ * w_;
        std::vector<Eigen::Triplet<double>> t;
        t.reserve(static_cast<size_t>(4 * n));
        for (Index r = 0; r < h_; ++r) {
            for (Index c = 0; c < w_; ++c) {
                const Index k = r * w_ + c;
                if (r + 1 < h_) {
                    t.emplace_back(k, k + w_, 1.0);
                    t.emplace_back(k, k, -1.0);
                }
                if (c + 1 < w_) {
                    t.emplace_back(n + k, k + 1, 1.0);
                    t.emplace_back(n + k, k, -1.0);
                }
            }
        }
        SparseMatrix M(2 * n, n);
        M.setFromTriplets(t.begin(), t.end());
        return M;
    }

    std::string kind() const override { return "grad2d"; }

private:
    Index h_, w_;
};

class KronOp final : public LinearOperator::Impl {
public:
    KronOp(LinearOperator K, Index L) : K_(std::move(K)), L_(L) {}
    Index rows() const override { return L_ * K_.rows(); }
    Index cols() const override { return L_ * K_.cols(); }
    void apply(const Vector& x, Vector& out) const override
    {
        const Index m = K_.rows(), n = K_.cols();
        out.resize(L_ * m);
        for (Index l = 0; l < L_; ++l) out.segment(l * m, m) = K_.apply(x.segment(l * n, n));
    }
    void adjoint(const Vector& y, Vector& out) const override
    {
        const Index m = K_.rows(), n = K_.cols();
        out.resize(L_ * n);
        for (Index l = 0; l < L_; ++l) out.segment(l * n, n) = K_.adjoint(y.segment(l * m, m));
    }
    SparseMatrix materialize() const override
    {
        const SparseMatrix K = K_.materialize();
        std::vector<Eigen::Triplet<double>> t;
        for (Index l = 0; l < L_; ++l)
            for (Index i = 0; i < K.outerSize(); ++i)
                for (SparseMatrix::InnerIterator it(K, i); it; ++it)
                    t.emplace_back(l * K.rows() + it.row(), l * K.cols() + it.col(), it.value());
        SparseMatrix M(rows(), cols());
        M.setFromTriplets(t.begin(), t.end());
        return M;
    }
    std::string kind() const override { return "kron_identity"; }

private:
    LinearOperator K_;
    Index L_;
};

class StackOp final : public LinearOperator::Impl {
public:
    explicit StackOp(std::vector<LinearOperator> blocks) : blocks_(std::move(blocks))
    {
        for (const auto& b : blocks_) rows_ += b.rows();
    }
    Index rows() const override { return rows_; }
    Index cols() const override { return blocks_.front().cols(); }
    void apply(const Vector& x, Vector& out) const override
    {
        out.resize(rows_);
        Index off = 0;
        for (const auto& b : blocks_) {
            out.segment(off, b.rows()) = b.apply(x);
            off += b.rows();
        }
    }
    void adjoint(const Vector& y, Vector& out) const override
    {
        out.setZero(cols());
        Index off = 0;
        for (const auto& b : blocks_) {
            out += b.adjoint(y.segment(off, b.rows()));
            off += b.rows();
        }
    }
    SparseMatrix materialize() const override
    {
        std::vector<Eigen::Triplet<double>> t;
        Index off = 0;
        for (const auto& b : blocks_) {
            const SparseMatrix M = b.materialize();
            for (Index i = 0; i < M.outerSize(); ++i)
                for (SparseMatrix::InnerIterator it(M, i); it; ++it)
                    t.emplace_back(off + it.row(), it.col(), it.value());
            off += b.rows();
        }
        SparseMatrix M(rows(), cols());
        M.setFromTriplets(t.begin(), t.end());
        return M;
    }
    std::string kind() const override { return "stack"; }

    const std::vector<LinearOperator>& blocks() const { return blocks_; }

private:
    std::vector<LinearOperator> blocks_;
    Index rows_ = 0;
};

class ScaledOp final : public LinearOperator::Impl {
public:
    ScaledOp(LinearOperator A, double s) : A_(std::move(A)), s_(s) {}
    Index rows() const override { return A_.rows(); }
    Index cols() const override { return A_.cols(); }
    void apply(const Vector& x, Vector& out) const override { out = s_ * A_.apply(x); }
    void adjoint(const Vector& y, Vector& out) const override { out = s_ * A_.adjoint(y); }
    SparseMatrix materialize() const override { return s_ * A_.materialize(); }
    std::string kind() const override { return "scaled"; }

private:
    LinearOperator A_;
    double s_;
};

class ComposeOp final : public LinearOperator::Impl {
public:
    ComposeOp(LinearOperator A, LinearOperator B) : A_(std::move(A)), B_(std::move(B)) {}
    Index rows() const override { return A_.rows(); }
    Index cols() const override { return B_.cols(); }
    void apply(const Vector& x, Vector& out) const override { out = A_.apply(B_.apply(x)); }
    void adjoint(const Vector& y, Vector& out) const override { out = B_.adjoint(A_.adjoint(y)); }
    SparseMatrix materialize() const override
    {
        return SparseMatrix(A_.materialize() * B_.materialize());
    }
    std::string kind() const override { return "compose"; }

private:
    LinearOperator A_, B_;
};

class CountedOp final : public LinearOperator::Impl {
public:
    CountedOp(LinearOperator A, std::shared_ptr<OpCounter> c) : A_(std::move(A)), c_(std::move(c)) {}
    Index rows() const override { return A_.rows(); }
    Index cols() const override { return A_.cols(); }
    void apply(const Vector& x, Vector& out) const override
    {
        ++c_->forward;
        out = A_.apply(x);
    }
    void adjoint(const Vector& y, Vector& out) const override
    {
        ++c_->adjoint;
        out = A_.adjoint(y);
    }
    SparseMatrix materialize() const override { return A_.materialize(); }
    std::string kind() const override { return A_.kind(); }

private:
    LinearOperator A_;
    std::shared_ptr<OpCounter> c_;
};

} // namespace

LinearOperator LinearOperator::identity(Index n)
{
    require(n >= 1, "identity: dimension must be >= 1");
    return LinearOperator(std::make_shared<IdentityOp>(n));
}

LinearOperator LinearOperator::dense(Matrix A)
{
    require(A.rows() >= 1 && A.cols() >= 1, "dense operator: empty matrix");
    require(A.allFinite(), "dense operator: non-finite entries");
    return LinearOperator(std::make_shared<DenseOp>(std::move(A)));
}

LinearOperator LinearOperator::sparse(SparseMatrix A)
{
    require(A.rows() >= 1 && A.cols() >= 1, "sparse operator: empty matrix");
    return LinearOperator(std::make_shared<SparseOp>(std::move(A), "sparse"));
}

LinearOperator LinearOperator::grad2d(Index h, Index w)
{
    require(h >= 1 && w >= 1, "grad2d: image dimensions must be >= 1");
    return LinearOperator(std::make_shared<Grad2dOp>(h, w));
}

LinearOperator LinearOperator::radon(const RadonSpec& spec)
{
    return LinearOperator(std::make_shared<SparseOp>(build_radon_matrix(spec), "radon"));
}

LinearOperator LinearOperator::kron_identity(const LinearOperator& K, Index L)
{
    require(K.valid(), "kron_identity: empty operator");
    require(L >= 1, "kron_identity: L must be >= 1");
    return LinearOperator(std::make_shared<KronOp>(K, L));
}

LinearOperator LinearOperator::stack(std::vector<LinearOperator> blocks)
{
    require(!blocks.empty(), "stack: no blocks");
    for (const auto& b : blocks) {
        require(b.valid(), "stack: empty operator");
        require_dims(b.cols(), blocks.front().cols(), "stack");
    }
    return LinearOperator(std::make_shared<StackOp>(std::move(blocks)));
}

LinearOperator LinearOperator::scaled(const LinearOperator& A, double s)
{
    require(std::isfinite(s), "scaled: non-finite factor");
    return LinearOperator(std::make_shared<ScaledOp>(A, s));
}

LinearOperator LinearOperator::compose(const LinearOperator& A, const LinearOperator& B)
{
    require_dims(A.cols(), B.rows(), "compose");
    return LinearOperator(std::make_shared<ComposeOp>(A, B));
}

LinearOperator LinearOperator::counted(const LinearOperator& A, std::shared_ptr<OpCounter> counter)
{
    require(static_cast<bool>(counter), "counted: null counter");
    return LinearOperator(std::make_shared<CountedOp>(A, std::move(counter)));
}

Vector LinearOperator::apply(const Vector& x) const
{
    require_dims(x.size(), cols(), "LinearOperator::apply");
    Vector out;
    impl_->apply(x, out);
    return out;
}

Vector LinearOperator::adjoint(const Vector& y) const
{
    require_dims(y.size(), rows(), "LinearOperator::adjoint");
    Vector out;
    impl_->adjoint(y, out);
    return out;
}

SparseMatrix LinearOperator::materialize() const { return impl_->materialize(); }

std::vector<LinearOperator> LinearOperator::blocks() const
{
    if (const auto* s = dynamic_cast<const StackOp*>(impl_.get())) return s->blocks();
    return {};
}

// ---------------------------------------------------------------------------

NormEstimate power_method_norm(const LinearOperator& A, double tol, int max_iter,
                               std::uint64_t seed)
{
    require_positive(tol, "power_method_norm: tol");
    require(max_iter >= 1, "power_method_norm: max_iter must be >= 1");
    SeededRng rng(seed);
    Vector v(A.cols());
    for (Index i = 0; i < v.size(); ++i) v[i] = rng.normal();
    v.normalize();

    NormEstimate est;
    double lambda = 0.0;
    for (int it = 1; it <= max_iter; ++it) {
        const Vector w = A.adjoint(A.apply(v));
        const double next = v.dot(w);  // Rayleigh quotient of A'A
        const double wn = w.norm();
        est.iterations = it;
        if (wn == 0.0) {
            lambda = 0.0;
            est.converged = true;
            break;
        }
        v = w / wn;
        if (it > 1 && std::abs(next - lambda) <= tol * next) {
            lambda = next;
            est.converged = true;
            break;
        }
        lambda = next;
    }
    est.norm = std::sqrt(std::max(lambda, 0.0));
    return est;
}

double dot_test(const LinearOperator& A, int trials, std::uint64_t seed)
{
    require(trials >= 1, "dot_test: trials must be >= 1");
    SeededRng rng(seed);
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
        Vector x(A.cols()), y(A.rows());
        for (Index i = 0; i < x.size(); ++i) x[i] = rng.normal();
        for (Index i = 0; i < y.size(); ++i) y[i] = rng.normal();
        const double lhs = A.apply(x).dot(y);
        const double rhs = x.dot(A.adjoint(y));
        worst = std::max(worst, std::abs(lhs - rhs) / (1.0 + std::abs(lhs)));
    }
    return worst;
}

DiagPrecond diag_precond_vectors(const LinearOperator& A, double cap)
{
    require_positive(cap, "diag_precond_vectors: cap");
    const SparseMatrix M = A.materialize();
    Vector row = Vector::Zero(M.rows()), col = Vector::Zero(M.cols());
    for (Index i = 0; i < M.outerSize(); ++i) {
        for (SparseMatrix::InnerIterator it(M, i); it; ++it) {
            row[it.row()] += std::abs(it.value());
            col[it.col()] += std::abs(it.value());
        }
    }
    auto invert = [cap](const Vector& s) {
        Vector out(s.size());
        for (Index i = 0; i < s.size(); ++i) out[i] = s[i] > 0.0 ? std::min(1.0 / s[i], cap) : cap;
        return out;
    };
    return {invert(col), invert(row)};
}

void write_triplets(std::ostream& os, const SparseMatrix& A)
{
    const auto old = os.precision(17);
    for (Index i = 0; i < A.outerSize(); ++i)
        for (SparseMatrix::InnerIterator it(A, i); it; ++it)
            os << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
    os.precision(old);
}

} // namespace proxopt

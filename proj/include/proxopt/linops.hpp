#pragma once

#include "proxopt/types.hpp"

#include <Eigen/SparseCore>

#include <atomic>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace proxopt {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Cumulative forward/adjoint evaluation counts, shared by copies of a
/// counted operator.
struct OpCounter {
    std::atomic<long long> forward{0};
    std::atomic<long long> adjoint{0};

    void reset()
    {
        forward = 0;
        adjoint = 0;
    }
};

struct RadonSpec {
    Index n = 64;         // image side in pixels, image covers [-1,1]^2
    Index n_angles = 90;  // uniform on [0, pi)
    Index n_bins = 95;    // detector spacing equals the pixel size
};

/// Exact pixel/ray intersection lengths (Siddon), one row per (angle, bin).
SparseMatrix build_radon_matrix(const RadonSpec& spec);

class LinearOperator {
public:
    class Impl {
    public:
        virtual ~Impl() = default;
        virtual Index rows() const = 0;
        virtual Index cols() const = 0;
        virtual void apply(const Vector& x, Vector& out) const = 0;
        virtual void adjoint(const Vector& y, Vector& out) const = 0;
        virtual SparseMatrix materialize() const;
        virtual std::string kind() const = 0;
    };

    LinearOperator() = default;
    explicit LinearOperator(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

    static LinearOperator identity(Index n);
    static LinearOperator dense(Matrix A);
    static LinearOperator sparse(SparseMatrix A);
    /// Forward differences with Neumann boundary on an h x w image stored row
    /// by row. Output stacks the vertical then the horizontal differences.
    static LinearOperator grad2d(Index h, Index w);
    /// Parallel-beam ray-length matrix, rows ordered angle-major.
    static LinearOperator radon(const RadonSpec& spec);
    /// I_L (x) K acting on channel-stacked vectors.
    static LinearOperator kron_identity(const LinearOperator& K, Index L);
    /// Vertical stack (A_1; ...; A_k) of operators with equal column counts.
    static LinearOperator stack(std::vector<LinearOperator> blocks);
    static LinearOperator scaled(const LinearOperator& A, double s);
    /// A o B
    static LinearOperator compose(const LinearOperator& A, const LinearOperator& B);
    /// Wraps A so that every apply/adjoint bumps `counter`.
    static LinearOperator counted(const LinearOperator& A, std::shared_ptr<OpCounter> counter);

    bool valid() const { return static_cast<bool>(impl_); }
    Index rows() const { return impl_->rows(); }
    Index cols() const { return impl_->cols(); }
    std::string kind() const { return impl_->kind(); }

    Vector apply(const Vector& x) const;
    Vector adjoint(const Vector& y) const;
    /// Explicit matrix; never counted.
    SparseMatrix materialize() const;

    /// Sub-operators of a stack, empty otherwise.
    std::vector<LinearOperator> blocks() const;
    bool is_identity() const { return kind() == "identity"; }

    const Impl& impl() const { return *impl_; }

private:
    std::shared_ptr<const Impl> impl_;
};

struct NormEstimate {
    double norm = 0.0;
    bool converged = false;
    int iterations = 0;
};

/// Power iteration on A'A from a seeded normalized start.
NormEstimate power_method_norm(const LinearOperator& A, double tol = 1e-10,
                               int max_iter = 10000, std::uint64_t seed = 1);

/// max over trials of |<Ax,y> - <x,A'y>| / (1 + |<Ax,y>|)
double dot_test(const LinearOperator& A, int trials, std::uint64_t seed);

struct DiagPrecond {
    Vector tau;    // 1 / column abs sums
    Vector sigma;  // 1 / row abs sums
};

DiagPrecond diag_precond_vectors(const LinearOperator& A, double cap = 1e12);

/// One "row col value" line per stored entry, 0-indexed.
void write_triplets(std::ostream& os, const SparseMatrix& A);

} // namespace proxopt

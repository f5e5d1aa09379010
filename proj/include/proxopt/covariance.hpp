#pragma once

#include "proxopt/types.hpp"

#include <vector>

namespace proxopt {

/* Covariance of L stacked channels over m rays where channels are correlated
 * ray by ray but rays are independent. Vectors are stacked channel-major:
 * entry (channel l, ray i) lives at l * m + i. */
class BlockCovariance {
public:
    BlockCovariance() = default;

    /// `blocks[i]` is the L x L covariance of ray i. Throws unless every block
    /// is symmetric positive definite.
    static BlockCovariance from_ray_blocks(const std::vector<Matrix>& blocks);

    /// Same variances and correlation for every ray.
    static BlockCovariance uniform(Index rays, const Matrix& block);

    /// Accepts a dense (L m) x (L m) matrix whose cross-ray entries vanish.
    /// Rejected above 10^4 rays.
    static BlockCovariance from_dense(const Matrix& sigma, Index channels);

    Index rays() const { return rays_; }
    Index channels() const { return channels_; }
    Index dim() const { return rays_ * channels_; }

    Matrix block(Index ray) const;
    /// Lower Cholesky factor of the ray block.
    Matrix cholesky_factor(Index ray) const;

    /// Drops the cross-channel terms.
    BlockCovariance diagonal_only() const;
    bool is_diagonal() const;

    Vector apply(const Vector& r) const;
    Vector apply_inverse(const Vector& r) const;

    /// (Sigma + t I)^{-1} (Sigma v + t data): the prox of
    /// t/2 ||. - data||^2_{Sigma^-1} at v.
    Vector solve_shifted(const Vector& v, const Vector& data, double t) const;
    Vector solve_shifted_diag(const Vector& v, const Vector& data, const Vector& t) const;

private:
    Index rays_ = 0;
    Index channels_ = 0;
    std::vector<double> cov_;   // rays * L * L, column-major per ray
    std::vector<double> chol_;  // lower factors, same layout
};

} // namespace proxopt

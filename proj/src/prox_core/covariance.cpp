#include "proxopt/covariance.hpp"

#include <Eigen/Cholesky>

#include <cmath>

namespace proxopt {

namespace {

using BlockMap = Eigen::Map<Matrix>;
using ConstBlockMap = Eigen::Map<const Matrix>;

constexpr Index kMaxDenseRays = 10000;

} // namespace

BlockCovariance BlockCovariance::from_ray_blocks(const std::vector<Matrix>& blocks)
{
    require(!blocks.empty(), "covariance: at least one ray required");
    const Index L = blocks.front().rows();
    require(L >= 1, "covariance: at least one channel required");

    BlockCovariance c;
    c.rays_ = static_cast<Index>(blocks.size());
    c.channels_ = L;
    c.cov_.resize(blocks.size() * L * L);
    c.chol_.resize(blocks.size() * L * L);
    for (Index i = 0; i < c.rays_; ++i) {
        const Matrix& S = blocks[i];
        require(S.rows() == L && S.cols() == L, "covariance: inconsistent block size");
        require(S.allFinite(), "covariance: non-finite entry");
        require((S - S.transpose()).cwiseAbs().maxCoeff() <=
                    1e-12 * (1.0 + S.cwiseAbs().maxCoeff()),
                "covariance: block is not symmetric");
        Eigen::LLT<Matrix> llt(S);
        if (llt.info() != Eigen::Success)
            throw InvalidArgument("covariance: block " + std::to_string(i) +
                                  " is not positive definite");
        BlockMap(c.cov_.data() + i * L * L, L, L) = S;
        BlockMap(c.chol_.data() + i * L * L, L, L) = llt.matrixL();
    }
    return c;
}

BlockCovariance BlockCovariance::uniform(Index rays, const Matrix& block)
{
    require(rays >= 1, "covariance: at least one ray required");
    return from_ray_blocks(std::vector<Matrix>(static_cast<size_t>(rays), block));
}

BlockCovariance BlockCovariance::from_dense(const Matrix& sigma, Index channels)
{
    require(channels >= 1, "covariance: at least one channel required");
    require(sigma.rows() == sigma.cols() && sigma.rows() % channels == 0,
            "covariance: dense matrix size is not a multiple of the channel count");
    const Index m = sigma.rows() / channels;
    if (m > kMaxDenseRays)
        throw InvalidArgument("covariance: dense input rejected above 10^4 rays");

    std::vector<Matrix> blocks(static_cast<size_t>(m), Matrix(channels, channels));
    for (Index r = 0; r < sigma.rows(); ++r) {
        for (Index c = 0; c < sigma.cols(); ++c) {
            const Index ray_r = r % m, ray_c = c % m;
            if (ray_r != ray_c) {
                if (sigma(r, c) != 0.0)
                    throw InvalidArgument("covariance: cross-ray correlation is not supported");
                continue;
            }
            blocks[ray_r](r / m, c / m) = sigma(r, c);
        }
    }
    return from_ray_blocks(blocks);
}

Matrix BlockCovariance::block(Index ray) const
{
    const Index L = channels_;
    return ConstBlockMap(cov_.data() + ray * L * L, L, L);
}

Matrix BlockCovariance::cholesky_factor(Index ray) const
{
    const Index L = channels_;
    return ConstBlockMap(chol_.data() + ray * L * L, L, L);
}

BlockCovariance BlockCovariance::diagonal_only() const
{
    std::vector<Matrix> blocks(static_cast<size_t>(rays_));
    for (Index i = 0; i < rays_; ++i)
        blocks[i] = block(i).diagonal().asDiagonal();
    return from_ray_blocks(blocks);
}

bool BlockCovariance::is_diagonal() const
{
    for (Index i = 0; i < rays_; ++i) {
        Matrix S = block(i);
        S.diagonal().setZero();
        if (S.cwiseAbs().maxCoeff() != 0.0) return false;
    }
    return true;
}

Vector BlockCovariance::apply(const Vector& r) const
{
    require_dims(r.size(), dim(), "covariance apply");
    const Index L = channels_, m = rays_;
    Vector out(r.size());
    Vector local(L);
    for (Index i = 0; i < m; ++i) {
        for (Index l = 0; l < L; ++l) local[l] = r[l * m + i];
        const Vector res = ConstBlockMap(cov_.data() + i * L * L, L, L) * local;
        for (Index l = 0; l < L; ++l) out[l * m + i] = res[l];
    }
    return out;
}

Vector BlockCovariance::apply_inverse(const Vector& r) const
{
    require_dims(r.size(), dim(), "covariance apply_inverse");
    const Index L = channels_, m = rays_;
    Vector out(r.size());
    Vector local(L);
    for (Index i = 0; i < m; ++i) {
        for (Index l = 0; l < L; ++l) local[l] = r[l * m + i];
        const auto Lf = ConstBlockMap(chol_.data() + i * L * L, L, L).triangularView<Eigen::Lower>();
        Lf.solveInPlace(local);
        Lf.transpose().solveInPlace(local);
        for (Index l = 0; l < L; ++l) out[l * m + i] = local[l];
    }
    return out;
}

Vector BlockCovariance::solve_shifted(const Vector& v, const Vector& data, double t) const
{
    return solve_shifted_diag(v, data, Vector::Constant(dim(), t));
}

Vector BlockCovariance::solve_shifted_diag(const Vector& v, const Vector& data,
                                           const Vector& t) const
{
    require_dims(v.size(), dim(), "covariance prox");
    require_dims(data.size(), dim(), "covariance prox");
    require_dims(t.size(), dim(), "covariance prox");
    const Index L = channels_, m = rays_;
    Vector out(v.size());
    Vector rhs(L);
    for (Index i = 0; i < m; ++i) {
        const ConstBlockMap S(cov_.data() + i * L * L, L, L);
        const double ti = t[i];
        for (Index l = 1; l < L; ++l)
            if (t[l * m + i] != ti)
                throw InvalidArgument("covariance prox: steps must be constant within a ray");
        Vector sv(L), d(L);
        for (Index l = 0; l < L; ++l) {
            sv[l] = v[l * m + i];
            d[l] = data[l * m + i];
        }
        rhs = S * sv + ti * d;
        Matrix M = S;
        M.diagonal().array() += ti;
        const Vector z = M.llt().solve(rhs);
        for (Index l = 0; l < L; ++l) out[l * m + i] = z[l];
    }
    return out;
}

} // namespace proxopt

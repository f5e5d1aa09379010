#include "proxopt/simulate.hpp"

#include <algorithm>
#include <cmath>

namespace proxopt {

Vector make_phantom(const PhantomSpec& spec)
{
    require(spec.n >= 1, "phantom: side must be >= 1");
    const Index n = spec.n;
    const double h = 2.0 / static_cast<double>(n);
    Vector img = Vector::Zero(n * n);
    for (const auto& e : spec.shapes) {
        require(e.ax > 0.0 && e.ay > 0.0, "phantom: semi-axes must be positive");
        require(std::isfinite(e.intensity) && std::isfinite(e.angle) && std::isfinite(e.cx) &&
                    std::isfinite(e.cy),
                "phantom: ellipse parameters must be finite");
        const double c = std::cos(e.angle), s = std::sin(e.angle);
        for (Index r = 0; r < n; ++r) {
            const double y = 1.0 - (static_cast<double>(r) + 0.5) * h - e.cy;
            for (Index col = 0; col < n; ++col) {
                const double x = -1.0 + (static_cast<double>(col) + 0.5) * h - e.cx;
                const double u = (c * x + s * y) / e.ax;
                const double v = (-s * x + c * y) / e.ay;
                if (u * u + v * v <= 1.0) img[r * n + col] += e.intensity;
            }
        }
    }
    if ((img.array() < 0.0).any())
        throw InvalidArgument("phantom: intensities sum to a negative value somewhere");
    return img;
}

PhantomSpec pet_phantom(Index n)
{
    PhantomSpec p;
    p.n = n;
    p.shapes = {
        {0.0, 0.0, 0.72, 0.58, 0.0, 1.0},       // body
        {-0.32, 0.12, 0.13, 0.13, 0.0, 2.0},    // hot lesion
        {0.28, -0.22, 0.10, 0.16, 0.5, 1.5},    // hot organ
        {0.20, 0.26, 0.16, 0.11, -0.3, -0.7},   // cold region
    };
    return p;
}

std::vector<PhantomSpec> material_phantoms(Index n)
{
    PhantomSpec soft, bone;
    soft.n = bone.n = n;
    soft.shapes = {
        {0.0, 0.0, 0.75, 0.6, 0.0, 1.0},
        {-0.35, 0.0, 0.18, 0.3, 0.0, -0.6},  // lung-like low density
        {0.35, 0.0, 0.18, 0.3, 0.0, -0.6},
    };
    bone.shapes = {
        {0.0, -0.38, 0.12, 0.1, 0.0, 1.0},   // spine
        {0.0, 0.42, 0.3, 0.05, 0.0, 0.8},    // sternum
    };
    return {soft, bone};
}

Vector simulate_poisson_sinogram(const LinearOperator& K, const Vector& image, double total_counts,
                                 SeededRng& rng)
{
    require_dims(image.size(), K.cols(), "poisson sinogram image");
    require_finite(image, "poisson sinogram image");
    require((image.array() >= 0.0).all(), "poisson sinogram: image must be >= 0");
    require_positive(total_counts, "poisson sinogram: total counts");
    if (image.isZero(0.0)) return Vector::Zero(K.rows());

    const Vector mean = K.apply(image);
    const double sum = mean.sum();
    if (!(sum > 0.0))
        throw InvalidArgument("poisson sinogram: zero forward projection with a positive target");
    const double scale = total_counts / sum;
    Vector counts(mean.size());
    for (Index i = 0; i < mean.size(); ++i)
        counts[i] = static_cast<double>(rng.poisson(scale * mean[i]));
    return counts;
}

Vector simulate_correlated_sinograms(const Vector& mean, const BlockCovariance& cov, SeededRng& rng)
{
    require_dims(mean.size(), cov.dim(), "correlated sinograms");
    const Index m = cov.rays(), L = cov.channels();
    Vector out = mean;
    Vector xi(L);
    for (Index i = 0; i < m; ++i) {
        const Matrix C = cov.cholesky_factor(i);
        for (Index l = 0; l < L; ++l) xi[l] = rng.normal();
        const Vector z = C * xi;
        for (Index l = 0; l < L; ++l) out[l * m + i] += z[l];
    }
    return out;
}

GroundTruth compute_ground_truth(const CompositeProblem& prob, int iterations)
{
    require(iterations >= 1, "ground truth: iterations must be >= 1");
    GroundTruth gt;
    gt.iterations = iterations;

    // injectivity is only probed cheaply: an empty column rules it out
    if (prob.poisson) {
        const SparseMatrix K = prob.poisson->K.materialize();
        Vector colsum = Vector::Zero(K.cols());
        for (Index i = 0; i < K.outerSize(); ++i)
            for (SparseMatrix::InnerIterator it(K, i); it; ++it) colsum[it.col()] += std::abs(it.value());
        if (K.rows() < K.cols() || (colsum.array() == 0.0).any())
            gt.warnings.push_back("ground truth: K is not injective, the minimizer may not be unique");
    }

    SolverConfig cfg;
    cfg.precondition = true;
    cfg.max_iter = iterations;
    cfg.tol = 0.0;
    cfg.log_every = iterations;
    // balance primal and dual steps by the intensity scale of the start
    const double beta = std::max(1.0, prob.x0.size() ? prob.x0.cwiseAbs().maxCoeff() : 0.0);
    cfg.tau = beta;
    cfg.sigma = 1.0 / beta;
    auto res = run_pdhgmp(prob, cfg);
    if (res.record.diverged) throw NumericalFailure("ground truth: reference run diverged");
    for (auto& w : res.record.warnings) gt.warnings.push_back(std::move(w));
    gt.u = std::move(res.x);

    ImageData img;
    img.dims = {static_cast<std::uint32_t>(gt.u.size())};
    if (prob.poisson)
        img.dims = {static_cast<std::uint32_t>(prob.poisson->height),
                    static_cast<std::uint32_t>(prob.poisson->width)};
    img.values = gt.u;
    gt.digest = sha256_hex(proximg_bytes(img));
    return gt;
}

} // namespace proxopt

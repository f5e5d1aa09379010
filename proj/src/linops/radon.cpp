#include "proxopt/linops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace proxopt {

/* Geometry: the image covers [-1,1]^2 with pixel size h = 2/n, row 0 at the
 * top. Ray (a, k) is the line { s_k theta + t theta_perp } with
 * theta = (cos phi_a, sin phi_a), phi_a = a pi / n_angles and detector
 * position s_k = (k - (n_bins - 1)/2) h. */
SparseMatrix build_radon_matrix(const RadonSpec& spec)
{
    require(spec.n >= 1 && spec.n_angles >= 1 && spec.n_bins >= 1,
            "radon: n, n_angles and n_bins must be >= 1");
    const Index n = spec.n;
    const double h = 2.0 / static_cast<double>(n);
    require(h > 0.0 && std::isfinite(h), "radon: degenerate pixel size");

    std::vector<Eigen::Triplet<double>> trip;
    std::vector<double> ts;
    ts.reserve(static_cast<size_t>(2 * n + 4));

    for (Index a = 0; a < spec.n_angles; ++a) {
        const double phi = std::numbers::pi * static_cast<double>(a) / static_cast<double>(spec.n_angles);
        const double c = std::cos(phi), s = std::sin(phi);
        const double dx = -s, dy = c;  // ray direction
        for (Index k = 0; k < spec.n_bins; ++k) {
            const Index row = a * spec.n_bins + k;
            const double off = (static_cast<double>(k) - 0.5 * static_cast<double>(spec.n_bins - 1)) * h;
            const double x0 = off * c, y0 = off * s;

            // parameter interval inside the square
            double tmin = -std::numeric_limits<double>::infinity();
            double tmax = std::numeric_limits<double>::infinity();
            auto clip = [&](double p0, double d) {
                if (std::abs(d) < 1e-15) {
                    if (p0 < -1.0 || p0 > 1.0) tmin = tmax = 0.0;
                    return;
                }
                double t1 = (-1.0 - p0) / d, t2 = (1.0 - p0) / d;
                if (t1 > t2) std::swap(t1, t2);
                tmin = std::max(tmin, t1);
                tmax = std::min(tmax, t2);
            };
            clip(x0, dx);
            clip(y0, dy);
            if (!(tmax > tmin)) continue;

            ts.clear();
            ts.push_back(tmin);
            ts.push_back(tmax);
            if (std::abs(dx) >= 1e-15)
                for (Index i = 0; i <= n; ++i) {
                    const double t = (-1.0 + h * static_cast<double>(i) - x0) / dx;
                    if (t > tmin && t < tmax) ts.push_back(t);
                }
            if (std::abs(dy) >= 1e-15)
                for (Index j = 0; j <= n; ++j) {
                    const double t = (-1.0 + h * static_cast<double>(j) - y0) / dy;
                    if (t > tmin && t < tmax) ts.push_back(t);
                }
            std::sort(ts.begin(), ts.end());

            for (size_t q = 0; q + 1 < ts.size(); ++q) {
                const double len = ts[q + 1] - ts[q];
                if (len <= 1e-14) continue;
                const double tm = 0.5 * (ts[q] + ts[q + 1]);
                const double xm = x0 + tm * dx, ym = y0 + tm * dy;
                const Index col = static_cast<Index>(std::floor((xm + 1.0) / h));
                const Index r = static_cast<Index>(std::floor((1.0 - ym) / h));
                if (col < 0 || col >= n || r < 0 || r >= n) continue;
                trip.emplace_back(row, r * n + col, len);
            }
        }
    }

    SparseMatrix M(spec.n_angles * spec.n_bins, n * n);
    M.setFromTriplets(trip.begin(), trip.end());
    M.makeCompressed();
    return M;
}

} // namespace proxopt

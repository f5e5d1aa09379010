#pragma once

#include "proxopt/rng.hpp"
#include "proxopt/types.hpp"

inline proxopt::Vector random_vector(proxopt::SeededRng& rng, proxopt::Index n, double scale = 1.0)
{
    proxopt::Vector v(n);
    for (proxopt::Index i = 0; i < n; ++i) v[i] = scale * rng.normal();
    return v;
}

inline proxopt::Matrix random_matrix(proxopt::SeededRng& rng, proxopt::Index r, proxopt::Index c)
{
    proxopt::Matrix m(r, c);
    for (proxopt::Index j = 0; j < c; ++j)
        for (proxopt::Index i = 0; i < r; ++i) m(i, j) = rng.normal();
    return m;
}

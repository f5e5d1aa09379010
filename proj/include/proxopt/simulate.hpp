#pragma once

#include "proxopt/covariance.hpp"
#include "proxopt/rng.hpp"
#include "proxopt/solvers.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace proxopt {

// ---------------------------------------------------------------------------
// Phantoms. Images cover [-1,1]^2, stored row by row with row 0 at the top;
// pixel (r, c) has center (-1 + (c + 1/2) h, 1 - (r + 1/2) h), h = 2/n.

struct Ellipse {
    double cx = 0.0, cy = 0.0;  // center
    double ax = 0.0, ay = 0.0;  // semi-axes
    double angle = 0.0;         // rotation in radians
    double intensity = 0.0;     // added inside
};

struct PhantomSpec {
    Index n = 64;
    std::vector<Ellipse> shapes;
};

/// Sum of ellipse indicators sampled at pixel centers. Throws if the sum is
/// negative anywhere.
Vector make_phantom(const PhantomSpec& spec);

/// Activity phantom used by the PET protocol: a body with two hot and one
/// cold region.
PhantomSpec pet_phantom(Index n);

/// Two-material phantom for the spectral PWLS protocol; channel 0 is soft
/// tissue, channel 1 bone.
std::vector<PhantomSpec> material_phantoms(Index n);

// ---------------------------------------------------------------------------
// Noisy data

/// Scales K image to the expected total and draws independent Poisson counts.
Vector simulate_poisson_sinogram(const LinearOperator& K, const Vector& image,
                                 double total_counts, SeededRng& rng);

/// mean + C xi ray by ray, where C is the Cholesky factor of the ray block.
Vector simulate_correlated_sinograms(const Vector& mean, const BlockCovariance& cov, SeededRng& rng);

// ---------------------------------------------------------------------------
// Ground truth

struct GroundTruth {
    Vector u;
    std::string digest;      // SHA-256 of the serialized image
    int iterations = 0;
    std::vector<std::string> warnings;
};

/// Fixed-iteration run of the diagonally preconditioned PDHGMp on a problem
/// built for the pdhg splitting. Primal steps are scaled by max(1, |x0|_inf)
/// and dual steps by its inverse.
GroundTruth compute_ground_truth(const CompositeProblem& prob, int iterations);

// ---------------------------------------------------------------------------
// PROXIMG1 serialization

struct ImageData {
    std::vector<std::uint32_t> dims;
    Vector values;  // row-major, last dimension fastest
};

void write_proximg(std::ostream& os, const ImageData& img);
ImageData read_proximg(std::istream& is);
void save_proximg(const std::string& path, const ImageData& img);
ImageData load_proximg(const std::string& path);

std::string proximg_bytes(const ImageData& img);
std::string sha256_hex(const std::string& bytes);

} // namespace proxopt

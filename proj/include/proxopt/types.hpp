#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>

namespace proxopt {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/* Error hierarchy. Everything thrown by the library derives from Error so the
 * CLI can map failures to exit codes without catching std::exception. */
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidArgument : Error {
    using Error::Error;
};

struct DimensionMismatch : InvalidArgument {
    using InvalidArgument::InvalidArgument;
};

struct InfeasibleSet : Error {
    using Error::Error;
};

struct NumericalFailure : Error {
    using Error::Error;
};

inline void require(bool ok, const std::string& what)
{
    if (!ok) throw InvalidArgument(what);
}

inline void require_dims(Index got, Index want, const char* where)
{
    if (got != want)
        throw DimensionMismatch(std::string(where) + ": dimension " +
                                std::to_string(got) + " != expected " +
                                std::to_string(want));
}

inline void require_finite(const Vector& x, const char* where)
{
    if (!x.allFinite())
        throw InvalidArgument(std::string(where) + ": non-finite input");
}

inline void require_positive(double v, const char* name)
{
    if (!(v > 0.0) || !std::isfinite(v))
        throw InvalidArgument(std::string(name) + " must be positive and finite");
}

} // namespace proxopt

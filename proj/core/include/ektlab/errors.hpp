#pragma once

#include <stdexcept>
#include <string>

namespace ektlab {

/// Bad or inconsistent run configuration (CLI exit code 1).
struct config_error : std::runtime_error {
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid geometric input: point outside the model disk, degenerate
/// geodesic pair, non-convex quadrilateral, ... (CLI exit code 2).
struct geometry_error : std::runtime_error {
  explicit geometry_error(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure in a solver: Newton divergence, eigen iteration
/// stall, quadrature that cannot reach tolerance (CLI exit code 3).
struct solver_error : std::runtime_error {
  explicit solver_error(const std::string& what) : std::runtime_error(what) {}
};

/// A mesh family lost its topology, e.g. neck collapse in the annulus
/// minimizer (CLI exit code 4).
struct degeneration_error : std::runtime_error {
  explicit degeneration_error(const std::string& what) : std::runtime_error(what) {}
};

/// Underdetermined or rank-deficient local fit on a mesh.
struct discretization_error : std::runtime_error {
  explicit discretization_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ektlab

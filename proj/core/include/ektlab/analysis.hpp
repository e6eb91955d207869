#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <optional>
#include <variant>
#include <vector>

#include "ektlab/domain_mesh.hpp"
#include "ektlab/ekt.hpp"
#include "ektlab/hyp2.hpp"
#include "ektlab/trimesh.hpp"

// Diagnostics over computed surfaces: second fundamental form, horizontal
// points and level-set topology, tangency counts against the minimal
// foliations, the Jacobi stability spectrum, and Killing-field flux.
namespace ektlab::analysis {

using annulus::LevelComponent;
using annulus::TriMesh;

/// Graph Gr(u) over a domain mesh, as a TriMesh with one boundary loop.
TriMesh lift_graph(const graph::DomainMesh& mesh, const graph::ScalarField& u);

/// Outward-units normal field (metric-unit, consistently oriented).
std::vector<Eigen::Vector3d> vertex_normals(const ekt::MetricSpec& spec,
                                            const TriMesh& mesh);

// ---- second fundamental form -----------------------------------------------

struct CurvatureField {
  std::vector<double> absA;  // |A| per vertex
  std::vector<double> H;     // mean curvature per vertex
  std::vector<char> flagged;  // rank-deficient fits, excluded from sup
  double sup_absA = 0.0;
  double median_absA = 0.0;
  double median_absH = 0.0;
};

CurvatureField second_form(const ekt::MetricSpec& spec, const TriMesh& mesh);

// ---- discrete Morse machinery -------------------------------------------------

enum class CriticalType { minimum, maximum, saddle };

struct CriticalPoint {
  int vertex = -1;
  CriticalType type = CriticalType::saddle;
  int multiplicity = 1;  // (sign changes - 2)/2 for saddles
  double value = 0.0;
};

struct HorizontalPointsReport {
  std::vector<CriticalPoint> points;  // interior critical vertices of z
  double h_plus = 0.0, h_minus = 0.0;
  int count() const { return static_cast<int>(points.size()); }
};

/// Interior critical vertices of the height function by lower-link sign
/// counting; ties broken by symbolic (index-order) perturbation.
HorizontalPointsReport horizontal_points(const TriMesh& mesh);

/// Same machinery for an arbitrary per-vertex scalar.
std::vector<CriticalPoint> critical_points(const TriMesh& mesh,
                                           const std::vector<double>& f);

// ---- level curves --------------------------------------------------------------

struct LevelTopology {
  std::vector<LevelComponent> components;
  int n_open = 0, n_closed = 0;
  double t_used = 0.0;  // possibly shifted off a critical value
  bool shifted = false;
};

LevelTopology level_curve(const ekt::MetricSpec& spec, const TriMesh& mesh, double t,
                          double eps_t = 1e-9);

// ---- foliations and tangencies ---------------------------------------------------

struct HorizontalFoliation {};
struct VerticalPerpFoliation {
  hyp2::HGeodesic beta;
};
struct GraphTranslatesFoliation {
  const graph::DomainMesh* domain = nullptr;
  const graph::ScalarField* u = nullptr;
};

using FoliationSpec =
    std::variant<HorizontalFoliation, VerticalPerpFoliation, GraphTranslatesFoliation>;

/// Leaf coordinate of the foliation at an ambient point.
double leaf_coordinate(const FoliationSpec& fol, const ekt::EPoint& p);

struct TangencyReport {
  int count = 0;                       // interior tangencies
  std::vector<CriticalPoint> points;   // their locations
  int boundary_critical = 0;           // boundary contamination, reported apart
};

TangencyReport tangency_count(const ekt::MetricSpec& spec, const TriMesh& mesh,
                              const FoliationSpec& fol);

// ---- Jacobi operator ---------------------------------------------------------------

enum class Stability { strictly_stable, stable_unstable, unstable };

struct StabilityReport {
  double lambda1 = 0.0;
  Stability classification = Stability::strictly_stable;
  std::vector<double> eigenfunction;  // L2(mesh)-normalized, zero on boundary
};

struct JacobiOperator {
  Eigen::SparseMatrix<double> stiffness;  // intrinsic cotangent weights, full mesh
  Eigen::VectorXd mass;                   // lumped intrinsic vertex areas
  Eigen::VectorXd potential;              // q = |A|^2 + Ric(N,N) per vertex
  std::vector<int> interior;              // Dirichlet-free vertex ids
};

JacobiOperator assemble_jacobi(const ekt::MetricSpec& spec, const TriMesh& mesh,
                               const CurvatureField* curvature = nullptr);

/// First Dirichlet eigenvalue of the stability form
/// integral(|grad f|^2 - q f^2) by shifted inverse iteration; the
/// classification band eps_lambda separates strictly_stable / stable_unstable.
StabilityReport jacobi_operator(const ekt::MetricSpec& spec, const TriMesh& mesh,
                                const CurvatureField* curvature = nullptr,
                                double eps_lambda = 1e-4);

/// First Dirichlet eigenvalue of the plain Laplace-Beltrami operator on the
/// same discretization (for the vertical-plane q = -1 cross-check).
double laplacian_lambda1(const ekt::MetricSpec& spec, const TriMesh& mesh);

struct JacobiFieldResidual {
  double residual = 0.0;        // ||L N3|| / ||N3|| in the discrete L2 norm
  bool degenerate = false;      // N3 identically zero (vertical surface)
  double n3_norm = 0.0;
  double median_absH = 0.0;     // minimality check input
};

/// N3 = <E3, N> is a Jacobi field on any minimal surface here; the residual
/// measures how well the discrete surface satisfies that.
JacobiFieldResidual jacobi_field_residual(const ekt::MetricSpec& spec,
                                          const TriMesh& mesh);

// ---- flux -----------------------------------------------------------------------

/// Line integral of <E3, nu> along boundary loop `loop_id` with outward
/// conormal nu.
double flux_boundary_loop(const ekt::MetricSpec& spec, const TriMesh& mesh, int loop_id);

/// Flux through a level component (conormal oriented toward increasing z).
double flux_level(const ekt::MetricSpec& spec, const TriMesh& mesh,
                  const LevelComponent& comp);

double total_boundary_length(const ekt::MetricSpec& spec, const TriMesh& mesh);

// ---- reports ----------------------------------------------------------------------

void write_curvature_csv(std::ostream& os, const TriMesh& mesh,
                         const CurvatureField& cf);
void write_level_polylines(std::ostream& os, const std::vector<LevelComponent>& comps);

}  // namespace ektlab::analysis

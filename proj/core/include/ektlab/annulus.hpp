#pragma once

#include <Eigen/Dense>

#include <optional>
#include <vector>

#include "ektlab/ekt.hpp"
#include "ektlab/hyp2.hpp"
#include "ektlab/trimesh.hpp"

// Fixed-boundary area minimization for annuli spanning the vertical slabs
// gamma1 x R and gamma2 x R, boundary curve generation, and the Douglas
// criterion comparator.
namespace ektlab::annulus {

/// (s,z) chart of a vertical plane geodesic x R. s is arclength along the
/// geodesic (zero at the point closest to the origin); the chart area
/// element is exactly ds dz.
struct SlabChart {
  hyp2::HGeodesic geodesic;
  ekt::EPoint to_ambient(double s, double z) const;
  Eigen::Vector2d to_chart(const ekt::EPoint& p) const;
};

/// Rounded rectangle in a slab: the boundary of seg x [-n,n] with the four
/// corners smoothed by circular arcs of radius rho in chart coordinates.
struct BoundaryCurve {
  SlabChart chart;
  double s_center = 0.0, s_half = 0.0;  // gamma side [-s_half, s_half] about s_center
  double height = 0.0;                  // n
  double corner_radius = 0.0;           // rho
  int side_index = 0;                   // provenance: which gamma side
  std::vector<Eigen::Vector2d> chart_samples;  // closed, counterclockwise
  std::vector<ekt::EPoint> samples;

  /// Closest point on the ideal rounded rectangle (not the sample polyline).
  Eigen::Vector2d project_chart(const Eigen::Vector2d& q) const;
  ekt::EPoint project(const ekt::EPoint& p) const;
  bool contains_chart(const Eigen::Vector2d& q) const;
  /// Chart distance from the curve (0 on it, >0 elsewhere).
  double chart_distance(const Eigen::Vector2d& q) const;
  /// Area enclosed in the chart: 4*s_half*n - (4-pi) rho^2.  Equals the
  /// ambient area of the minimal slab disk it bounds.
  double enclosed_area() const;
};

/// Curve Gamma^i_n for side i of the quadrilateral.
BoundaryCurve build_boundary(const hyp2::HGeodesic& g, const hyp2::HSegment& seg,
                             double n, double rho, int m, int side_index = 0);

/// Total ambient area: per-triangle 3-point quadrature of sqrt(det) of the
/// pulled-back metric under the affine-coordinate parametrization.
double ambient_area(const ekt::MetricSpec& spec, const TriMesh& mesh);

/// Exact derivative of the quadrature above with respect to the vertex
/// coordinates (metric derivatives in closed form, no finite differences).
void ambient_area_gradient(const ekt::MetricSpec& spec, const TriMesh& mesh,
                           std::vector<Eigen::Vector3d>& grad, double* area = nullptr);

struct DouglasReport {
  double disk_area_sum = 0.0;             // 2n (l(gamma1)+l(gamma2))
  double comparison_annulus_area = 0.0;   // 2 Area(Omega) + 2n (l(eta1)+l(eta2))
  double gap = 0.0;                       // comparison - disk_sum
  std::optional<int> n_threshold;         // smallest n with gap < 0; empty if none
};

DouglasReport douglas_gap(const ekt::MetricSpec& spec, const hyp2::QuadDomain& omega,
                          double n);

enum class AnnulusStyle { comparison, tube };

struct AnnulusBuildOptions {
  int ns = 24;      // resolution along the gamma sides
  int nt = 12;      // resolution across Omega (eta direction)
  int nz = 24;      // vertical resolution of the side strips
  int rings = 12;   // cross-sections for tube style
};

/// style=comparison reproduces the Douglas comparison annulus (two
/// horizontal copies of Omega joined by the eta-side strips) up to the
/// corner-rounding collars; style=tube lofts directly between the curves.
TriMesh build_initial_annulus(const BoundaryCurve& c1, const BoundaryCurve& c2,
                              const hyp2::QuadDomain& omega, AnnulusStyle style,
                              const AnnulusBuildOptions& opts = {});

enum class MinimizeStatus { converged, max_iterations, degenerated };

struct MinimizeOptions {
  double tolerance_scale = 1e-6;  // gradient tolerance = scale * mean edge length
  int max_iterations = 20000;
  bool preconditioned = true;     // intrinsic-Laplacian preconditioner
  int smooth_every = 25;          // tangential smoothing cadence (0 = off)
  int neck_check_every = 20;
  double neck_factor = 5.0;       // collapse when neck < factor * mean edge
  std::optional<hyp2::HGeodesic> neck_axis;  // defaults to perpendicular of the slabs
  const BoundaryCurve* curve0 = nullptr;     // pinning curves by curve_id
  const BoundaryCurve* curve1 = nullptr;
};

struct MinimizeReport {
  MinimizeStatus status = MinimizeStatus::max_iterations;
  int iterations = 0;
  double area = 0.0;
  double gradient_norm = 0.0;
  double neck_width = 0.0;
};

MinimizeReport minimize_area(const ekt::MetricSpec& spec, TriMesh& mesh,
                             const MinimizeOptions& opts);

struct SweepRecord {
  double n = 0.0;
  MinimizeStatus status = MinimizeStatus::max_iterations;
  double area = 0.0;
  double h_plus = 0.0, h_minus = 0.0;
  double neck_width = 0.0;
  std::string error;  // per-n failures are recorded, the sweep continues
};

struct SweepOptions {
  double rho = 0.05;
  int curve_samples = 64;
  AnnulusBuildOptions build;
  MinimizeOptions minimize;
  bool keep_meshes = false;
};

std::vector<SweepRecord> sweep_n(const ekt::MetricSpec& spec,
                                 const hyp2::QuadDomain& omega,
                                 const std::vector<double>& n_list,
                                 const SweepOptions& opts,
                                 std::vector<TriMesh>* meshes = nullptr);

const char* to_string(MinimizeStatus s);

/// Width of the narrowest closed loop in which the annulus crosses the
/// leaves perpendicular to `axis` (the discrete neck).
double neck_width(const ekt::MetricSpec& spec, const TriMesh& mesh,
                  const hyp2::HGeodesic& axis, int levels = 9);

}  // namespace ektlab::annulus

#pragma once

#include <Eigen/Dense>

#include <array>
#include <iosfwd>
#include <optional>
#include <string>

#include "ektlab/errors.hpp"

// Computational geometry of the hyperbolic plane in the disk model of
// radius 2, i.e. {x^2+y^2 < 4} with metric lambda^2 (dx^2+dy^2),
// lambda = 4/(4-(x^2+y^2)).  Distances and incidence are evaluated in the
// Minkowski (hyperboloid) model; coordinates are converted on demand.
// Note the radius-2 normalization: dist(0,(r,0)) = 2 artanh(r/2).
namespace ektlab::hyp2 {

inline constexpr double disk_radius = 2.0;

// Points closer to the ideal boundary than this (measured by 4 - x^2 - y^2)
// are rejected: lambda blows up there.
inline constexpr double boundary_guard = 1e-9;

// dist(g1,g2) >= 2 ln(sqrt(2)+1) is the non-existence regime for the
// minimal annuli this toolkit studies.  Equal to arcosh(3).
double distance_threshold();

struct HPoint {
  double x = 0.0;
  double y = 0.0;
};

/// Angular coordinate on the ideal boundary circle x^2+y^2 = 4.
struct IdealPoint {
  double theta = 0.0;  // radians, normalized to [0, 2*pi)
};

IdealPoint make_ideal(double theta);

/// A complete geodesic, stored by its two ideal endpoints.  `polar` caches
/// the unit spacelike Minkowski vector whose orthogonal plane cuts out the
/// geodesic; its sign fixes a co-orientation (positive side = left of the
/// a->b traversal).
struct HGeodesic {
  IdealPoint a, b;
  Eigen::Vector3d polar;
};

struct HSegment {
  HGeodesic geodesic;
  HPoint a, b;
};

/// Convex geodesic quadrilateral.  Vertices (p1,q1,p2,q2) in counter-
/// clockwise order; sides (gamma1, eta1, gamma2, eta2) with gamma1 = p1q1,
/// eta1 = q1p2, gamma2 = p2q2, eta2 = q2p1.
struct QuadDomain {
  std::array<HPoint, 4> vertex;
  std::array<HSegment, 4> side;
};

/// Ideal quadrilateral: four ideal vertices in cyclic order, sides
/// (gamma1, eta1, gamma2, eta2) joining consecutive vertices.
struct IdealQuadDomain {
  std::array<IdealPoint, 4> vertex;
  std::array<HGeodesic, 4> side;
};

// ---- Minkowski (hyperboloid) model helpers, signature (-,+,+). ----------

double mdot(const Eigen::Vector3d& u, const Eigen::Vector3d& v);

/// Disk point -> hyperboloid sheet {<X,X> = -1, X0 > 0}.  Throws
/// geometry_error when the point violates the boundary guard.
Eigen::Vector3d embed(const HPoint& p);
HPoint unembed(const Eigen::Vector3d& X);

/// Null direction of an ideal point: (1, cos theta, sin theta).
Eigen::Vector3d ideal_null(const IdealPoint& q);

// ---- Basic operations ----------------------------------------------------

void check_in_disk(const HPoint& p);

double dist(const HPoint& p, const HPoint& q);

HGeodesic geodesic_from_ideal(const IdealPoint& a, const IdealPoint& b);
HGeodesic geodesic_through(const HPoint& p, const HPoint& q);

/// Euclidean center/radius of the circular arc realizing the geodesic in
/// the disk model; empty for diameters.  Satisfies |c|^2 = R^2 + 4.
std::optional<std::pair<Eigen::Vector2d, double>> arc_center_radius(const HGeodesic& g);

bool ultraparallel(const HGeodesic& g1, const HGeodesic& g2);

/// dist between two ultraparallel geodesics (arcosh |<l1,l2>|); zero if
/// they meet or are asymptotic.
double geodesic_distance(const HGeodesic& g1, const HGeodesic& g2);

HGeodesic common_perpendicular(const HGeodesic& g1, const HGeodesic& g2);

/// Orthogonal projection of p onto g.
HPoint foot_on(const HGeodesic& g, const HPoint& p);

/// arsinh <X_p, polar>; positive on the left of the a->b traversal.
double signed_distance(const HGeodesic& g, const HPoint& p);

/// Arclength parametrization of g; s = 0 at the point closest to the
/// origin, increasing toward ideal endpoint b.
HPoint geodesic_point(const HGeodesic& g, double s);

/// Arclength coordinate of foot_on(g, p) in the same parametrization.
double arclength_of_foot(const HGeodesic& g, const HPoint& p);

/// Unit tangent (Minkowski) of g at the point with arclength s.
Eigen::Vector3d geodesic_tangent(const HGeodesic& g, double s);

/// Reflection across g (an isometry of the model).
HPoint reflect_across(const HGeodesic& g, const HPoint& p);

struct EquidistantCurve {
  HGeodesic base;
  double offset = 0.0;
  /// Point at signed arclength s along the base geodesic, pushed to the
  /// equidistant curve on the side given by sign(offset).
  HPoint at(double s) const;
};

EquidistantCurve equidistant_curve(const HGeodesic& g, double s);

/// Quadrilateral spanned between ultraparallel g1, g2: gamma-sides are the
/// arcs of length 2*t_i centered at the feet of the common perpendicular,
/// eta-sides the geodesic segments joining matching endpoints.
QuadDomain build_quad(const HGeodesic& g1, const HGeodesic& g2, double t1, double t2);

IdealQuadDomain build_ideal_quad(const HGeodesic& g1, const HGeodesic& g2);

double segment_length(const HSegment& s);

/// l(gamma1)+l(gamma2)-l(eta1)-l(eta2).
double quad_gap(const QuadDomain& q);

/// Interior angle at vertex k.
double interior_angle(const QuadDomain& q, int k);

/// Hyperbolic area by Gauss-Bonnet: 2*pi - sum of interior angles.
double area(const QuadDomain& q);

/// Half-length t of the regular quadrilateral with quad_gap = 0 (the
/// domain Omega_0), by bisection; empty when dist(g1,g2) is at or above
/// the threshold, where no such quadrilateral exists.
std::optional<double> regular_halflength(const HGeodesic& g1, const HGeodesic& g2,
                                         double tol = 1e-8);

enum class ThresholdClass { below, equal, above };

ThresholdClass threshold_check(const HGeodesic& g1, const HGeodesic& g2,
                               double band = 1e-9);

const char* to_string(ThresholdClass c);

// ---- Serialization -------------------------------------------------------

/// Structured text document: ideal angles, vertex coordinates, side
/// lengths.  Doubles are written with 17 significant digits, so a
/// write/read/write cycle is byte-stable.
void write_domain(std::ostream& os, const QuadDomain& q);
QuadDomain read_domain(std::istream& is);
void save_domain(const std::string& path, const QuadDomain& q);
QuadDomain load_domain(const std::string& path);

}  // namespace ektlab::hyp2

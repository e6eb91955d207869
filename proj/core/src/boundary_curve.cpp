#include "ektlab/annulus.hpp"

#include <cmath>

namespace ektlab::annulus {

ekt::EPoint SlabChart::to_ambient(double s, double z) const {
  hyp2::HPoint w = hyp2::geodesic_point(geodesic, s);
  return {w.x, w.y, z};
}

Eigen::Vector2d SlabChart::to_chart(const ekt::EPoint& p) const {
  double s = hyp2::arclength_of_foot(geodesic, {p.x, p.y});
  return {s, p.z};
}

namespace {

// Closest point on the boundary of the rounded rectangle with half-widths
// (a, b) and corner radius rho, in local coordinates centered at the box.
Eigen::Vector2d rounded_rect_project(double a, double b, double rho,
                                     const Eigen::Vector2d& d) {
  double sx = d[0] < 0 ? -1.0 : 1.0;
  double sy = d[1] < 0 ? -1.0 : 1.0;
  Eigen::Vector2d p(std::abs(d[0]), std::abs(d[1]));
  Eigen::Vector2d K(a - rho, b - rho);
  Eigen::Vector2d q;
  if (p[0] > K[0] && p[1] > K[1]) {
    Eigen::Vector2d r = p - K;
    double n = r.norm();
    q = (n > 1e-300) ? Eigen::Vector2d(K + (rho / n) * r) : Eigen::Vector2d(K[0] + rho, K[1]);
  } else {
    bool side_ok = p[1] <= K[1];
    bool top_ok = p[0] <= K[0];
    Eigen::Vector2d side(a, p[1]), top(p[0], b);
    if (side_ok && (!top_ok || std::abs(a - p[0]) <= std::abs(b - p[1])))
      q = side;
    else
      q = top;
  }
  return {sx * q[0], sy * q[1]};
}

}  // namespace

Eigen::Vector2d BoundaryCurve::project_chart(const Eigen::Vector2d& q) const {
  Eigen::Vector2d local(q[0] - s_center, q[1]);
  Eigen::Vector2d r = rounded_rect_project(s_half, height, corner_radius, local);
  return {r[0] + s_center, r[1]};
}

ekt::EPoint BoundaryCurve::project(const ekt::EPoint& p) const {
  Eigen::Vector2d c = project_chart(chart.to_chart(p));
  return chart.to_ambient(c[0], c[1]);
}

bool BoundaryCurve::contains_chart(const Eigen::Vector2d& q) const {
  double px = std::abs(q[0] - s_center), py = std::abs(q[1]);
  if (px > s_half || py > height) return false;
  double kx = s_half - corner_radius, ky = height - corner_radius;
  if (px > kx && py > ky)
    return std::hypot(px - kx, py - ky) <= corner_radius;
  return true;
}

double BoundaryCurve::chart_distance(const Eigen::Vector2d& q) const {
  return (project_chart(q) - q).norm();
}

double BoundaryCurve::enclosed_area() const {
  return 4.0 * s_half * height - (4.0 - M_PI) * corner_radius * corner_radius;
}

BoundaryCurve build_boundary(const hyp2::HGeodesic& g, const hyp2::HSegment& seg,
                             double n, double rho, int m, int side_index) {
  if (m < 16) throw config_error("build_boundary: need at least 16 samples");
  double sa = hyp2::arclength_of_foot(g, seg.a);
  double sb = hyp2::arclength_of_foot(g, seg.b);
  BoundaryCurve c;
  c.chart = SlabChart{g};
  c.s_center = 0.5 * (sa + sb);
  c.s_half = 0.5 * std::abs(sb - sa);
  c.height = n;
  c.corner_radius = rho;
  c.side_index = side_index;
  if (!(rho > 0) || rho >= std::min(n, c.s_half))
    throw geometry_error("build_boundary: corner radius must satisfy 0 < rho < min(n, l/2)");

  // walk the closed path counterclockwise from (s_half, 0), by arclength
  double a = c.s_half, b = n;
  double straight_s = 2.0 * (a - rho), straight_z = 2.0 * (b - rho);
  double arc = 0.5 * M_PI * rho;
  double pieces[8] = {0.5 * straight_z, arc, straight_s, arc,
                      straight_z,       arc, straight_s, arc};
  double total = 0.5 * straight_z + pieces[1] + pieces[2] + pieces[3] + pieces[4] +
                 pieces[5] + pieces[6] + pieces[7] + 0.5 * straight_z;
  (void)total;
  double perimeter = 2.0 * straight_s + 2.0 * straight_z + 4.0 * arc;

  auto point_at = [&](double t) -> Eigen::Vector2d {
    // t in [0, perimeter), starting at (a, 0) going up
    double u = t;
    if (u < 0.5 * straight_z) return {a, u};
    u -= 0.5 * straight_z;
    if (u < arc) {
      double th = u / rho;
      return {a - rho + rho * std::cos(th), b - rho + rho * std::sin(th)};
    }
    u -= arc;
    if (u < straight_s) return {a - rho - u, b};
    u -= straight_s;
    if (u < arc) {
      double th = 0.5 * M_PI + u / rho;
      return {-(a - rho) + rho * std::cos(th), b - rho + rho * std::sin(th)};
    }
    u -= arc;
    if (u < straight_z) return {-a, b - rho - u};
    u -= straight_z;
    if (u < arc) {
      double th = M_PI + u / rho;
      return {-(a - rho) + rho * std::cos(th), -(b - rho) + rho * std::sin(th)};
    }
    u -= arc;
    if (u < straight_s) return {-(a - rho) + u, -b};
    u -= straight_s;
    if (u < arc) {
      double th = 1.5 * M_PI + u / rho;
      return {a - rho + rho * std::cos(th), -(b - rho) + rho * std::sin(th)};
    }
    u -= arc;
    return {a, -(b - rho) + u};
  };

  c.chart_samples.resize(m);
  c.samples.resize(m);
  for (int i = 0; i < m; ++i) {
    Eigen::Vector2d q = point_at(perimeter * double(i) / m);
    q[0] += c.s_center;
    c.chart_samples[i] = q;
    c.samples[i] = c.chart.to_ambient(q[0], q[1]);
  }
  return c;
}

}  // namespace ektlab::annulus

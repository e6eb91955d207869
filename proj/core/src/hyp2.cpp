#include "ektlab/hyp2.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

namespace ektlab::hyp2 {

namespace {

constexpr double kPi = 3.14159265358979323846;

Eigen::Vector3d jmul(const Eigen::Vector3d& v) {
  return {-v[0], v[1], v[2]};
}

// u = J(a x b) is Minkowski-orthogonal to both a and b.
Eigen::Vector3d mcross(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  return jmul(a.cross(b));
}

Eigen::Vector3d normalize_spacelike(const Eigen::Vector3d& v, const char* who) {
  double n2 = -v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
  if (!(n2 > 0))
    throw geometry_error(std::string(who) + ": degenerate configuration");
  return v / std::sqrt(n2);
}

Eigen::Vector3d normalize_timelike(const Eigen::Vector3d& v, const char* who) {
  double n2 = v[0] * v[0] - v[1] * v[1] - v[2] * v[2];
  if (!(n2 > 0))
    throw geometry_error(std::string(who) + ": degenerate configuration");
  Eigen::Vector3d r = v / std::sqrt(n2);
  if (r[0] < 0) r = -r;
  return r;
}

// Foot of the origin on g and the unit tangent there, oriented toward the
// ideal endpoint g.b.
void base_frame(const HGeodesic& g, Eigen::Vector3d& foot, Eigen::Vector3d& tang) {
  const Eigen::Vector3d origin(1.0, 0.0, 0.0);
  double h = mdot(origin, g.polar);
  foot = (origin - h * g.polar) / std::sqrt(1.0 + h * h);
  tang = normalize_spacelike(mcross(g.polar, foot), "geodesic tangent");
  // X(s) = cosh(s) foot + sinh(s) tang approaches the null ray foot+tang,
  // which must be the endpoint b.
  Eigen::Vector3d fwd = foot + tang;
  double to_b = std::abs(mdot(fwd, ideal_null(g.b)));
  double to_a = std::abs(mdot(fwd, ideal_null(g.a)));
  if (to_b > to_a) tang = -tang;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

HGeodesic geodesic_from_polar(const Eigen::Vector3d& polar_in) {
  Eigen::Vector3d l = normalize_spacelike(polar_in, "geodesic_from_polar");
  // Ideal endpoints solve -l0 + l1 cos(t) + l2 sin(t) = 0.
  double rho = std::hypot(l[1], l[2]);
  double phi = std::atan2(l[2], l[1]);
  double c = l[0] / rho;  // |c| < 1 for spacelike l
  double delta = std::acos(std::clamp(c, -1.0, 1.0));
  HGeodesic g = geodesic_from_ideal(make_ideal(phi + delta), make_ideal(phi - delta));
  if (mdot(g.polar, l) < 0) {
    g = geodesic_from_ideal(g.b, g.a);
  }
  return g;
}

}  // namespace

double distance_threshold() {
  static const double t = 2.0 * std::log(std::sqrt(2.0) + 1.0);
  return t;
}

IdealPoint make_ideal(double theta) {
  double t = std::fmod(theta, 2.0 * kPi);
  if (t < 0) t += 2.0 * kPi;
  if (t >= 2.0 * kPi) t = 0.0;
  return IdealPoint{t};
}

double mdot(const Eigen::Vector3d& u, const Eigen::Vector3d& v) {
  return -u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
}

void check_in_disk(const HPoint& p) {
  double s = 4.0 - (p.x * p.x + p.y * p.y);
  if (!(s > boundary_guard))
    throw geometry_error("point (" + fmt17(p.x) + "," + fmt17(p.y) +
                         ") is outside the model disk or too close to its boundary");
}

Eigen::Vector3d embed(const HPoint& p) {
  check_in_disk(p);
  double ux = 0.5 * p.x, uy = 0.5 * p.y;
  double s = 1.0 - (ux * ux + uy * uy);
  return {(1.0 + ux * ux + uy * uy) / s, 2.0 * ux / s, 2.0 * uy / s};
}

HPoint unembed(const Eigen::Vector3d& X) {
  double d = 1.0 + X[0];
  return {2.0 * X[1] / d, 2.0 * X[2] / d};
}

Eigen::Vector3d ideal_null(const IdealPoint& q) {
  return {1.0, std::cos(q.theta), std::sin(q.theta)};
}

double dist(const HPoint& p, const HPoint& q) {
  double ip = -mdot(embed(p), embed(q));
  return std::acosh(std::max(1.0, ip));
}

HGeodesic geodesic_from_ideal(const IdealPoint& a, const IdealPoint& b) {
  if (a.theta == b.theta)
    throw geometry_error("geodesic_from_ideal: coincident ideal endpoints");
  Eigen::Vector3d polar =
      normalize_spacelike(mcross(ideal_null(a), ideal_null(b)), "geodesic_from_ideal");
  return HGeodesic{a, b, polar};
}

HGeodesic geodesic_through(const HPoint& p, const HPoint& q) {
  Eigen::Vector3d Xp = embed(p), Xq = embed(q);
  if (p.x == q.x && p.y == q.y)
    throw geometry_error("geodesic_through: coincident points");
  Eigen::Vector3d polar = mcross(Xp, Xq);
  double n2 = mdot(polar, polar);
  if (!(n2 > 1e-28))
    throw geometry_error("geodesic_through: points too close to separate");
  polar /= std::sqrt(n2);
  HGeodesic g = geodesic_from_polar(polar);
  // geodesic_from_polar picks endpoint order matching the polar sign, i.e.
  // travel direction p -> q.
  return g;
}

std::optional<std::pair<Eigen::Vector2d, double>> arc_center_radius(const HGeodesic& g) {
  const Eigen::Vector3d& l = g.polar;
  if (std::abs(l[0]) < 1e-14) return std::nullopt;  // diameter
  Eigen::Vector2d c(2.0 * l[1] / l[0], 2.0 * l[2] / l[0]);
  double r2 = c.squaredNorm() - 4.0;
  return std::make_pair(c, std::sqrt(std::max(0.0, r2)));
}

bool ultraparallel(const HGeodesic& g1, const HGeodesic& g2) {
  double t[4] = {g1.a.theta, g1.b.theta, g2.a.theta, g2.b.theta};
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      if (t[i] == t[j]) return false;
  // Chords cross iff the endpoint pairs interleave on the circle.
  auto in_arc = [&](double x) {
    double lo = t[0], hi = t[1];
    double span = hi - lo;
    if (span < 0) span += 2.0 * kPi;
    double off = x - lo;
    if (off < 0) off += 2.0 * kPi;
    return off > 0 && off < span;
  };
  int inside = (in_arc(t[2]) ? 1 : 0) + (in_arc(t[3]) ? 1 : 0);
  return inside != 1;
}

double geodesic_distance(const HGeodesic& g1, const HGeodesic& g2) {
  double ip = std::abs(mdot(g1.polar, g2.polar));
  if (ip <= 1.0) return 0.0;
  return std::acosh(ip);
}

HGeodesic common_perpendicular(const HGeodesic& g1, const HGeodesic& g2) {
  if (!ultraparallel(g1, g2))
    throw geometry_error("common_perpendicular requires ultraparallel geodesics");
  return geodesic_from_polar(mcross(g1.polar, g2.polar));
}

HPoint foot_on(const HGeodesic& g, const HPoint& p) {
  Eigen::Vector3d X = embed(p);
  double h = mdot(X, g.polar);
  Eigen::Vector3d F = (X - h * g.polar) / std::sqrt(1.0 + h * h);
  return unembed(F);
}

double signed_distance(const HGeodesic& g, const HPoint& p) {
  return std::asinh(mdot(embed(p), g.polar));
}

HPoint geodesic_point(const HGeodesic& g, double s) {
  Eigen::Vector3d F, U;
  base_frame(g, F, U);
  return unembed(std::cosh(s) * F + std::sinh(s) * U);
}

double arclength_of_foot(const HGeodesic& g, const HPoint& p) {
  Eigen::Vector3d F, U;
  base_frame(g, F, U);
  Eigen::Vector3d X = embed(p);
  double h = mdot(X, g.polar);
  Eigen::Vector3d Fp = (X - h * g.polar) / std::sqrt(1.0 + h * h);
  return std::asinh(mdot(Fp, U));
}

Eigen::Vector3d geodesic_tangent(const HGeodesic& g, double s) {
  Eigen::Vector3d F, U;
  base_frame(g, F, U);
  return std::sinh(s) * F + std::cosh(s) * U;
}

HPoint reflect_across(const HGeodesic& g, const HPoint& p) {
  Eigen::Vector3d X = embed(p);
  return unembed(X - 2.0 * mdot(X, g.polar) * g.polar);
}

HPoint EquidistantCurve::at(double s) const {
  Eigen::Vector3d F, U;
  base_frame(base, F, U);
  Eigen::Vector3d G = std::cosh(s) * F + std::sinh(s) * U;
  return unembed(std::cosh(offset) * G + std::sinh(offset) * base.polar);
}

EquidistantCurve equidistant_curve(const HGeodesic& g, double s) {
  return EquidistantCurve{g, s};
}

double segment_length(const HSegment& s) { return dist(s.a, s.b); }

QuadDomain build_quad(const HGeodesic& g1, const HGeodesic& g2, double t1, double t2) {
  if (!(t1 > 0) || !(t2 > 0))
    throw geometry_error("build_quad: side half-lengths must be positive");
  HGeodesic perp = common_perpendicular(g1, g2);
  // feet of the common perpendicular
  Eigen::Vector3d P1 = normalize_timelike(mcross(g1.polar, perp.polar), "build_quad");
  Eigen::Vector3d P2 = normalize_timelike(mcross(g2.polar, perp.polar), "build_quad");
  double f1 = arclength_of_foot(g1, unembed(P1));
  double f2 = arclength_of_foot(g2, unembed(P2));

  HPoint p1 = geodesic_point(g1, f1 - t1);
  HPoint q1 = geodesic_point(g1, f1 + t1);
  double side_q1 = signed_distance(perp, q1);
  HPoint p2 = geodesic_point(g2, f2 + t2);
  HPoint q2 = geodesic_point(g2, f2 - t2);
  if (signed_distance(perp, p2) * side_q1 < 0) std::swap(p2, q2);

  std::array<HPoint, 4> v = {p1, q1, p2, q2};
  // enforce counterclockwise traversal in the disk chart
  double a2 = 0;
  for (int i = 0; i < 4; ++i) {
    const HPoint& u = v[i];
    const HPoint& w = v[(i + 1) % 4];
    a2 += u.x * w.y - w.x * u.y;
  }
  if (a2 < 0) v = {q1, p1, q2, p2};

  QuadDomain q;
  q.vertex = v;
  for (int i = 0; i < 4; ++i) {
    const HPoint& a = v[i];
    const HPoint& b = v[(i + 1) % 4];
    HGeodesic geo = (i == 0) ? g1 : (i == 2) ? g2 : geodesic_through(a, b);
    q.side[i] = HSegment{geo, a, b};
  }
  // convexity: both opposite vertices strictly on one side of each side line
  for (int i = 0; i < 4; ++i) {
    double sa = signed_distance(q.side[i].geodesic, v[(i + 2) % 4]);
    double sb = signed_distance(q.side[i].geodesic, v[(i + 3) % 4]);
    if (sa * sb <= 0)
      throw geometry_error("build_quad: produced a non-convex quadrilateral");
  }
  return q;
}

IdealQuadDomain build_ideal_quad(const HGeodesic& g1, const HGeodesic& g2) {
  if (!ultraparallel(g1, g2))
    throw geometry_error("build_ideal_quad requires ultraparallel geodesics");
  // cyclic order p1,q1,p2,q2 with gamma1 = (p1,q1), gamma2 = (p2,q2)
  IdealPoint p1 = g1.a, q1 = g1.b, p2 = g2.a, q2 = g2.b;
  auto ccw_from = [&](double base, double t) {
    double d = t - base;
    if (d < 0) d += 2.0 * kPi;
    return d;
  };
  if (ccw_from(p1.theta, q1.theta) > ccw_from(p1.theta, q2.theta) ||
      ccw_from(p1.theta, q1.theta) > ccw_from(p1.theta, p2.theta))
    std::swap(p1, q1);
  if (ccw_from(q1.theta, p2.theta) > ccw_from(q1.theta, q2.theta)) std::swap(p2, q2);
  IdealQuadDomain d;
  d.vertex = {p1, q1, p2, q2};
  d.side[0] = geodesic_from_ideal(p1, q1);
  d.side[1] = geodesic_from_ideal(q1, p2);
  d.side[2] = geodesic_from_ideal(p2, q2);
  d.side[3] = geodesic_from_ideal(q2, p1);
  return d;
}

double quad_gap(const QuadDomain& q) {
  return segment_length(q.side[0]) + segment_length(q.side[2]) -
         segment_length(q.side[1]) - segment_length(q.side[3]);
}

double interior_angle(const QuadDomain& q, int k) {
  const HPoint& v = q.vertex[k];
  const HPoint& nxt = q.vertex[(k + 1) % 4];
  const HPoint& prv = q.vertex[(k + 3) % 4];
  Eigen::Vector3d X = embed(v);
  auto dir_to = [&](const HPoint& w) {
    Eigen::Vector3d Y = embed(w);
    Eigen::Vector3d t = Y + mdot(Y, X) * X;
    return normalize_spacelike(t, "interior_angle");
  };
  double c = mdot(dir_to(nxt), dir_to(prv));
  return std::acos(std::clamp(c, -1.0, 1.0));
}

double area(const QuadDomain& q) {
  double s = 0;
  for (int k = 0; k < 4; ++k) s += interior_angle(q, k);
  return 2.0 * kPi - s;
}

std::optional<double> regular_halflength(const HGeodesic& g1, const HGeodesic& g2,
                                         double tol) {
  auto gap_at = [&](double t) { return quad_gap(build_quad(g1, g2, t, t)); };
  double lo = 1e-6, hi = 1.0;
  if (gap_at(lo) > 0) return std::nullopt;  // cannot happen for valid input
  // quad_gap(t) increases to a finite limit reached to ~1e-13 by t = 16;
  // pushing t further would leave the numeric range of the disk chart.
  while (gap_at(hi) <= 0) {
    hi *= 2.0;
    if (hi > 16.0) return std::nullopt;  // gap stays negative: at/above threshold
  }
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    double g = gap_at(mid);
    if (std::abs(g) < tol) return mid;
    (g < 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

ThresholdClass threshold_check(const HGeodesic& g1, const HGeodesic& g2, double band) {
  if (!ultraparallel(g1, g2))
    throw geometry_error("threshold_check requires ultraparallel geodesics");
  double d = geodesic_distance(g1, g2);
  double t = distance_threshold();
  if (std::abs(d - t) <= band) return ThresholdClass::equal;
  return d < t ? ThresholdClass::below : ThresholdClass::above;
}

const char* to_string(ThresholdClass c) {
  switch (c) {
    case ThresholdClass::below: return "below";
    case ThresholdClass::equal: return "equal";
    case ThresholdClass::above: return "above";
  }
  return "?";
}

// ---- serialization --------------------------------------------------------

namespace {
const char* kSideName[4] = {"gamma1", "eta1", "gamma2", "eta2"};
const char* kVertexName[4] = {"p1", "q1", "p2", "q2"};
}  // namespace

void write_domain(std::ostream& os, const QuadDomain& q) {
  os << "ektlab-domain 1\n";
  for (int i = 0; i < 4; ++i)
    os << "ideal " << kSideName[i] << ' ' << fmt17(q.side[i].geodesic.a.theta) << ' '
       << fmt17(q.side[i].geodesic.b.theta) << '\n';
  for (int i = 0; i < 4; ++i)
    os << "vertex " << kVertexName[i] << ' ' << fmt17(q.vertex[i].x) << ' '
       << fmt17(q.vertex[i].y) << '\n';
  for (int i = 0; i < 4; ++i)
    os << "length " << kSideName[i] << ' ' << fmt17(segment_length(q.side[i])) << '\n';
}

QuadDomain read_domain(std::istream& is) {
  std::string header;
  int version = 0;
  if (!(is >> header >> version) || header != "ektlab-domain" || version != 1)
    throw config_error("read_domain: not an ektlab-domain v1 document");
  std::array<std::array<double, 2>, 4> ideal{};
  std::array<HPoint, 4> vtx{};
  for (int i = 0; i < 4; ++i) {
    std::string kw, name;
    if (!(is >> kw >> name >> ideal[i][0] >> ideal[i][1]) || kw != "ideal" ||
        name != kSideName[i])
      throw config_error("read_domain: malformed ideal line");
  }
  for (int i = 0; i < 4; ++i) {
    std::string kw, name;
    if (!(is >> kw >> name >> vtx[i].x >> vtx[i].y) || kw != "vertex" ||
        name != kVertexName[i])
      throw config_error("read_domain: malformed vertex line");
  }
  for (int i = 0; i < 4; ++i) {
    std::string kw, name;
    double len;
    if (!(is >> kw >> name >> len) || kw != "length" || name != kSideName[i])
      throw config_error("read_domain: malformed length line");
  }
  QuadDomain q;
  q.vertex = vtx;
  for (int i = 0; i < 4; ++i) {
    HGeodesic g = geodesic_from_ideal(IdealPoint{ideal[i][0]}, IdealPoint{ideal[i][1]});
    q.side[i] = HSegment{g, vtx[i], vtx[(i + 1) % 4]};
    if (std::abs(signed_distance(g, vtx[i])) > 1e-6 ||
        std::abs(signed_distance(g, vtx[(i + 1) % 4])) > 1e-6)
      throw geometry_error("read_domain: vertex does not lie on its side geodesic");
  }
  return q;
}

void save_domain(const std::string& path, const QuadDomain& q) {
  std::ofstream f(path);
  if (!f) throw config_error("save_domain: cannot open " + path);
  write_domain(f, q);
}

QuadDomain load_domain(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw config_error("load_domain: cannot open " + path);
  return read_domain(f);
}

}  // namespace ektlab::hyp2

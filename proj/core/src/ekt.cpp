#include "ektlab/ekt.hpp"

#include <cmath>
#include <ostream>

namespace ektlab::ekt {

namespace {

// 32-point Gauss-Legendre nodes/weights on [0,1], generated from the
// symmetric [-1,1] rule.
struct GaussRule {
  std::array<double, 32> x, w;
  GaussRule() {
    // Newton iteration on Legendre P_32 roots.
    const int n = 32;
    for (int i = 0; i < n / 2; ++i) {
      double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
      double p0, p1;
      for (int it = 0; it < 100; ++it) {
        p0 = 1.0;
        p1 = t;
        for (int k = 2; k <= n; ++k) {
          double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        double dp = n * (t * p1 - p0) / (t * t - 1.0);
        double dt = p1 / dp;
        t -= dt;
        if (std::abs(dt) < 1e-16) break;
      }
      p0 = 1.0;
      p1 = t;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      double dp = n * (t * p1 - p0) / (t * t - 1.0);
      double wi = 2.0 / ((1.0 - t * t) * dp * dp);
      x[i] = 0.5 * (1.0 - t);
      w[i] = 0.5 * wi;
      x[n - 1 - i] = 0.5 * (1.0 + t);
      w[n - 1 - i] = 0.5 * wi;
    }
  }
};

const GaussRule& gauss32() {
  static const GaussRule r;
  return r;
}

Eigen::Vector3d normalize_g(const Eigen::Matrix3d& g, const Eigen::Vector3d& v,
                            const char* who) {
  double n2 = v.dot(g * v);
  if (!(n2 > 1e-28)) throw geometry_error(std::string(who) + ": degenerate vector");
  return v / std::sqrt(n2);
}

}  // namespace

void check_in_model(const MetricSpec& spec, const EPoint& p) {
  double r2max = -4.0 / spec.kappa;
  if (!(r2max - (p.x * p.x + p.y * p.y) > hyp2::boundary_guard))
    throw geometry_error("point outside the model disk of E^3(kappa,tau)");
}

Eigen::Matrix3d metric_at(const MetricSpec& spec, const EPoint& p) {
  check_in_model(spec, p);
  double l = spec.lambda(p.x, p.y);
  double t = spec.tau;
  double L = l * l;
  Eigen::Matrix3d g;
  g(0, 0) = L + t * t * L * p.y * p.y;
  g(0, 1) = -t * t * L * p.x * p.y;
  g(0, 2) = t * l * p.y;
  g(1, 1) = L + t * t * L * p.x * p.x;
  g(1, 2) = -t * l * p.x;
  g(2, 2) = 1.0;
  g(1, 0) = g(0, 1);
  g(2, 0) = g(0, 2);
  g(2, 1) = g(1, 2);
  return g;
}

Eigen::Matrix3d inverse_metric_at(const MetricSpec& spec, const EPoint& p) {
  check_in_model(spec, p);
  double l = spec.lambda(p.x, p.y);
  double t = spec.tau;
  Eigen::Matrix3d gi;
  gi(0, 0) = 1.0 / (l * l);
  gi(0, 1) = 0.0;
  gi(0, 2) = -t * p.y / l;
  gi(1, 1) = 1.0 / (l * l);
  gi(1, 2) = t * p.x / l;
  gi(2, 2) = 1.0 + t * t * (p.x * p.x + p.y * p.y);
  gi(1, 0) = gi(0, 1);
  gi(2, 0) = gi(0, 2);
  gi(2, 1) = gi(1, 2);
  return gi;
}

void metric_derivs_at(const MetricSpec& spec, const EPoint& p, Eigen::Matrix3d& dgdx,
                      Eigen::Matrix3d& dgdy) {
  check_in_model(spec, p);
  double l = spec.lambda(p.x, p.y);
  double t = spec.tau;
  double k = spec.kappa;
  double x = p.x, y = p.y;
  double L = l * l;
  // dlambda = -(kappa/2) lambda^2 (x,y),  dL = -kappa lambda^3 (x,y)
  double dl_x = -0.5 * k * L * x, dl_y = -0.5 * k * L * y;
  double dL_x = -k * l * L * x, dL_y = -k * l * L * y;

  dgdx.setZero();
  dgdy.setZero();
  dgdx(0, 0) = (1.0 + t * t * y * y) * dL_x;
  dgdy(0, 0) = (1.0 + t * t * y * y) * dL_y + 2.0 * t * t * y * L;
  dgdx(0, 1) = -t * t * (dL_x * x * y + L * y);
  dgdy(0, 1) = -t * t * (dL_y * x * y + L * x);
  dgdx(0, 2) = t * y * dl_x;
  dgdy(0, 2) = t * l + t * y * dl_y;
  dgdx(1, 1) = (1.0 + t * t * x * x) * dL_x + 2.0 * t * t * x * L;
  dgdy(1, 1) = (1.0 + t * t * x * x) * dL_y;
  dgdx(1, 2) = -t * l - t * x * dl_x;
  dgdy(1, 2) = -t * x * dl_y;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < i; ++j) {
      dgdx(i, j) = dgdx(j, i);
      dgdy(i, j) = dgdy(j, i);
    }
}

std::array<Eigen::Matrix3d, 3> christoffel_at(const MetricSpec& spec, const EPoint& p) {
  Eigen::Matrix3d dg[3];
  metric_derivs_at(spec, p, dg[0], dg[1]);
  dg[2].setZero();
  Eigen::Matrix3d gi = inverse_metric_at(spec, p);
  std::array<Eigen::Matrix3d, 3> gamma;
  for (int k = 0; k < 3; ++k) gamma[k].setZero();
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) {
      Eigen::Vector3d low;
      for (int l = 0; l < 3; ++l)
        low[l] = 0.5 * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
      Eigen::Vector3d up = gi * low;
      for (int k = 0; k < 3; ++k) {
        gamma[k](i, j) = up[k];
        gamma[k](j, i) = up[k];
      }
    }
  return gamma;
}

double vol_density(const MetricSpec& spec, const EPoint& p) {
  double l = spec.lambda(p.x, p.y);
  return l * l;
}

double vertical_weight(const MetricSpec& spec, const Plane2& pl) {
  Eigen::Matrix3d g = metric_at(spec, pl.base);
  Eigen::Vector3d X = normalize_g(g, pl.u, "vertical_weight");
  Eigen::Vector3d vy = pl.v - X * (pl.v.dot(g * X));
  Eigen::Vector3d Y = normalize_g(g, vy, "vertical_weight");
  const Eigen::Vector3d xi(0.0, 0.0, 1.0);
  double cx = xi.dot(g * X);
  double cy = xi.dot(g * Y);
  return cx * cx + cy * cy;
}

double sectional_curvature(const MetricSpec& spec, const Plane2& pl) {
  double a = vertical_weight(spec, pl);
  double t2 = spec.tau * spec.tau;
  return (spec.kappa - 3.0 * t2) + (4.0 * t2 - spec.kappa) * a;
}

double ricci_normal(const MetricSpec& spec, const TangentVec& N) {
  Eigen::Matrix3d g = metric_at(spec, N.base);
  double n2 = N.v.dot(g * N.v);
  if (std::abs(n2 - 1.0) > 1e-10)
    throw geometry_error("ricci_normal: N must be a unit vector");
  // orthonormal completion by Gram-Schmidt over the coordinate axes
  Eigen::Vector3d cand[3] = {Eigen::Vector3d::UnitX(), Eigen::Vector3d::UnitY(),
                             Eigen::Vector3d::UnitZ()};
  Eigen::Vector3d basis[2];
  int found = 0;
  for (int i = 0; i < 3 && found < 2; ++i) {
    Eigen::Vector3d v = cand[i] - N.v * (cand[i].dot(g * N.v));
    for (int j = 0; j < found; ++j) v -= basis[j] * (v.dot(g * basis[j]));
    double m2 = v.dot(g * v);
    if (m2 > 1e-12) basis[found++] = v / std::sqrt(m2);
  }
  if (found < 2) throw geometry_error("ricci_normal: failed to complete basis");
  double s = 0.0;
  for (int j = 0; j < 2; ++j)
    s += sectional_curvature(spec, Plane2{N.base, N.v, basis[j]});
  return s;
}

EPoint vertical_translate(double h, const EPoint& p) { return {p.x, p.y, p.z + h}; }

Eigen::Vector3d cross(const MetricSpec& spec, const EPoint& p, const Eigen::Vector3d& u,
                      const Eigen::Vector3d& v) {
  Eigen::Vector3d cov = vol_density(spec, p) * u.cross(v);
  return inverse_metric_at(spec, p) * cov;
}

TangentVec cross(const MetricSpec& spec, const TangentVec& u, const TangentVec& v) {
  if (std::abs(u.base.x - v.base.x) > 1e-12 || std::abs(u.base.y - v.base.y) > 1e-12 ||
      std::abs(u.base.z - v.base.z) > 1e-12)
    throw geometry_error("cross: vectors at different base points");
  return TangentVec{u.base, cross(spec, u.base, u.v, v.v)};
}

double killing_residual(const MetricSpec& spec, const EPoint& p, const Eigen::Vector3d& X) {
  auto gamma = christoffel_at(spec, p);
  Eigen::Vector3d nabla;  // (nabla_X xi)^k = X^i Gamma^k_{i3}
  for (int k = 0; k < 3; ++k) nabla[k] = gamma[k].col(2).dot(X);
  Eigen::Vector3d rhs = spec.tau * cross(spec, p, X, Eigen::Vector3d::UnitZ());
  Eigen::Vector3d r = nabla - rhs;
  Eigen::Matrix3d g = metric_at(spec, p);
  return std::sqrt(r.dot(g * r));
}

// ---- FiberIsometry --------------------------------------------------------

FiberIsometry::FiberIsometry(const MetricSpec& spec, std::complex<double> a, double beta,
                             double c)
    : spec_(spec), a_(a), beta_(beta), c_(c) {}

FiberIsometry FiberIsometry::to_origin(const MetricSpec& spec, const EPoint& q) {
  check_in_model(spec, q);
  double R = spec.disk_radius();
  std::complex<double> a(q.x / R, q.y / R);
  FiberIsometry iso(spec, a, 0.0, 0.0);
  iso.c_ = -(q.z + iso.psi(std::complex<double>(q.x, q.y)));
  return iso;
}

FiberIsometry FiberIsometry::rotation(const MetricSpec& spec, double beta) {
  return FiberIsometry(spec, std::complex<double>(0.0, 0.0), beta, 0.0);
}

FiberIsometry translate_to_origin(const MetricSpec& spec, const EPoint& q) {
  return FiberIsometry::to_origin(spec, q);
}

std::complex<double> FiberIsometry::mobius_u(std::complex<double> u) const {
  return std::polar(1.0, beta_) * (u - a_) / (1.0 - std::conj(a_) * u);
}

std::complex<double> FiberIsometry::mobius_u_inverse(std::complex<double> u) const {
  std::complex<double> v = u * std::polar(1.0, -beta_);
  return (v + a_) / (1.0 + std::conj(a_) * v);
}

std::complex<double> FiberIsometry::mobius_w(std::complex<double> w) const {
  double R = spec_.disk_radius();
  return R * mobius_u(w / R);
}

std::complex<double> FiberIsometry::mobius_w_deriv(std::complex<double> w) const {
  double R = spec_.disk_radius();
  std::complex<double> u = w / R;
  std::complex<double> den = 1.0 - std::conj(a_) * u;
  return std::polar(1.0, beta_) * (1.0 - std::norm(a_)) / (den * den);
}

double FiberIsometry::alpha(std::complex<double> w, std::complex<double> dw) const {
  // omega(dw) = -lambda(w) Im(conj(w) dw); alpha = tau (omega - phi*omega)
  double lam_w = spec_.lambda(w.real(), w.imag());
  std::complex<double> fw = mobius_w(w);
  std::complex<double> fpw = mobius_w_deriv(w);
  double lam_f = spec_.lambda(fw.real(), fw.imag());
  double om = -lam_w * std::imag(std::conj(w) * dw);
  double om_pull = -lam_f * std::imag(std::conj(fw) * (fpw * dw));
  return spec_.tau * (om - om_pull);
}

double FiberIsometry::psi(std::complex<double> w) const {
  if (spec_.tau == 0.0) return 0.0;
  const GaussRule& gr = gauss32();
  auto integrate = [&](int halves) {
    double s = 0.0;
    for (int h = 0; h < halves; ++h) {
      double lo = double(h) / halves, hi = double(h + 1) / halves;
      for (int i = 0; i < 32; ++i) {
        double t = lo + (hi - lo) * gr.x[i];
        s += (hi - lo) * gr.w[i] * alpha(t * w, w);
      }
    }
    return s;
  };
  double s1 = integrate(1);
  double s2 = integrate(2);
  if (std::abs(s1 - s2) > 1e-10 * (1.0 + std::abs(s2)))
    throw solver_error("Killing flow integration did not converge");
  return s2;
}

EPoint FiberIsometry::apply(const EPoint& p) const {
  check_in_model(spec_, p);
  std::complex<double> w(p.x, p.y);
  std::complex<double> fw = mobius_w(w);
  return {fw.real(), fw.imag(), p.z + psi(w) + c_};
}

EPoint FiberIsometry::apply_inverse(const EPoint& p) const {
  double R = spec_.disk_radius();
  std::complex<double> u(p.x / R, p.y / R);
  std::complex<double> w0 = R * mobius_u_inverse(u);
  return {w0.real(), w0.imag(), p.z - c_ - psi(w0)};
}

hyp2::HPoint FiberIsometry::base_apply(const hyp2::HPoint& w) const {
  std::complex<double> fw = mobius_w(std::complex<double>(w.x, w.y));
  return {fw.real(), fw.imag()};
}

Eigen::Matrix3d FiberIsometry::jacobian(const EPoint& p) const {
  std::complex<double> w(p.x, p.y);
  std::complex<double> d = mobius_w_deriv(w);
  Eigen::Matrix3d J;
  J << d.real(), -d.imag(), 0.0,  //
      d.imag(), d.real(), 0.0,    //
      alpha(w, {1.0, 0.0}), alpha(w, {0.0, 1.0}), 1.0;
  return J;
}

double FiberIsometry::pullback_residual(const EPoint& p) const {
  Eigen::Matrix3d J = jacobian(p);
  Eigen::Matrix3d gt = metric_at(spec_, apply(p));
  Eigen::Matrix3d gp = metric_at(spec_, p);
  return (J.transpose() * gt * J - gp).cwiseAbs().maxCoeff();
}

std::pair<BlowupMap, MetricSpec> blowup(const MetricSpec& spec, double lam) {
  if (!(lam > 0)) throw geometry_error("blowup: scale must be positive");
  MetricSpec to{spec.kappa / (lam * lam), spec.tau / lam};
  return {BlowupMap{lam, spec, to}, to};
}

void write_curvature_report(std::ostream& os, const MetricSpec& spec,
                            const std::vector<Plane2>& planes) {
  os << "x,y,z,u1,u2,u3,v1,v2,v3,a,K\n";
  for (const Plane2& pl : planes) {
    double a = vertical_weight(spec, pl);
    double K = sectional_curvature(spec, pl);
    os << pl.base.x << ',' << pl.base.y << ',' << pl.base.z << ',' << pl.u[0] << ','
       << pl.u[1] << ',' << pl.u[2] << ',' << pl.v[0] << ',' << pl.v[1] << ','
       << pl.v[2] << ',' << a << ',' << K << '\n';
  }
}

}  // namespace ektlab::ekt

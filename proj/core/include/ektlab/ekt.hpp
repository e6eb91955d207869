#pragma once

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <iosfwd>
#include <utility>
#include <vector>

#include "ektlab/errors.hpp"
#include "ektlab/hyp2.hpp"

// The ambient homogeneous manifold E^3(kappa,tau) in the cylinder model:
// coordinates (x,y,z) with x^2+y^2 < 4/(-kappa) and metric
//   g = lambda^2 (dx^2+dy^2) + (tau lambda (y dx - x dy) + dz)^2,
//   lambda = 1/(1 + (kappa/4)(x^2+y^2)).
// kappa = -1 is the cylinder model of PSL~2(R,tau); tau = 0 gives H^2 x R.
namespace ektlab::ekt {

struct MetricSpec {
  double kappa = -1.0;
  double tau = 0.0;

  double disk_radius() const { return 2.0 / std::sqrt(-kappa); }
  double lambda(double x, double y) const {
    return 1.0 / (1.0 + 0.25 * kappa * (x * x + y * y));
  }
};

struct EPoint {
  double x = 0.0, y = 0.0, z = 0.0;
  hyp2::HPoint base() const { return {x, y}; }
};

struct TangentVec {
  EPoint base;
  Eigen::Vector3d v = Eigen::Vector3d::Zero();
};

struct Plane2 {
  EPoint base;
  Eigen::Vector3d u = Eigen::Vector3d::Zero();
  Eigen::Vector3d v = Eigen::Vector3d::Zero();
};

void check_in_model(const MetricSpec& spec, const EPoint& p);

Eigen::Matrix3d metric_at(const MetricSpec& spec, const EPoint& p);

/// Closed-form inverse of metric_at (no numerical inversion).
Eigen::Matrix3d inverse_metric_at(const MetricSpec& spec, const EPoint& p);

/// Closed-form partial derivatives of the metric components with respect
/// to x and y (z-derivatives vanish: partial_z is Killing).
void metric_derivs_at(const MetricSpec& spec, const EPoint& p, Eigen::Matrix3d& dgdx,
                      Eigen::Matrix3d& dgdy);

/// Christoffel symbols Gamma[k](i,j), symmetric in (i,j), assembled from
/// the closed-form metric derivatives.
std::array<Eigen::Matrix3d, 3> christoffel_at(const MetricSpec& spec, const EPoint& p);

/// sqrt(det g) = lambda^2.
double vol_density(const MetricSpec& spec, const EPoint& p);

/// K(P) = (kappa - 3 tau^2) + (4 tau^2 - kappa) a, where a is the squared
/// length of the projection of the vertical field xi = d/dz onto P.
/// For kappa = -1 this is (1+4tau^2) a - (1+3tau^2).
double sectional_curvature(const MetricSpec& spec, const Plane2& pl);

/// The projection weight a of a plane.
double vertical_weight(const MetricSpec& spec, const Plane2& pl);

/// Ric(N,N) as the sum of the two sectional curvatures over an orthonormal
/// completion of a unit vector N.  Basis independent.
double ricci_normal(const MetricSpec& spec, const TangentVec& N);

EPoint vertical_translate(double h, const EPoint& p);

/// Metric cross product, right-handed in the frame (E1, E2, xi).
Eigen::Vector3d cross(const MetricSpec& spec, const EPoint& p, const Eigen::Vector3d& u,
                      const Eigen::Vector3d& v);
TangentVec cross(const MetricSpec& spec, const TangentVec& u, const TangentVec& v);

/// Norm of nabla_X xi - tau X x xi at p; the Killing identity makes this
/// vanish identically.
double killing_residual(const MetricSpec& spec, const EPoint& p, const Eigen::Vector3d& X);

/// Isometry of the form (w, z) -> (mobius(w), z + psi(w) + c) lifting an
/// orientation-preserving isometry of the base and preserving the fiber
/// orientation.  psi integrates the closed 1-form tau (omega - mobius*omega),
/// omega = lambda (y dx - x dy); its differential is known in closed form,
/// so the analytic Jacobian below is exact.
class FiberIsometry {
 public:
  /// Pure fiber-preserving translation sending q to the origin.
  static FiberIsometry to_origin(const MetricSpec& spec, const EPoint& q);
  /// Rotation by beta about the z-axis fiber.
  static FiberIsometry rotation(const MetricSpec& spec, double beta);

  EPoint apply(const EPoint& p) const;
  EPoint apply_inverse(const EPoint& p) const;
  hyp2::HPoint base_apply(const hyp2::HPoint& w) const;

  /// d(apply) at p, exact up to roundoff.
  Eigen::Matrix3d jacobian(const EPoint& p) const;

  /// || M^T g(T p) M - g(p) ||_inf with M = jacobian(p).
  double pullback_residual(const EPoint& p) const;

  const MetricSpec& spec() const { return spec_; }

 private:
  FiberIsometry(const MetricSpec& spec, std::complex<double> a, double beta, double c);

  std::complex<double> mobius_u(std::complex<double> u) const;
  std::complex<double> mobius_u_inverse(std::complex<double> u) const;
  std::complex<double> mobius_w(std::complex<double> w) const;
  std::complex<double> mobius_w_deriv(std::complex<double> w) const;
  /// Line integral of the connection form along the segment 0 -> w, with a
  /// convergence check (throws solver_error on failure).
  double psi(std::complex<double> w) const;
  /// The 1-form alpha = tau (omega - phi*omega) evaluated at w on velocity dw.
  double alpha(std::complex<double> w, std::complex<double> dw) const;

  MetricSpec spec_;
  std::complex<double> a_;  // unit-disk translation parameter
  double beta_ = 0.0;       // rotation angle
  double c_ = 0.0;          // constant fiber offset
};

FiberIsometry translate_to_origin(const MetricSpec& spec, const EPoint& q);

struct BlowupMap {
  double lam = 1.0;
  MetricSpec from, to;
  EPoint apply(const EPoint& p) const { return {lam * p.x, lam * p.y, lam * p.z}; }
  EPoint apply_inverse(const EPoint& p) const {
    return {p.x / lam, p.y / lam, p.z / lam};
  }
};

/// Rescaling by lam: E^3(kappa,tau) -> E^3(kappa/lam^2, tau/lam), conformal
/// with constant factor lam (pullback of the target metric is lam^2 g).
std::pair<BlowupMap, MetricSpec> blowup(const MetricSpec& spec, double lam);

/// CSV rows "x,y,z,u1,u2,u3,v1,v2,v3,a,K" for a list of planes.
void write_curvature_report(std::ostream& os, const MetricSpec& spec,
                            const std::vector<Plane2>& planes);

}  // namespace ektlab::ekt

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Cholesky>

#include <cmath>

#include "ektlab/ekt.hpp"
#include "test_support.hpp"

using namespace ektlab;
using namespace ektlab::ekt;

namespace {

EPoint random_epoint(double rmax = 1.5) {
  auto p = oracle::random_hpoint(rmax);
  return {p.x, p.y, oracle::uniform(-2.0, 2.0)};
}

Eigen::Vector3d random_unit(const MetricSpec& spec, const EPoint& p) {
  Eigen::Vector3d v(oracle::uniform(-1, 1), oracle::uniform(-1, 1), oracle::uniform(-1, 1));
  Eigen::Matrix3d g = metric_at(spec, p);
  return v / std::sqrt(v.dot(g * v));
}

}  // namespace

TEST_CASE("metric values") {
  MetricSpec psl{-1.0, 0.5};
  CHECK(metric_at(psl, {0, 0, 0}).isApprox(Eigen::Matrix3d::Identity(), 1e-15));

  MetricSpec prod{-1.0, 0.0};
  for (int i = 0; i < 20; ++i) {
    EPoint p = random_epoint();
    Eigen::Matrix3d g = metric_at(prod, p);
    double l2 = std::pow(prod.lambda(p.x, p.y), 2);
    CHECK(g(0, 0) == doctest::Approx(l2).epsilon(1e-14));
    CHECK(g(1, 1) == doctest::Approx(l2).epsilon(1e-14));
    CHECK(g(2, 2) == doctest::Approx(1.0));
    CHECK(g(0, 1) == 0.0);
    CHECK(g(0, 2) == 0.0);
    CHECK(g(1, 2) == 0.0);
  }

  // direct substitution at p = (1,0,0), tau = 1/2: lambda = 4/3
  Eigen::Matrix3d g = metric_at(psl, {1, 0, 0});
  CHECK(g(0, 0) == doctest::Approx(16.0 / 9.0).epsilon(1e-15));
  CHECK(g(1, 1) == doctest::Approx(16.0 / 9.0 + 4.0 / 9.0).epsilon(1e-15));
  CHECK(g(1, 2) == doctest::Approx(-2.0 / 3.0).epsilon(1e-15));
  CHECK(g(2, 2) == doctest::Approx(1.0));
  CHECK(g(0, 1) == 0.0);
  CHECK(g(0, 2) == 0.0);

  // closed-form inverse matches a numerical inverse
  for (double tau : {0.0, 0.3, 1.0}) {
    MetricSpec s{-1.0, tau};
    for (int i = 0; i < 10; ++i) {
      EPoint p = random_epoint();
      CHECK((inverse_metric_at(s, p) * metric_at(s, p) - Eigen::Matrix3d::Identity())
                .cwiseAbs()
                .maxCoeff() < 1e-12);
    }
  }
  CHECK_THROWS_AS(metric_at(psl, {2.1, 0, 0}), geometry_error);
}

TEST_CASE("metric positive definite on random points") {
  for (double tau : {0.0, 0.5}) {
    MetricSpec s{-1.0, tau};
    for (int i = 0; i < 10000; ++i) {
      EPoint p = random_epoint(1.9);
      Eigen::LLT<Eigen::Matrix3d> llt(metric_at(s, p));
      CHECK(llt.info() == Eigen::Success);
    }
  }
}

TEST_CASE("christoffel symbols") {
  MetricSpec prod{-1.0, 0.0};
  auto gamma0 = christoffel_at(prod, {0, 0, 0});
  for (int k = 0; k < 3; ++k)
    CHECK(gamma0[k].cwiseAbs().maxCoeff() < 1e-14);  // flat to first order at the origin

  for (double tau : {0.0, 0.5, 1.0}) {
    MetricSpec s{-1.0, tau};
    for (int i = 0; i < 10; ++i) {
      EPoint p = random_epoint();
      auto gamma = christoffel_at(s, p);
      // symmetry in the lower indices
      for (int k = 0; k < 3; ++k)
        CHECK((gamma[k] - gamma[k].transpose()).cwiseAbs().maxCoeff() == 0.0);
      // z-independence (d/dz is Killing)
      EPoint q = p;
      q.z += 1.7;
      auto gamma_q = christoffel_at(s, q);
      for (int k = 0; k < 3; ++k)
        CHECK((gamma[k] - gamma_q[k]).cwiseAbs().maxCoeff() == 0.0);
      // finite differences of metric_at as the oracle
      const double h = 1e-5;
      Eigen::Matrix3d dg_fd[2];
      for (int c = 0; c < 2; ++c) {
        EPoint pp = p, pm = p;
        (c == 0 ? pp.x : pp.y) += h;
        (c == 0 ? pm.x : pm.y) -= h;
        dg_fd[c] = (metric_at(s, pp) - metric_at(s, pm)) / (2 * h);
      }
      Eigen::Matrix3d g = metric_at(s, p);
      for (int c = 0; c < 2; ++c) {
        // metric compatibility: d_c g_ij = G^l_{ci} g_lj + G^l_{cj} g_il
        Eigen::Matrix3d recon = Eigen::Matrix3d::Zero();
        for (int i2 = 0; i2 < 3; ++i2)
          for (int j = 0; j < 3; ++j)
            for (int l = 0; l < 3; ++l)
              recon(i2, j) += gamma[l](c, i2) * g(l, j) + gamma[l](c, j) * g(i2, l);
        CHECK((recon - dg_fd[c]).cwiseAbs().maxCoeff() < 1e-6);
      }
      // closed-form derivatives agree with finite differences
      Eigen::Matrix3d dgdx, dgdy;
      metric_derivs_at(s, p, dgdx, dgdy);
      CHECK((dgdx - dg_fd[0]).cwiseAbs().maxCoeff() < 1e-6);
      CHECK((dgdy - dg_fd[1]).cwiseAbs().maxCoeff() < 1e-6);
    }
  }
}

TEST_CASE("sectional curvature formula vs finite-difference Riemann") {
  for (double tau : {0.0, 0.3, 0.5, 1.0}) {
    MetricSpec s{-1.0, tau};
    for (int i = 0; i < 20; ++i) {
      EPoint p = random_epoint(1.2);
      Eigen::Vector3d X = random_unit(s, p), Y = random_unit(s, p);
      Eigen::Matrix3d g = metric_at(s, p);
      double gram = X.dot(g * X) * Y.dot(g * Y) - std::pow(X.dot(g * Y), 2);
      if (gram < 0.1) continue;
      double K = sectional_curvature(s, Plane2{p, X, Y});
      double K_fd = oracle::sectional_fd(s, p, X, Y);
      CHECK(std::abs(K - K_fd) < 1e-4);
      // pinching
      CHECK(K <= tau * tau + 1e-8);
      CHECK(K >= -(1 + 3 * tau * tau) - 1e-8);
    }
  }
}

TEST_CASE("sectional curvature special planes") {
  double tau = 0.5;
  MetricSpec s{-1.0, tau};
  for (int i = 0; i < 10; ++i) {
    EPoint p = random_epoint();
    // xi in P
    Eigen::Vector3d h(oracle::uniform(-1, 1), oracle::uniform(-1, 1), 0);
    CHECK(sectional_curvature(s, Plane2{p, Eigen::Vector3d::UnitZ(), h}) ==
          doctest::Approx(tau * tau).epsilon(1e-12));
    // xi perpendicular to P: the horizontal orthonormal frame spans it
    double l = s.lambda(p.x, p.y);
    Eigen::Vector3d E1(1.0 / l, 0, -tau * p.y), E2(0, 1.0 / l, tau * p.x);
    CHECK(sectional_curvature(s, Plane2{p, E1, E2}) ==
          doctest::Approx(-(1 + 3 * tau * tau)).epsilon(1e-12));
  }
  // arithmetic: tau=1/2, a=1/2 -> 2*(1/2) - 7/4 = -3/4
  EPoint o{0, 0, 0};
  Eigen::Vector3d v = (Eigen::Vector3d::UnitX() + Eigen::Vector3d::UnitZ()).normalized();
  double K = sectional_curvature(s, Plane2{o, v, Eigen::Vector3d::UnitY()});
  CHECK(K == doctest::Approx(-0.75).epsilon(1e-12));
}

TEST_CASE("ricci curvature of unit directions") {
  for (double tau : {0.0, 0.5}) {
    MetricSpec s{-1.0, tau};
    for (int i = 0; i < 10; ++i) {
      EPoint p = random_epoint(1.2);
      double l = s.lambda(p.x, p.y);
      // horizontal unit normal
      Eigen::Vector3d E1(1.0 / l, 0, -tau * p.y);
      CHECK(ricci_normal(s, TangentVec{p, E1}) ==
            doctest::Approx(-1 - 2 * tau * tau).epsilon(1e-10));
      // vertical
      CHECK(ricci_normal(s, TangentVec{p, Eigen::Vector3d::UnitZ()}) ==
            doctest::Approx(2 * tau * tau).epsilon(1e-10));
      // generic direction: basis independence via the closed-form reduction
      Eigen::Vector3d N = random_unit(s, p);
      double ric = ricci_normal(s, TangentVec{p, N});
      Eigen::Matrix3d g = metric_at(s, p);
      double a = std::pow(Eigen::Vector3d::UnitZ().dot(g * N), 2);
      CHECK(ric == doctest::Approx((1 + 4 * tau * tau) * a - (1 + 2 * tau * tau))
                       .epsilon(1e-9));
      if (tau == 0.0) {
        // finite-difference oracle: sum of two sectional curvatures
        Eigen::Matrix3d gg = metric_at(s, p);
        Eigen::Vector3d t1 =
            Eigen::Vector3d::UnitX() - N * (Eigen::Vector3d::UnitX().dot(gg * N));
        if (t1.dot(gg * t1) < 1e-6) continue;
        t1 /= std::sqrt(t1.dot(gg * t1));
        Eigen::Vector3d t2v = Eigen::Vector3d::UnitY() -
                              N * (Eigen::Vector3d::UnitY().dot(gg * N)) -
                              t1 * (Eigen::Vector3d::UnitY().dot(gg * t1));
        if (t2v.dot(gg * t2v) < 1e-6) continue;
        t2v /= std::sqrt(t2v.dot(gg * t2v));
        double fd =
            oracle::sectional_fd(s, p, N, t1) + oracle::sectional_fd(s, p, N, t2v);
        CHECK(std::abs(ric - fd) < 1e-4);
      }
    }
    CHECK_THROWS_AS(
        ricci_normal(s, TangentVec{{0, 0, 0}, 2.0 * Eigen::Vector3d::UnitZ()}),
        geometry_error);
  }
}

TEST_CASE("vertical translation") {
  EPoint p{0.3, -0.2, 0.7};
  EPoint q = vertical_translate(0.0, p);
  CHECK(q.z == p.z);
  EPoint r = vertical_translate(-1.3, vertical_translate(1.3, p));
  CHECK(r.z == p.z);
  // z-invariance of the metric makes the pullback exact
  MetricSpec s{-1.0, 0.5};
  for (int i = 0; i < 100; ++i) {
    EPoint a = random_epoint();
    CHECK((metric_at(s, a) - metric_at(s, vertical_translate(2.9, a)))
              .cwiseAbs()
              .maxCoeff() == 0.0);
  }
}

TEST_CASE("translate_to_origin") {
  MetricSpec s{-1.0, 0.5};

  SUBCASE("fiber point gives a pure vertical translation") {
    FiberIsometry iso = translate_to_origin(s, {0, 0, 1.7});
    EPoint o = iso.apply({0, 0, 1.7});
    CHECK(std::abs(o.x) < 1e-15);
    CHECK(std::abs(o.y) < 1e-15);
    CHECK(std::abs(o.z) < 1e-15);
    EPoint w = iso.apply({0.3, 0.4, 0.0});
    CHECK(w.x == doctest::Approx(0.3));
    CHECK(w.y == doctest::Approx(0.4));
    CHECK(w.z == doctest::Approx(-1.7));
  }

  SUBCASE("x-axis point: isometry residual") {
    FiberIsometry iso = translate_to_origin(s, {0.8, 0.0, 0.0});
    EPoint o = iso.apply({0.8, 0.0, 0.0});
    CHECK(std::abs(o.x) < 1e-14);
    CHECK(std::abs(o.y) < 1e-14);
    CHECK(std::abs(o.z) < 1e-14);
    for (int i = 0; i < 30; ++i)
      CHECK(iso.pullback_residual(random_epoint()) < 1e-8);
  }

  SUBCASE("generic point, composition with inverse") {
    FiberIsometry iso = translate_to_origin(s, {0.5, -0.9, 0.4});
    for (int i = 0; i < 30; ++i) {
      EPoint p = random_epoint();
      CHECK(iso.pullback_residual(p) < 1e-8);
      EPoint q = iso.apply_inverse(iso.apply(p));
      CHECK(std::abs(q.x - p.x) < 1e-9);
      CHECK(std::abs(q.y - p.y) < 1e-9);
      CHECK(std::abs(q.z - p.z) < 1e-9);
    }
    // projects to a hyperbolic isometry of the base
    hyp2::HPoint a = oracle::random_hpoint(), b = oracle::random_hpoint();
    CHECK(hyp2::dist(iso.base_apply(a), iso.base_apply(b)) ==
          doctest::Approx(hyp2::dist(a, b)).epsilon(1e-12));
  }
}

TEST_CASE("blowup rescaling family") {
  MetricSpec s{-1.0, 0.5};

  auto [id_map, id_spec] = blowup(s, 1.0);
  CHECK(id_spec.kappa == -1.0);
  CHECK(id_spec.tau == 0.5);
  EPoint p{0.3, 0.2, -0.4};
  CHECK(id_map.apply(p).x == p.x);

  auto [map10, spec10] = blowup(s, 10.0);
  CHECK(spec10.kappa == doctest::Approx(-0.01));
  CHECK(spec10.tau == doctest::Approx(0.05));
  // pullback of the target metric at the origin = lam^2 I
  Eigen::Matrix3d J10 = 10.0 * Eigen::Matrix3d::Identity();
  Eigen::Matrix3d pulled0 =
      J10.transpose() * metric_at(spec10, map10.apply({0, 0, 0})) * J10;
  CHECK((pulled0 - 100.0 * Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-12);

  // conformality: the pullback factor is constant over sample points
  for (double lam : {3.0, 10.0}) {
    auto [bm, sp] = blowup(s, lam);
    Eigen::Matrix3d J = lam * Eigen::Matrix3d::Identity();
    for (int i = 0; i < 30; ++i) {
      EPoint a = random_epoint(1.0);
      Eigen::Matrix3d pulled = J.transpose() * metric_at(sp, bm.apply(a)) * J;
      CHECK((pulled - lam * lam * metric_at(s, a)).cwiseAbs().maxCoeff() < 1e-10);
    }
  }

  // decay toward the Euclidean metric at a fixed image point
  EPoint image{0.5, 0.3, 0.2};
  std::vector<double> errs;
  for (double lam : {10.0, 100.0, 1000.0}) {
    auto [bm, sp] = blowup(s, lam);
    errs.push_back(
        (metric_at(sp, image) - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff());
  }
  CHECK(std::log10(errs[0] / errs[1]) >= 1.0);  // decay exponent >= 1 in 1/lam
  CHECK(std::log10(errs[1] / errs[2]) >= 1.0);

  CHECK_THROWS_AS(blowup(s, 0.0), geometry_error);
  CHECK_THROWS_AS(blowup(s, -2.0), geometry_error);
}

TEST_CASE("cross product and Killing identity") {
  MetricSpec s{-1.0, 0.5};
  for (int i = 0; i < 100; ++i) {
    EPoint p = random_epoint(1.5);
    Eigen::Vector3d u = random_unit(s, p);
    Eigen::Vector3d v = random_unit(s, p);
    Eigen::Vector3d w = cross(s, p, u, v);
    Eigen::Matrix3d g = metric_at(s, p);
    CHECK(std::abs(u.dot(g * w)) < 1e-10);
    CHECK(std::abs(v.dot(g * w)) < 1e-10);
    CHECK(cross(s, p, u, 2.5 * u).norm() < 1e-12);
    CHECK(killing_residual(s, p, u) < 1e-7);
  }
  // tau = 0 regression: nabla xi = 0 in the product metric
  MetricSpec prod{-1.0, 0.0};
  for (int i = 0; i < 20; ++i) {
    EPoint p = random_epoint();
    CHECK(killing_residual(prod, p, random_unit(prod, p)) < 1e-12);
  }
  CHECK_THROWS_AS(cross(s, TangentVec{{0, 0, 0}, Eigen::Vector3d::UnitX()},
                        TangentVec{{0.5, 0, 0}, Eigen::Vector3d::UnitY()}),
                  geometry_error);
}

TEST_CASE("rotational symmetry of the metric") {
  MetricSpec s{-1.0, 0.7};
  double phi = 0.9;
  Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
  R(0, 0) = std::cos(phi);
  R(0, 1) = -std::sin(phi);
  R(1, 0) = std::sin(phi);
  R(1, 1) = std::cos(phi);
  for (int i = 0; i < 50; ++i) {
    EPoint p = random_epoint();
    Eigen::Vector3d xp = R * Eigen::Vector3d(p.x, p.y, p.z);
    EPoint rp{xp[0], xp[1], xp[2]};
    Eigen::Matrix3d pulled = R.transpose() * metric_at(s, rp) * R;
    CHECK((pulled - metric_at(s, p)).cwiseAbs().maxCoeff() < 1e-14);
  }
}

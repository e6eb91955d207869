#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>

#include "ektlab/analysis.hpp"
#include "ektlab/annulus.hpp"

namespace ektlab::annulus {

const char* to_string(MinimizeStatus s) {
  switch (s) {
    case MinimizeStatus::converged: return "converged";
    case MinimizeStatus::max_iterations: return "max_iterations";
    case MinimizeStatus::degenerated: return "degenerated";
  }
  return "?";
}

namespace {

// leaf coordinate of the foliation by vertical planes perpendicular to axis
double axis_coordinate(const hyp2::HGeodesic& axis, const ekt::EPoint& p) {
  return hyp2::arclength_of_foot(axis, {p.x, p.y});
}

Eigen::Vector3d curve_tangent(const BoundaryCurve& curve, const ekt::EPoint& p) {
  Eigen::Vector2d q = curve.chart.to_chart(p);
  const double h = 1e-6;
  // chart tangent by walking the projection operator
  Eigen::Vector2d q0 = curve.project_chart(q);
  Eigen::Vector2d qa = curve.project_chart(q0 + Eigen::Vector2d(h, 0));
  Eigen::Vector2d qb = curve.project_chart(q0 + Eigen::Vector2d(0, h));
  Eigen::Vector2d dt = (qa - q0).norm() > (qb - q0).norm() ? (qa - q0) : (qb - q0);
  if (dt.norm() < 1e-12) dt = Eigen::Vector2d(1, 0);
  dt.normalize();
  // push to ambient coordinates
  const double ds = 1e-6;
  ekt::EPoint p1 = curve.chart.to_ambient(q0[0] + ds * dt[0], q0[1] + ds * dt[1]);
  ekt::EPoint p0 = curve.chart.to_ambient(q0[0], q0[1]);
  Eigen::Vector3d v(p1.x - p0.x, p1.y - p0.y, p1.z - p0.z);
  double n = v.norm();
  return n > 0 ? Eigen::Vector3d(v / n) : Eigen::Vector3d::UnitZ();
}

struct Pins {
  std::vector<const BoundaryCurve*> curve_of_vertex;  // nullptr = free or fixed
  std::vector<char> fixed;
};

Pins make_pins(const TriMesh& mesh, const MinimizeOptions& opts) {
  Pins p;
  p.curve_of_vertex.assign(mesh.num_vertices(), nullptr);
  p.fixed.assign(mesh.num_vertices(), 0);
  for (const auto& loop : mesh.boundary_loops) {
    const BoundaryCurve* c = nullptr;
    if (loop.curve_id == 0) c = opts.curve0;
    if (loop.curve_id == 1) c = opts.curve1;
    for (int v : loop.vertices) {
      if (c)
        p.curve_of_vertex[v] = c;
      else
        p.fixed[v] = 1;
    }
  }
  return p;
}

// intrinsic cotangent stiffness (clamped) plus a small mass regularization
Eigen::SparseMatrix<double> precond_matrix(const ekt::MetricSpec& spec,
                                           const TriMesh& mesh) {
  int n = mesh.num_vertices();
  std::vector<Eigen::Triplet<double>> trip;
  std::vector<double> diag(n, 0.0);
  for (const auto& t : mesh.triangles) {
    double l[3];
    for (int e = 0; e < 3; ++e)
      l[e] = edge_length_g(spec, mesh.vertices[t[(e + 1) % 3]],
                           mesh.vertices[t[(e + 2) % 3]]);
    double s = 0.5 * (l[0] + l[1] + l[2]);
    double area2 = std::max(1e-300, s * (s - l[0]) * (s - l[1]) * (s - l[2]));
    double K = std::sqrt(area2);
    for (int e = 0; e < 3; ++e) {
      int i = t[(e + 1) % 3], j = t[(e + 2) % 3];
      double cot = (l[(e + 1) % 3] * l[(e + 1) % 3] + l[(e + 2) % 3] * l[(e + 2) % 3] -
                    l[e] * l[e]) /
                   (4.0 * K);
      double w = 0.5 * std::max(cot, 1e-6);
      trip.emplace_back(i, j, -w);
      trip.emplace_back(j, i, -w);
      diag[i] += w;
      diag[j] += w;
    }
  }
  double mean_diag = 0;
  for (double d : diag) mean_diag += d;
  mean_diag /= std::max(1, n);
  for (int i = 0; i < n; ++i) trip.emplace_back(i, i, diag[i] + 1e-3 * mean_diag);
  Eigen::SparseMatrix<double> P(n, n);
  P.setFromTriplets(trip.begin(), trip.end());
  return P;
}

}  // namespace

double neck_width(const ekt::MetricSpec& spec, const TriMesh& mesh,
                  const hyp2::HGeodesic& axis, int levels) {
  std::vector<double> f(mesh.num_vertices());
  double lo = 1e300, hi = -1e300;
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    f[v] = axis_coordinate(axis, mesh.vertices[v]);
    lo = std::min(lo, f[v]);
    hi = std::max(hi, f[v]);
  }
  double best = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= levels; ++k) {
    double t = lo + (hi - lo) * (0.08 + 0.84 * double(k) / (levels + 1));
    for (int guard = 0; guard < 3; ++guard) {
      try {
        auto comps = extract_level(spec, mesh, f, t);
        for (const auto& c : comps)
          if (c.closed) best = std::min(best, c.length);
        break;
      } catch (const geometry_error&) {
        t += (hi - lo) * 1e-9;  // vertex hit the level exactly; nudge
      }
    }
  }
  return best;
}

MinimizeReport minimize_area(const ekt::MetricSpec& spec, TriMesh& mesh,
                             const MinimizeOptions& opts) {
  MinimizeReport rep;
  Pins pins = make_pins(mesh, opts);
  double mean_edge = mean_edge_length(spec, mesh);
  double tol = opts.tolerance_scale * mean_edge;

  std::optional<hyp2::HGeodesic> axis = opts.neck_axis;
  if (!axis && opts.curve0 && opts.curve1) {
    const hyp2::HGeodesic& g1 = opts.curve0->chart.geodesic;
    const hyp2::HGeodesic& g2 = opts.curve1->chart.geodesic;
    if (ultraparallel(g1, g2)) axis = hyp2::common_perpendicular(g1, g2);
  }

  std::vector<Eigen::Vector3d> grad;
  double area;
  ambient_area_gradient(spec, mesh, grad, &area);
  rep.area = area;

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  bool have_precond = false;
  int since_factor = 1 << 20;

  auto apply_step = [&](TriMesh& target, const std::vector<Eigen::Vector3d>& dir,
                        double t) {
    for (int v = 0; v < target.num_vertices(); ++v) {
      if (pins.fixed[v]) continue;
      ekt::EPoint& p = target.vertices[v];
      p.x -= t * dir[v][0];
      p.y -= t * dir[v][1];
      p.z -= t * dir[v][2];
      if (pins.curve_of_vertex[v]) p = pins.curve_of_vertex[v]->project(p);
    }
  };

  auto effective_gradient_max = [&]() {
    double mx = 0.0;
    for (int v = 0; v < mesh.num_vertices(); ++v) {
      if (pins.fixed[v]) continue;
      Eigen::Vector3d g = grad[v];
      if (pins.curve_of_vertex[v]) {
        Eigen::Vector3d tau = curve_tangent(*pins.curve_of_vertex[v], mesh.vertices[v]);
        g = g.dot(tau) * tau;
      }
      Eigen::Matrix3d gp = ekt::metric_at(spec, mesh.vertices[v]);
      mx = std::max(mx, std::sqrt(g.dot(gp * g)));
    }
    return mx;
  };

  TriMesh snapshot = mesh;
  double step = 1.0;
  int accepted = 0;

  for (int it = 0; it < opts.max_iterations; ++it) {
    rep.iterations = it;
    rep.gradient_norm = effective_gradient_max();
    if (rep.gradient_norm < tol) {
      rep.status = MinimizeStatus::converged;
      break;
    }

    if (opts.neck_check_every > 0 && axis && it % opts.neck_check_every == 0) {
      double w = neck_width(spec, mesh, *axis);
      rep.neck_width = w;
      if (w < opts.neck_factor * mean_edge) {
        mesh = snapshot;
        rep.status = MinimizeStatus::degenerated;
        rep.area = ambient_area(spec, mesh);
        return rep;
      }
      snapshot = mesh;
    }

    // descent direction
    std::vector<Eigen::Vector3d> dir = grad;
    if (opts.preconditioned) {
      if (since_factor > 50) {
        ldlt.compute(precond_matrix(spec, mesh));
        have_precond = ldlt.info() == Eigen::Success;
        since_factor = 0;
      }
      ++since_factor;
      if (have_precond) {
        int n = mesh.num_vertices();
        Eigen::MatrixXd rhs(n, 3);
        for (int v = 0; v < n; ++v) rhs.row(v) = grad[v].transpose();
        Eigen::MatrixXd sol = ldlt.solve(rhs);
        double slope = 0.0;
        for (int v = 0; v < n; ++v) slope += sol.row(v).dot(rhs.row(v));
        if (slope > 0) {
          for (int v = 0; v < n; ++v) dir[v] = sol.row(v).transpose();
        }
      }
    }

    double slope = 0.0;
    for (int v = 0; v < mesh.num_vertices(); ++v)
      if (!pins.fixed[v]) slope += dir[v].dot(grad[v]);
    if (slope <= 0) {
      dir = grad;
      slope = 0.0;
      for (int v = 0; v < mesh.num_vertices(); ++v)
        if (!pins.fixed[v]) slope += grad[v].squaredNorm();
    }

    bool ok = false;
    double t = step;
    for (int ls = 0; ls < 40; ++ls) {
      TriMesh trial = mesh;
      apply_step(trial, dir, t);
      double a;
      try {
        a = ambient_area(spec, trial);
      } catch (const geometry_error&) {
        t *= 0.5;
        continue;
      }
      if (a <= area - 1e-4 * t * slope) {
        mesh.vertices = std::move(trial.vertices);
        area = a;
        ok = true;
        break;
      }
      t *= 0.5;
    }
    if (!ok) {
      rep.status = MinimizeStatus::converged;  // no further descent available
      break;
    }
    step = std::min(t * 2.0, 1e3);
    ++accepted;

    ambient_area_gradient(spec, mesh, grad, &area);
    rep.area = area;

    if (opts.smooth_every > 0 && accepted % opts.smooth_every == 0) {
      TriMesh trial = mesh;
      for (int v = 0; v < trial.num_vertices(); ++v) {
        if (pins.fixed[v] || trial.adj[v].empty()) continue;
        Eigen::Vector3d avg = Eigen::Vector3d::Zero();
        for (int w : mesh.adj[v])
          avg += Eigen::Vector3d(mesh.vertices[w].x, mesh.vertices[w].y,
                                 mesh.vertices[w].z);
        avg /= double(mesh.adj[v].size());
        Eigen::Vector3d pos(mesh.vertices[v].x, mesh.vertices[v].y, mesh.vertices[v].z);
        Eigen::Vector3d d = avg - pos;
        if (!pins.curve_of_vertex[v] && !mesh.is_boundary(v)) {
          // project out the normal component (Euclidean proxy is enough for
          // a quality pass; the line acceptance below protects the area)
          Eigen::Vector3d nrm = Eigen::Vector3d::Zero();
          for (int ti : mesh.vertex_tris[v]) {
            const auto& tr = mesh.triangles[ti];
            Eigen::Vector3d a(mesh.vertices[tr[1]].x - mesh.vertices[tr[0]].x,
                              mesh.vertices[tr[1]].y - mesh.vertices[tr[0]].y,
                              mesh.vertices[tr[1]].z - mesh.vertices[tr[0]].z);
            Eigen::Vector3d b(mesh.vertices[tr[2]].x - mesh.vertices[tr[0]].x,
                              mesh.vertices[tr[2]].y - mesh.vertices[tr[0]].y,
                              mesh.vertices[tr[2]].z - mesh.vertices[tr[0]].z);
            nrm += a.cross(b);
          }
          double nn = nrm.norm();
          if (nn > 0) {
            nrm /= nn;
            d -= d.dot(nrm) * nrm;
          }
        }
        ekt::EPoint& p = trial.vertices[v];
        p.x += 0.5 * d[0];
        p.y += 0.5 * d[1];
        p.z += 0.5 * d[2];
        if (pins.curve_of_vertex[v]) p = pins.curve_of_vertex[v]->project(p);
        if (!pins.curve_of_vertex[v] && mesh.is_boundary(v)) p = mesh.vertices[v];
      }
      try {
        double a = ambient_area(spec, trial);
        if (a <= area * (1.0 + 1e-12)) {
          mesh.vertices = std::move(trial.vertices);
          ambient_area_gradient(spec, mesh, grad, &area);
          rep.area = area;
        }
      } catch (const geometry_error&) {
        // skip the smoothing pass
      }
    }
  }

  rep.area = area;
  rep.gradient_norm = effective_gradient_max();
  if (axis) rep.neck_width = neck_width(spec, mesh, *axis);
  return rep;
}

std::vector<SweepRecord> sweep_n(const ekt::MetricSpec& spec,
                                 const hyp2::QuadDomain& omega,
                                 const std::vector<double>& n_list,
                                 const SweepOptions& opts,
                                 std::vector<TriMesh>* meshes) {
  std::vector<SweepRecord> out;
  for (double n : n_list) {
    SweepRecord recd;
    recd.n = n;
    try {
      BoundaryCurve c1 = build_boundary(omega.side[0].geodesic, omega.side[0], n,
                                        opts.rho, opts.curve_samples, 1);
      BoundaryCurve c2 = build_boundary(omega.side[2].geodesic, omega.side[2], n,
                                        opts.rho, opts.curve_samples, 2);
      AnnulusBuildOptions bo = opts.build;
      bo.nz = std::max(8, static_cast<int>(std::lround(bo.nz * n / 4.0)));
      TriMesh mesh = build_initial_annulus(c1, c2, omega, AnnulusStyle::comparison, bo);
      MinimizeOptions mo = opts.minimize;
      mo.curve0 = &c1;
      mo.curve1 = &c2;
      MinimizeReport mr = minimize_area(spec, mesh, mo);
      recd.status = mr.status;
      recd.area = mr.area;
      recd.neck_width = mr.neck_width;
      auto hp = analysis::horizontal_points(mesh);
      recd.h_plus = hp.h_plus;
      recd.h_minus = hp.h_minus;
      if (meshes) meshes->push_back(mesh);
    } catch (const std::exception& e) {
      recd.error = e.what();
      if (meshes) meshes->push_back(TriMesh{});
    }
    out.push_back(std::move(recd));
  }
  return out;
}

}  // namespace ektlab::annulus

#include "ektlab/analysis.hpp"

#include <Eigen/QR>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <ostream>
#include <set>

namespace ektlab::analysis {

namespace {

Eigen::Vector3d coords(const ekt::EPoint& p) { return {p.x, p.y, p.z}; }

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  size_t k = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + k, v.end());
  return v[k];
}

// Ordered 1-ring cycle around an interior vertex, following the triangle
// orientation.  Returns empty for boundary/irregular vertices.
std::vector<int> link_cycle(const TriMesh& mesh, int v) {
  std::map<int, int> next;
  for (int ti : mesh.vertex_tris[v]) {
    const auto& t = mesh.triangles[ti];
    int a = -1, b = -1;
    for (int e = 0; e < 3; ++e)
      if (t[e] == v) {
        a = t[(e + 1) % 3];
        b = t[(e + 2) % 3];
      }
    next[a] = b;
  }
  if (next.empty()) return {};
  std::vector<int> cycle;
  int start = next.begin()->first, cur = start;
  for (size_t guard = 0; guard <= next.size(); ++guard) {
    cycle.push_back(cur);
    auto it = next.find(cur);
    if (it == next.end()) return {};
    cur = it->second;
    if (cur == start) return cycle;
  }
  return {};
}

}  // namespace

TriMesh lift_graph(const graph::DomainMesh& mesh, const graph::ScalarField& u) {
  if (u.size() != mesh.num_nodes())
    throw geometry_error("lift_graph: field/mesh size mismatch");
  TriMesh m;
  m.vertices.reserve(mesh.num_nodes());
  for (int v = 0; v < mesh.num_nodes(); ++v)
    m.vertices.push_back(ekt::EPoint{mesh.nodes[v].x, mesh.nodes[v].y, u[v]});
  m.triangles = mesh.triangles;
  m.finalize();
  return m;
}

std::vector<Eigen::Vector3d> vertex_normals(const ekt::MetricSpec& spec,
                                            const TriMesh& mesh) {
  std::vector<Eigen::Vector3d> normals(mesh.num_vertices(), Eigen::Vector3d::Zero());
  for (const auto& t : mesh.triangles) {
    for (int e = 0; e < 3; ++e) {
      int v = t[e];
      Eigen::Vector3d d1 = coords(mesh.vertices[t[(e + 1) % 3]]) - coords(mesh.vertices[v]);
      Eigen::Vector3d d2 = coords(mesh.vertices[t[(e + 2) % 3]]) - coords(mesh.vertices[v]);
      normals[v] += ekt::cross(spec, mesh.vertices[v], d1, d2);
    }
  }
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    Eigen::Matrix3d g = ekt::metric_at(spec, mesh.vertices[v]);
    double n2 = normals[v].dot(g * normals[v]);
    if (n2 > 0) normals[v] /= std::sqrt(n2);
  }
  return normals;
}

CurvatureField second_form(const ekt::MetricSpec& spec, const TriMesh& mesh) {
  int n = mesh.num_vertices();
  CurvatureField cf;
  cf.absA.assign(n, 0.0);
  cf.H.assign(n, 0.0);
  cf.flagged.assign(n, 0);
  std::vector<Eigen::Vector3d> normals = vertex_normals(spec, mesh);

  for (int v = 0; v < n; ++v) {
    Eigen::Matrix3d g = ekt::metric_at(spec, mesh.vertices[v]);
    const Eigen::Vector3d& N = normals[v];
    // orthonormal tangent frame
    int ax = 0;
    double best = 1e300;
    for (int c = 0; c < 3; ++c) {
      double al = std::abs(Eigen::Vector3d::Unit(c).dot(g * N));
      if (al < best) {
        best = al;
        ax = c;
      }
    }
    Eigen::Vector3d T1 = Eigen::Vector3d::Unit(ax) - (Eigen::Vector3d::Unit(ax).dot(g * N)) * N;
    double t1n = T1.dot(g * T1);
    if (!(t1n > 1e-20)) {
      cf.flagged[v] = 1;
      continue;
    }
    T1 /= std::sqrt(t1n);
    Eigen::Vector3d T2 = ekt::cross(spec, mesh.vertices[v], N, T1);
    double t2n = T2.dot(g * T2);
    if (!(t2n > 1e-20)) {
      cf.flagged[v] = 1;
      continue;
    }
    T2 /= std::sqrt(t2n);

    // 2-ring stencil
    std::set<int> ring(mesh.adj[v].begin(), mesh.adj[v].end());
    std::set<int> two = ring;
    for (int w : ring) two.insert(mesh.adj[w].begin(), mesh.adj[w].end());
    two.erase(v);
    if (two.size() < 6) {
      cf.flagged[v] = 1;
      continue;
    }
    Eigen::MatrixXd A(two.size(), 6);
    Eigen::VectorXd rhs(two.size());
    int r = 0;
    double h = 0;
    for (int w : two) h += (coords(mesh.vertices[w]) - coords(mesh.vertices[v])).norm();
    h /= double(two.size());
    for (int w : two) {
      Eigen::Vector3d d = coords(mesh.vertices[w]) - coords(mesh.vertices[v]);
      double a = d.dot(g * T1) / h, b = d.dot(g * T2) / h, c = d.dot(g * N);
      A.row(r) << 1.0, a, b, 0.5 * a * a, a * b, 0.5 * b * b;
      rhs[r] = c;
      ++r;
    }
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A);
    if (cod.rank() < 6) {
      cf.flagged[v] = 1;
      continue;
    }
    Eigen::VectorXd beta = cod.solve(rhs);
    Eigen::Matrix2d hess;
    hess << beta[3], beta[4], beta[4], beta[5];
    hess /= (h * h);

    auto gamma = ekt::christoffel_at(spec, mesh.vertices[v]);
    Eigen::Vector3d Ncov = g * N;
    auto corr = [&](const Eigen::Vector3d& X, const Eigen::Vector3d& Y) {
      double s = 0;
      for (int k = 0; k < 3; ++k) s += Ncov[k] * X.dot(gamma[k] * Y);
      return s;
    };
    Eigen::Matrix2d Aform;
    Aform(0, 0) = hess(0, 0) + corr(T1, T1);
    Aform(0, 1) = hess(0, 1) + corr(T1, T2);
    Aform(1, 0) = Aform(0, 1);
    Aform(1, 1) = hess(1, 1) + corr(T2, T2);
    cf.absA[v] = std::sqrt(Aform(0, 0) * Aform(0, 0) + 2.0 * Aform(0, 1) * Aform(0, 1) +
                           Aform(1, 1) * Aform(1, 1));
    cf.H[v] = 0.5 * (Aform(0, 0) + Aform(1, 1));
  }

  std::vector<double> absA_ok, absH_ok;
  for (int v = 0; v < n; ++v)
    if (!cf.flagged[v]) {
      cf.sup_absA = std::max(cf.sup_absA, cf.absA[v]);
      absA_ok.push_back(cf.absA[v]);
      absH_ok.push_back(std::abs(cf.H[v]));
    }
  cf.median_absA = median_of(absA_ok);
  cf.median_absH = median_of(absH_ok);
  return cf;
}

std::vector<CriticalPoint> critical_points(const TriMesh& mesh,
                                           const std::vector<double>& f) {
  std::vector<CriticalPoint> out;
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    if (mesh.is_boundary(v)) continue;
    std::vector<int> cycle = link_cycle(mesh, v);
    if (cycle.empty()) continue;
    auto above = [&](int w) {
      return f[w] > f[v] || (f[w] == f[v] && w > v);  // symbolic perturbation
    };
    int changes = 0;
    int m = static_cast<int>(cycle.size());
    for (int i = 0; i < m; ++i)
      if (above(cycle[i]) != above(cycle[(i + 1) % m])) ++changes;
    if (changes == 2) continue;  // regular
    CriticalPoint cp;
    cp.vertex = v;
    cp.value = f[v];
    if (changes == 0) {
      cp.type = above(cycle[0]) ? CriticalType::minimum : CriticalType::maximum;
      cp.multiplicity = 1;
    } else {
      cp.type = CriticalType::saddle;
      cp.multiplicity = changes / 2 - 1;
    }
    out.push_back(cp);
  }
  return out;
}

HorizontalPointsReport horizontal_points(const TriMesh& mesh) {
  std::vector<double> z(mesh.num_vertices());
  for (int v = 0; v < mesh.num_vertices(); ++v) z[v] = mesh.vertices[v].z;
  HorizontalPointsReport rep;
  rep.points = critical_points(mesh, z);
  if (rep.points.empty()) {
    rep.h_plus = rep.h_minus = std::numeric_limits<double>::quiet_NaN();
    return rep;
  }
  rep.h_plus = -1e300;
  rep.h_minus = 1e300;
  for (const auto& cp : rep.points) {
    rep.h_plus = std::max(rep.h_plus, cp.value);
    rep.h_minus = std::min(rep.h_minus, cp.value);
  }
  return rep;
}

LevelTopology level_curve(const ekt::MetricSpec& spec, const TriMesh& mesh, double t,
                          double eps_t) {
  LevelTopology out;
  std::vector<double> z(mesh.num_vertices());
  for (int v = 0; v < mesh.num_vertices(); ++v) z[v] = mesh.vertices[v].z;
  double tt = t;
  for (int guard = 0; guard < 8; ++guard) {
    bool hit = false;
    for (double v : z)
      if (v == tt) hit = true;
    if (!hit) break;
    tt += eps_t;
    out.shifted = true;
  }
  out.t_used = tt;
  out.components = annulus::extract_level(spec, mesh, z, tt);
  for (const auto& c : out.components) (c.closed ? out.n_closed : out.n_open)++;
  return out;
}

// ---- foliations ------------------------------------------------------------------

namespace {

double interp_field(const graph::DomainMesh& dm, const graph::ScalarField& u, double x,
                    double y) {
  double best_score = -1e300;
  double best_val = 0.0;
  for (const auto& t : dm.triangles) {
    const hyp2::HPoint& a = dm.nodes[t[0]];
    const hyp2::HPoint& b = dm.nodes[t[1]];
    const hyp2::HPoint& c = dm.nodes[t[2]];
    double det = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
    if (std::abs(det) < 1e-300) continue;
    double l1 = ((x - a.x) * (c.y - a.y) - (c.x - a.x) * (y - a.y)) / det;
    double l2 = ((b.x - a.x) * (y - a.y) - (x - a.x) * (b.y - a.y)) / det;
    double l0 = 1.0 - l1 - l2;
    double worst = std::min({l0, l1, l2});
    if (worst > best_score) {
      best_score = worst;
      double c0 = std::clamp(l0, 0.0, 1.0), c1 = std::clamp(l1, 0.0, 1.0),
             c2 = std::clamp(l2, 0.0, 1.0);
      double s = c0 + c1 + c2;
      best_val = (c0 * u[t[0]] + c1 * u[t[1]] + c2 * u[t[2]]) / s;
      if (worst >= 0) break;  // inside this triangle
    }
  }
  return best_val;
}

}  // namespace

double leaf_coordinate(const FoliationSpec& fol, const ekt::EPoint& p) {
  if (std::holds_alternative<HorizontalFoliation>(fol)) return p.z;
  if (const auto* vp = std::get_if<VerticalPerpFoliation>(&fol))
    return hyp2::arclength_of_foot(vp->beta, {p.x, p.y});
  const auto& gt = std::get<GraphTranslatesFoliation>(fol);
  if (!gt.domain || !gt.u)
    throw geometry_error("leaf_coordinate: graph foliation without domain data");
  return p.z - interp_field(*gt.domain, *gt.u, p.x, p.y);
}

TangencyReport tangency_count(const ekt::MetricSpec& spec, const TriMesh& mesh,
                              const FoliationSpec& fol) {
  (void)spec;
  std::vector<double> f(mesh.num_vertices());
  for (int v = 0; v < mesh.num_vertices(); ++v) f[v] = leaf_coordinate(fol, mesh.vertices[v]);
  TangencyReport rep;
  rep.points = critical_points(mesh, f);
  rep.count = static_cast<int>(rep.points.size());
  // one-dimensional criticality along each boundary loop, reported separately
  for (const auto& loop : mesh.boundary_loops) {
    int m = static_cast<int>(loop.vertices.size());
    for (int i = 0; i < m; ++i) {
      int v = loop.vertices[i];
      int a = loop.vertices[(i + m - 1) % m];
      int b = loop.vertices[(i + 1) % m];
      auto above = [&](int w) { return f[w] > f[v] || (f[w] == f[v] && w > v); };
      if (above(a) == above(b)) ++rep.boundary_critical;
    }
  }
  return rep;
}

// ---- Jacobi operator ----------------------------------------------------------------

JacobiOperator assemble_jacobi(const ekt::MetricSpec& spec, const TriMesh& mesh,
                               const CurvatureField* curvature) {
  CurvatureField local;
  if (!curvature) {
    local = second_form(spec, mesh);
    curvature = &local;
  }
  int n = mesh.num_vertices();
  JacobiOperator op;
  op.mass = Eigen::VectorXd::Zero(n);
  op.potential = Eigen::VectorXd::Zero(n);

  std::vector<Eigen::Triplet<double>> trip;
  std::vector<double> diag(n, 0.0);
  for (const auto& t : mesh.triangles) {
    double l[3];
    for (int e = 0; e < 3; ++e)
      l[e] = annulus::edge_length_g(spec, mesh.vertices[t[(e + 1) % 3]],
                                    mesh.vertices[t[(e + 2) % 3]]);
    double s = 0.5 * (l[0] + l[1] + l[2]);
    double area2 = s * (s - l[0]) * (s - l[1]) * (s - l[2]);
    if (!(area2 > 0))
      throw geometry_error("assemble_jacobi: degenerate intrinsic triangle");
    double K = std::sqrt(area2);
    for (int e = 0; e < 3; ++e) {
      int i = t[(e + 1) % 3], j = t[(e + 2) % 3];
      double cot = (l[(e + 1) % 3] * l[(e + 1) % 3] + l[(e + 2) % 3] * l[(e + 2) % 3] -
                    l[e] * l[e]) /
                   (4.0 * K);
      double w = 0.5 * cot;
      trip.emplace_back(i, j, -w);
      trip.emplace_back(j, i, -w);
      diag[i] += w;
      diag[j] += w;
      op.mass[t[e]] += K / 3.0;
    }
  }
  for (int i = 0; i < n; ++i) trip.emplace_back(i, i, diag[i]);
  op.stiffness.resize(n, n);
  op.stiffness.setFromTriplets(trip.begin(), trip.end());

  std::vector<Eigen::Vector3d> normals = vertex_normals(spec, mesh);
  for (int v = 0; v < n; ++v) {
    double absA = curvature->flagged[v] ? curvature->median_absA : curvature->absA[v];
    double ric = ekt::ricci_normal(spec, ekt::TangentVec{mesh.vertices[v], normals[v]});
    op.potential[v] = absA * absA + ric;
    if (!mesh.is_boundary(v)) op.interior.push_back(v);
  }
  return op;
}

namespace {

// smallest eigenvalue of S x = lambda M x (interior Dirichlet block) by
// shifted inverse iteration with Rayleigh updates
std::pair<double, Eigen::VectorXd> smallest_eig(const Eigen::SparseMatrix<double>& S,
                                                const Eigen::VectorXd& M,
                                                double shift_floor) {
  int n = S.rows();
  double sigma = shift_floor;
  Eigen::SparseMatrix<double> Ms(n, n);
  {
    std::vector<Eigen::Triplet<double>> trip;
    for (int i = 0; i < n; ++i) trip.emplace_back(i, i, M[i]);
    Ms.setFromTriplets(trip.begin(), trip.end());
  }
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  auto factor = [&](double s) {
    Eigen::SparseMatrix<double> A = S - s * Ms;
    ldlt.compute(A);
    return ldlt.info() == Eigen::Success;
  };
  if (!factor(sigma)) throw solver_error("jacobi eigensolve: shift factorization failed");

  Eigen::VectorXd x(n);
  for (int i = 0; i < n; ++i) x[i] = std::sin(1.0 + i);
  x /= std::sqrt(x.dot(M.asDiagonal() * x));
  double lam = x.dot(S * x);
  for (int it = 0; it < 400; ++it) {
    Eigen::VectorXd y = ldlt.solve(M.asDiagonal() * x);
    double ny = std::sqrt(y.dot(M.asDiagonal() * y));
    if (!(ny > 0)) throw solver_error("jacobi eigensolve: iteration collapsed");
    x = y / ny;
    double lam_new = x.dot(S * x);
    bool converged = std::abs(lam_new - lam) < 1e-13 * (1.0 + std::abs(lam_new));
    lam = lam_new;
    if (converged) return {lam, x};
    if (it % 12 == 11) {
      double candidate = lam - 1e-3 * (1.0 + std::abs(lam));
      if (candidate > sigma && factor(candidate)) sigma = candidate;
      else if (!factor(sigma)) throw solver_error("jacobi eigensolve: refactor failed");
    }
  }
  throw solver_error("jacobi eigensolve: no convergence in 400 iterations");
}

std::pair<double, Eigen::VectorXd> dirichlet_lambda1(const JacobiOperator& op,
                                                     bool with_potential) {
  const auto& interior = op.interior;
  int m = static_cast<int>(interior.size());
  if (m == 0) throw geometry_error("dirichlet_lambda1: no interior vertices");
  std::vector<int> slot(op.stiffness.rows(), -1);
  for (int k = 0; k < m; ++k) slot[interior[k]] = k;

  std::vector<Eigen::Triplet<double>> trip;
  for (int col = 0; col < op.stiffness.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(op.stiffness, col); it; ++it) {
      int i = slot[it.row()], j = slot[it.col()];
      if (i >= 0 && j >= 0) trip.emplace_back(i, j, it.value());
    }
  Eigen::VectorXd M(m);
  double qmax = 0.0;
  for (int k = 0; k < m; ++k) {
    M[k] = op.mass[interior[k]];
    if (with_potential) {
      double q = op.potential[interior[k]];
      trip.emplace_back(k, k, -q * M[k]);
      qmax = std::max(qmax, q);
    }
  }
  Eigen::SparseMatrix<double> S(m, m);
  S.setFromTriplets(trip.begin(), trip.end());
  double floor = with_potential ? (-qmax - 1.0) : -1.0;
  auto [lam, x] = smallest_eig(S, M, floor);
  return {lam, x};
}

}  // namespace

StabilityReport jacobi_operator(const ekt::MetricSpec& spec, const TriMesh& mesh,
                                const CurvatureField* curvature, double eps_lambda) {
  JacobiOperator op = assemble_jacobi(spec, mesh, curvature);
  auto [lam, x] = dirichlet_lambda1(op, true);
  StabilityReport rep;
  rep.lambda1 = lam;
  rep.classification = lam > eps_lambda
                           ? Stability::strictly_stable
                           : (lam < -eps_lambda ? Stability::unstable
                                                : Stability::stable_unstable);
  rep.eigenfunction.assign(mesh.num_vertices(), 0.0);
  for (size_t k = 0; k < op.interior.size(); ++k)
    rep.eigenfunction[op.interior[k]] = x[static_cast<int>(k)];
  return rep;
}

double laplacian_lambda1(const ekt::MetricSpec& spec, const TriMesh& mesh) {
  JacobiOperator op = assemble_jacobi(spec, mesh);
  return dirichlet_lambda1(op, false).first;
}

JacobiFieldResidual jacobi_field_residual(const ekt::MetricSpec& spec,
                                          const TriMesh& mesh) {
  CurvatureField cf = second_form(spec, mesh);
  JacobiOperator op = assemble_jacobi(spec, mesh, &cf);
  std::vector<Eigen::Vector3d> normals = vertex_normals(spec, mesh);
  int n = mesh.num_vertices();
  Eigen::VectorXd n3(n);
  for (int v = 0; v < n; ++v) {
    Eigen::Matrix3d g = ekt::metric_at(spec, mesh.vertices[v]);
    n3[v] = (g * normals[v])[2];  // <E3, N>
  }
  JacobiFieldResidual out;
  out.median_absH = cf.median_absH;
  Eigen::VectorXd Cn3 = op.stiffness * n3;
  double num = 0.0, den = 0.0, mass = 0.0;
  for (int v : op.interior) {
    double lf = -Cn3[v] / op.mass[v] + op.potential[v] * n3[v];
    num += op.mass[v] * lf * lf;
    den += op.mass[v] * n3[v] * n3[v];
    mass += op.mass[v];
  }
  out.n3_norm = std::sqrt(den / std::max(mass, 1e-300));
  if (out.n3_norm < 1e-8) {
    out.degenerate = true;
    return out;
  }
  out.residual = std::sqrt(num / den);
  return out;
}

// ---- flux -------------------------------------------------------------------------

double flux_boundary_loop(const ekt::MetricSpec& spec, const TriMesh& mesh, int loop_id) {
  if (loop_id < 0 || loop_id >= static_cast<int>(mesh.boundary_loops.size()))
    throw geometry_error("flux_boundary_loop: no such loop");
  const auto& loop = mesh.boundary_loops[loop_id].vertices;
  int m = static_cast<int>(loop.size());
  double total = 0.0;
  const Eigen::Vector3d E3 = Eigen::Vector3d::UnitZ();
  for (int i = 0; i < m; ++i) {
    int a = loop[i], b = loop[(i + 1) % m];
    auto it = mesh.edge_tris.find(std::minmax(a, b));
    if (it == mesh.edge_tris.end() || it->second[1] != -1)
      throw geometry_error("flux_boundary_loop: loop edge is not a boundary edge");
    const auto& t = mesh.triangles[it->second[0]];
    int c = t[0] + t[1] + t[2] - a - b;
    Eigen::Vector3d pa = coords(mesh.vertices[a]), pb = coords(mesh.vertices[b]);
    Eigen::Vector3d mid = 0.5 * (pa + pb);
    ekt::EPoint pm{mid[0], mid[1], mid[2]};
    Eigen::Matrix3d g = ekt::metric_at(spec, pm);
    Eigen::Vector3d e = pb - pa;
    Eigen::Vector3d w = coords(mesh.vertices[c]) - mid;
    Eigen::Vector3d nu = w - (e.dot(g * w) / e.dot(g * e)) * e;
    double nn = std::sqrt(nu.dot(g * nu));
    if (!(nn > 0)) continue;
    nu = -nu / nn;  // outward
    total += (E3.dot(g * nu)) * annulus::edge_length_g(spec, mesh.vertices[a],
                                                       mesh.vertices[b]);
  }
  return total;
}

double flux_level(const ekt::MetricSpec& spec, const TriMesh& mesh,
                  const LevelComponent& comp) {
  double total = 0.0;
  const Eigen::Vector3d E3 = Eigen::Vector3d::UnitZ();
  int np = static_cast<int>(comp.points.size());
  for (size_t s = 0; s < comp.tri_of_segment.size(); ++s) {
    const Eigen::Vector3d& P0 = comp.points[s];
    const Eigen::Vector3d& P1 = comp.points[(s + 1) % np];
    const auto& t = mesh.triangles[comp.tri_of_segment[s]];
    Eigen::Vector3d v0 = coords(mesh.vertices[t[0]]);
    Eigen::Vector3d d1 = coords(mesh.vertices[t[1]]) - v0;
    Eigen::Vector3d d2 = coords(mesh.vertices[t[2]]) - v0;
    Eigen::Vector3d mid = 0.5 * (P0 + P1);
    ekt::EPoint pm{mid[0], mid[1], mid[2]};
    Eigen::Matrix3d g = ekt::metric_at(spec, pm);
    // in-plane gradient of z
    Eigen::Matrix2d G;
    G << d1.dot(g * d1), d1.dot(g * d2), d2.dot(g * d1), d2.dot(g * d2);
    Eigen::Vector2d rhs(mesh.vertices[t[1]].z - mesh.vertices[t[0]].z,
                        mesh.vertices[t[2]].z - mesh.vertices[t[0]].z);
    Eigen::Vector2d ab = G.ldlt().solve(rhs);
    Eigen::Vector3d gz = ab[0] * d1 + ab[1] * d2;
    Eigen::Vector3d e = P1 - P0;
    Eigen::Vector3d nu = gz - (e.dot(g * gz) / e.dot(g * e)) * e;
    double nn = std::sqrt(nu.dot(g * nu));
    if (!(nn > 0)) continue;
    nu /= nn;  // oriented toward increasing z
    total += (E3.dot(g * nu)) *
             annulus::edge_length_g(spec, {P0[0], P0[1], P0[2]}, {P1[0], P1[1], P1[2]});
  }
  return total;
}

double total_boundary_length(const ekt::MetricSpec& spec, const TriMesh& mesh) {
  double s = 0.0;
  for (const auto& [key, tris] : mesh.edge_tris)
    if (tris[1] == -1)
      s += annulus::edge_length_g(spec, mesh.vertices[key.first], mesh.vertices[key.second]);
  return s;
}

void write_curvature_csv(std::ostream& os, const TriMesh& mesh, const CurvatureField& cf) {
  os << "vertex,z,absA,H,flagged\n";
  for (int v = 0; v < mesh.num_vertices(); ++v)
    os << v << ',' << mesh.vertices[v].z << ',' << cf.absA[v] << ',' << cf.H[v] << ','
       << int(cf.flagged[v]) << '\n';
}

void write_level_polylines(std::ostream& os, const std::vector<LevelComponent>& comps) {
  for (size_t i = 0; i < comps.size(); ++i) {
    os << "component " << i << (comps[i].closed ? " closed" : " open") << " loops "
       << comps[i].loop_a << ' ' << comps[i].loop_b << '\n';
    for (const auto& p : comps[i].points)
      os << p[0] << ' ' << p[1] << ' ' << p[2] << '\n';
  }
}

}  // namespace ektlab::analysis

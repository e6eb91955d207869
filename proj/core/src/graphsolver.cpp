#include "ektlab/graphsolver.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace ektlab::graph {

namespace {

struct NodeMetric {
  Eigen::Matrix3d g, gi;
  std::array<Eigen::Matrix3d, 3> gamma;
};

NodeMetric node_metric(const ekt::MetricSpec& spec, const hyp2::HPoint& p) {
  ekt::EPoint e{p.x, p.y, 0.0};
  return {ekt::metric_at(spec, e), ekt::inverse_metric_at(spec, e),
          ekt::christoffel_at(spec, e)};
}

GraphForms forms_from(const NodeMetric& nm, const Eigen::Vector2d& q,
                      const Eigen::Matrix2d& S) {
  const Eigen::Matrix3d& g = nm.g;
  const Eigen::Matrix3d& gi = nm.gi;
  GraphForms f;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      f.first(i, j) = g(i, j) + q[i] * g(j, 2) + q[j] * g(i, 2) + q[i] * q[j] * g(2, 2);

  Eigen::Vector3d ncov(-q[0], -q[1], 1.0);
  double W2 = ncov.dot(gi * ncov);
  if (!(W2 > 0)) throw solver_error("graph_forms: W^2 <= 0 (bad gradient recovery)");
  f.W = std::sqrt(W2);
  f.normal = gi * ncov / f.W;

  // rank-one update identity: (g^u)^{ij} = g^{ij} - N^i N^j restricted to i,j<=2
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) f.first_inv(i, j) = gi(i, j) - f.normal[i] * f.normal[j];

  // A_ij = (1/W)(S_ij + T T Gamma^3) - (1/W) sum_m q_m (T T Gamma^m)
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      auto tt = [&](int m) {
        const Eigen::Matrix3d& G = nm.gamma[m];
        return G(i, j) + q[i] * G(2, j) + q[j] * G(i, 2) + q[i] * q[j] * G(2, 2);
      };
      f.second(i, j) = (S(i, j) + tt(2) - q[0] * tt(0) - q[1] * tt(1)) / f.W;
    }
  return f;
}

// 2 H W, the quantity the solver drives to zero.
double residual_from(const NodeMetric& nm, const Eigen::Vector2d& q,
                     const Eigen::Matrix2d& S) {
  GraphForms f = forms_from(nm, q, S);
  double r = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) r += f.first_inv(i, j) * f.second(i, j) * f.W;
  return r;
}

}  // namespace

GraphForms graph_forms_at(const ekt::MetricSpec& spec, const hyp2::HPoint& p, double u,
                          const Eigen::Vector2d& q, const Eigen::Matrix2d& S) {
  (void)u;  // the metric is z-invariant
  return forms_from(node_metric(spec, p), q, S);
}

double mean_curvature_at(const ekt::MetricSpec& spec, const hyp2::HPoint& p, double u,
                         const Eigen::Vector2d& q, const Eigen::Matrix2d& S) {
  (void)u;
  NodeMetric nm = node_metric(spec, p);
  GraphForms f = forms_from(nm, q, S);
  double twoHW = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) twoHW += f.first_inv(i, j) * f.second(i, j) * f.W;
  return 0.5 * twoHW / f.W;
}

GraphForms graph_forms(const ekt::MetricSpec& spec, const DomainMesh& mesh,
                       const DerivRecovery& rec, const ScalarField& u, int node) {
  Eigen::Vector2d q;
  Eigen::Matrix2d S;
  rec.evaluate(u, node, q, S);
  return graph_forms_at(spec, mesh.nodes[node], u[node], q, S);
}

double mean_curvature_graph(const ekt::MetricSpec& spec, const DomainMesh& mesh,
                            const DerivRecovery& rec, const ScalarField& u, int node) {
  Eigen::Vector2d q;
  Eigen::Matrix2d S;
  rec.evaluate(u, node, q, S);
  return mean_curvature_at(spec, mesh.nodes[node], u[node], q, S);
}

double ScherkData::boundary_value(SideLabel s) const {
  const SideData& d = side[static_cast<int>(s)];
  switch (d.kind) {
    case DataKind::finite: return d.value;
    case DataKind::plus_inf: return truncation;
    case DataKind::minus_inf: return -truncation;
  }
  return 0.0;
}

// ---- Jenkins-Serrin ---------------------------------------------------------

namespace {

InscribedPolygon make_polygon(const hyp2::QuadDomain& dom, const ScherkData& data,
                              std::vector<int> verts) {
  InscribedPolygon p;
  p.vertices = std::move(verts);
  int n = static_cast<int>(p.vertices.size());
  for (int e = 0; e < n; ++e) {
    int i = p.vertices[e], j = p.vertices[(e + 1) % n];
    double len = hyp2::dist(dom.vertex[i], dom.vertex[j]);
    p.perimeter += len;
    // edge (i,j) lies on domain side k iff j == i+1 or i == j+1 (mod 4)
    int k = -1;
    if ((i + 1) % 4 == j) k = i;
    else if ((j + 1) % 4 == i) k = j;
    if (k >= 0) {
      switch (data.side[k].kind) {
        case DataKind::plus_inf: p.a_length += len; break;
        case DataKind::minus_inf: p.b_length += len; break;
        case DataKind::finite: break;
      }
    }
  }
  return p;
}

}  // namespace

AdmissibilityReport jenkins_serrin_check(const hyp2::QuadDomain& domain,
                                         const ScherkData& data, double tol) {
  AdmissibilityReport rep;
  bool has_finite = false;
  for (const auto& s : data.side)
    if (s.kind == DataKind::finite) has_finite = true;

  static const std::vector<std::vector<int>> polys = {
      {0, 1, 2, 3}, {0, 1, 2}, {1, 2, 3}, {2, 3, 0}, {3, 0, 1}};
  for (const auto& v : polys) rep.polygons.push_back(make_polygon(domain, data, v));

  const InscribedPolygon& omega = rep.polygons[0];
  rep.used = has_finite ? AdmissibilityCase::cond1 : AdmissibilityCase::cond2;
  rep.admissible = true;

  auto strict_ok = [&](const InscribedPolygon& p) {
    return p.perimeter - 2.0 * p.a_length > tol && p.perimeter - 2.0 * p.b_length > tol;
  };

  if (has_finite) {
    for (const auto& p : rep.polygons)
      if (!strict_ok(p)) {
        rep.admissible = false;
        if (!rep.witness) rep.witness = p;
      }
  } else {
    rep.equality_defect = omega.b_length - omega.a_length;
    if (std::abs(rep.equality_defect) > tol) {
      rep.admissible = false;
      rep.witness = omega;
    }
    for (size_t k = 1; k < rep.polygons.size(); ++k)
      if (!strict_ok(rep.polygons[k])) {
        rep.admissible = false;
        if (!rep.witness) rep.witness = rep.polygons[k];
      }
    if (rep.admissible) rep.witness = omega;  // equality case carries its witness
  }
  return rep;
}

AdmissibilityReport jenkins_serrin_check(const hyp2::IdealQuadDomain& domain,
                                         const ScherkData& data, double tol) {
  // Bounded-polygon lengths diverge on ideal domains; only the symmetric
  // equality case is classified, via dist(gamma1,gamma2) vs dist(eta1,eta2).
  AdmissibilityReport rep;
  rep.used = AdmissibilityCase::cond2;
  for (const auto& s : data.side)
    if (s.kind == DataKind::finite)
      throw geometry_error(
          "jenkins_serrin_check(ideal): finite data on ideal sides is out of scope");
  double dg = hyp2::geodesic_distance(domain.side[0], domain.side[2]);
  double de = hyp2::geodesic_distance(domain.side[1], domain.side[3]);
  rep.equality_defect = dg - de;
  rep.admissible = std::abs(dg - de) <= tol;
  return rep;
}

// ---- boundary data and solver ------------------------------------------------

ScalarField boundary_values(const DomainMesh& mesh, const ScherkData& data,
                            CornerPolicy policy, int corner_ramp_edges) {
  int n = mesh.num_nodes();
  std::vector<std::set<int>> labels(n);
  std::vector<std::vector<std::pair<int, int>>> bnb(n);  // (neighbor, label)
  for (const auto& be : mesh.boundary_edges) {
    labels[be.a].insert(static_cast<int>(be.label));
    labels[be.b].insert(static_cast<int>(be.label));
    bnb[be.a].push_back({be.b, static_cast<int>(be.label)});
    bnb[be.b].push_back({be.a, static_cast<int>(be.label)});
  }
  auto corner_value = [&](int v) {
    std::vector<int> ls(labels[v].begin(), labels[v].end());
    double finite_val = 0.0;
    int n_finite = 0;
    double sum = 0.0;
    for (int l : ls) {
      SideLabel sl = static_cast<SideLabel>(l);
      sum += data.boundary_value(sl);
      if (data.side[l].kind == DataKind::finite) {
        finite_val += data.side[l].value;
        ++n_finite;
      }
    }
    if (policy == CornerPolicy::prefer_finite && n_finite > 0)
      return finite_val / n_finite;
    return sum / double(ls.size());
  };

  ScalarField u;
  u.values.assign(n, 0.0);
  for (int v = 0; v < n; ++v) {
    if (labels[v].empty()) continue;
    if (labels[v].size() == 1)
      u[v] = data.boundary_value(static_cast<SideLabel>(*labels[v].begin()));
    else
      u[v] = corner_value(v);
  }
  if (corner_ramp_edges <= 0) return u;

  // Interpolate each side's first corner_ramp_edges nodes between the corner
  // value and the side datum: a hard data jump across one boundary edge is
  // not representable by the nodal recovery.
  for (int c = 0; c < n; ++c) {
    if (labels[c].size() < 2) continue;
    double cv = corner_value(c);
    for (auto [start, lbl] : bnb[c]) {
      double side_val = data.boundary_value(static_cast<SideLabel>(lbl));
      int prev = c, cur = start;
      for (int k = 1; k <= corner_ramp_edges; ++k) {
        if (labels[cur].size() >= 2) break;  // reached the next corner
        double w = double(k) / double(corner_ramp_edges + 1);
        u[cur] = cv + (side_val - cv) * w;
        int nxt = -1;
        for (auto [w2, l2] : bnb[cur])
          if (w2 != prev && l2 == lbl) nxt = w2;
        if (nxt < 0) break;
        prev = cur;
        cur = nxt;
      }
    }
  }
  return u;
}

namespace {

struct Assembled {
  Eigen::VectorXd F;
  Eigen::SparseMatrix<double> J;
  double max_residual = 0.0;
};

class GraphSystem {
 public:
  GraphSystem(const ekt::MetricSpec& spec, const DomainMesh& mesh,
              const DerivRecovery& rec)
      : mesh_(mesh), rec_(rec) {
    for (int v = 0; v < mesh.num_nodes(); ++v) {
      if (!mesh.is_boundary(v)) {
        index_.push_back(v);
        metrics_.push_back(node_metric(spec, mesh.nodes[v]));
      }
    }
    slot_.assign(mesh.num_nodes(), -1);
    for (size_t k = 0; k < index_.size(); ++k) slot_[index_[k]] = static_cast<int>(k);
  }

  int unknowns() const { return static_cast<int>(index_.size()); }
  int node(int k) const { return index_[k]; }
  int slot(int v) const { return slot_[v]; }

  Eigen::VectorXd residual(const ScalarField& u, double* max_res = nullptr) const {
    Eigen::VectorXd F(unknowns());
    double mx = 0.0;
    for (int k = 0; k < unknowns(); ++k) {
      Eigen::Vector2d q;
      Eigen::Matrix2d S;
      rec_.evaluate(u, index_[k], q, S);
      F[k] = residual_from(metrics_[k], q, S);
      mx = std::max(mx, std::abs(F[k]));
    }
    if (max_res) *max_res = mx;
    return F;
  }

  Assembled assemble(const ScalarField& u) const {
    Assembled out;
    out.F.resize(unknowns());
    std::vector<Eigen::Triplet<double>> trip;
    for (int k = 0; k < unknowns(); ++k) {
      int v = index_[k];
      Eigen::Vector2d q;
      Eigen::Matrix2d S;
      rec_.evaluate(u, v, q, S);
      const NodeMetric& nm = metrics_[k];
      double F0 = residual_from(nm, q, S);
      out.F[k] = F0;
      out.max_residual = std::max(out.max_residual, std::abs(F0));

      // F = sum (g^u)^{ij} (S_ij + Gamma terms): the W factors cancel, so
      // dF/dS is the inverse first form exactly; dF/dq by central
      // differences of the small pointwise formula.
      GraphForms f = forms_from(nm, q, S);
      double dF_dS[3] = {f.first_inv(0, 0), 2.0 * f.first_inv(0, 1), f.first_inv(1, 1)};
      Eigen::Vector2d dF_dq;
      for (int c = 0; c < 2; ++c) {
        double h = 1e-6 * std::max(1.0, std::abs(q[c]));
        Eigen::Vector2d qp = q, qm = q;
        qp[c] += h;
        qm[c] -= h;
        dF_dq[c] = (residual_from(nm, qp, S) - residual_from(nm, qm, S)) / (2.0 * h);
      }

      const std::vector<int>& st = rec_.stencil(v);
      const Eigen::MatrixXd& Wt = rec_.weights(v);
      for (size_t r = 0; r < st.size(); ++r) {
        int w = st[r];
        int j = slot_[w];
        if (j < 0) continue;  // boundary node: fixed value
        double d = dF_dq[0] * Wt(0, r) + dF_dq[1] * Wt(1, r) + dF_dS[0] * Wt(2, r) +
                   dF_dS[1] * Wt(3, r) + dF_dS[2] * Wt(4, r);
        trip.emplace_back(k, j, d);
      }
    }
    out.J.resize(unknowns(), unknowns());
    out.J.setFromTriplets(trip.begin(), trip.end());
    return out;
  }

 private:
  const DomainMesh& mesh_;
  const DerivRecovery& rec_;
  std::vector<int> index_;
  std::vector<int> slot_;
  std::vector<NodeMetric> metrics_;
};

// graph-Laplacian harmonic extension of the boundary values; smooth enough
// to put Newton in its basin
void harmonic_init(const DomainMesh& mesh, ScalarField& u) {
  std::vector<int> slot(mesh.num_nodes(), -1);
  std::vector<int> interior;
  for (int v = 0; v < mesh.num_nodes(); ++v)
    if (!mesh.is_boundary(v)) {
      slot[v] = static_cast<int>(interior.size());
      interior.push_back(v);
    }
  int m = static_cast<int>(interior.size());
  if (m == 0) return;
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
  for (int k = 0; k < m; ++k) {
    int v = interior[k];
    double deg = static_cast<double>(mesh.adj[v].size());
    trip.emplace_back(k, k, deg);
    for (int w : mesh.adj[v]) {
      if (slot[w] >= 0)
        trip.emplace_back(k, slot[w], -1.0);
      else
        rhs[k] += u[w];
    }
  }
  Eigen::SparseMatrix<double> L(m, m);
  L.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(L);
  if (ldlt.info() != Eigen::Success) return;
  Eigen::VectorXd x = ldlt.solve(rhs);
  for (int k = 0; k < m; ++k) u[interior[k]] = x[k];
}

bool newton_solve(const GraphSystem& sys, ScalarField& u, const SolveOptions& opts,
                  SolveReport& rep) {
  for (int it = 0; it < opts.max_newton_iterations; ++it) {
    Assembled a = sys.assemble(u);
    rep.residual = a.max_residual;
    rep.residual_history.push_back(a.max_residual);
    rep.iterations = it;
    if (a.max_residual < opts.tolerance) return true;

    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(a.J);
    if (lu.info() != Eigen::Success) return false;
    Eigen::VectorXd delta = lu.solve(-a.F);
    double f0 = a.F.squaredNorm();

    double t = 1.0;
    bool accepted = false;
    while (t > 1e-7) {
      ScalarField trial = u;
      for (int k = 0; k < sys.unknowns(); ++k) trial[sys.node(k)] += t * delta[k];
      double ft = sys.residual(trial).squaredNorm();
      if (ft <= (1.0 - opts.damping * t) * f0) {
        u = trial;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) return false;
  }
  double mx;
  sys.residual(u, &mx);
  rep.residual = mx;
  rep.residual_history.push_back(mx);
  return mx < opts.tolerance;
}

}  // namespace

double graph_residual(const ekt::MetricSpec& spec, const DomainMesh& mesh,
                      const DerivRecovery& rec, const ScalarField& u) {
  GraphSystem sys(spec, mesh, rec);
  double mx;
  sys.residual(u, &mx);
  return mx;
}

std::pair<ScalarField, SolveReport> solve_dirichlet(const ekt::MetricSpec& spec,
                                                    const DomainMesh& mesh,
                                                    const hyp2::QuadDomain& domain,
                                                    const ScherkData& data,
                                                    const SolveOptions& opts) {
  SolveReport rep;
  AdmissibilityReport adm = jenkins_serrin_check(domain, data);
  if (!adm.admissible) {
    if (!opts.override_admissibility)
      throw geometry_error(
          "solve_dirichlet: Jenkins-Serrin admissibility violated (pass "
          "override_admissibility to force the truncated solve)");
    rep.admissibility_overridden = true;
  }

  DerivRecovery rec(mesh);
  GraphSystem sys(spec, mesh, rec);

  ScalarField target =
      boundary_values(mesh, data, opts.corner_policy, opts.corner_ramp_edges);
  double bmax = 0.0;
  for (int v = 0; v < mesh.num_nodes(); ++v)
    if (mesh.is_boundary(v)) bmax = std::max(bmax, std::abs(target[v]));

  ScalarField u;
  u.values.assign(mesh.num_nodes(), 0.0);
  bool warm = opts.initial && opts.initial->size() == mesh.num_nodes();
  if (warm)
    for (int v = 0; v < mesh.num_nodes(); ++v)
      if (!mesh.is_boundary(v)) u[v] = (*opts.initial)[v];

  auto solve_at = [&](double s, ScalarField& field) {
    for (int v = 0; v < mesh.num_nodes(); ++v)
      if (mesh.is_boundary(v)) field[v] = s * target[v];
    SolveReport stage;
    bool ok = newton_solve(sys, field, opts, stage);
    rep.iterations += stage.iterations;
    rep.residual = stage.residual;
    rep.residual_history.insert(rep.residual_history.end(),
                                stage.residual_history.begin(),
                                stage.residual_history.end());
    return ok;
  };

  // adaptive homotopy in the boundary amplitude
  double s_done = 0.0;
  double step = opts.continuation ? std::min(1.0, 2.0 / std::max(bmax, 1e-12)) : 1.0;
  ScalarField good = u;
  {
    for (int v = 0; v < mesh.num_nodes(); ++v)
      if (mesh.is_boundary(v)) good[v] = 0.0;
  }
  if (!warm) {
    for (int v = 0; v < mesh.num_nodes(); ++v)
      if (mesh.is_boundary(v)) u[v] = std::min(1.0, step) * target[v];
    harmonic_init(mesh, u);
  }
  int stages = 0;
  while (s_done < 1.0) {
    if (++stages > 80) {
      rep.converged = false;
      return {u, rep};
    }
    double s_try = std::min(1.0, s_done + step);
    ScalarField trial = u;
    if (solve_at(s_try, trial)) {
      u = trial;
      good = trial;
      s_done = s_try;
      step = std::min(step * 1.6, 1.0);
    } else {
      if (!opts.continuation || step < 1.0 / 256.0) {
        rep.converged = false;
        return {trial, rep};
      }
      step *= 0.5;
      u = good;
    }
  }
  rep.converged = true;
  return {u, rep};
}

std::pair<ScalarField, SolveReport> barrier_field(const ekt::MetricSpec& spec,
                                                  const DomainMesh& mesh,
                                                  const hyp2::QuadDomain& domain,
                                                  BarrierKind which, double M,
                                                  const SolveOptions& opts) {
  double sgn = (which == BarrierKind::u_plus) ? 1.0 : -1.0;
  ScherkData d1, d2;
  d1.truncation = d2.truncation = M;
  DataKind inf_kind = sgn > 0 ? DataKind::plus_inf : DataKind::minus_inf;
  d1.side[0] = {inf_kind, 0.0};
  d2.side[2] = {inf_kind, 0.0};
  auto [u1, r1] = solve_dirichlet(spec, mesh, domain, d1, opts);
  auto [u2, r2] = solve_dirichlet(spec, mesh, domain, d2, opts);
  SolveReport rep;
  rep.converged = r1.converged && r2.converged;
  rep.iterations = r1.iterations + r2.iterations;
  rep.residual = std::max(r1.residual, r2.residual);
  ScalarField u = u1;
  for (int v = 0; v < mesh.num_nodes(); ++v)
    u[v] = sgn > 0 ? std::max(u1[v], u2[v]) : std::min(u1[v], u2[v]);
  return {u, rep};
}

}  // namespace ektlab::graph

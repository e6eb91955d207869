#include "ektlab/domain_mesh.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <set>

namespace ektlab::graph {

const char* to_string(SideLabel s) {
  switch (s) {
    case SideLabel::gamma1: return "gamma1";
    case SideLabel::eta1: return "eta1";
    case SideLabel::gamma2: return "gamma2";
    case SideLabel::eta2: return "eta2";
    case SideLabel::free: return "free";
  }
  return "?";
}

SideLabel side_label_from(const std::string& s) {
  for (int i = 0; i < 5; ++i)
    if (s == to_string(static_cast<SideLabel>(i))) return static_cast<SideLabel>(i);
  throw config_error("unknown boundary side label: " + s);
}

void DomainMesh::finalize() {
  int n = num_nodes();
  boundary_flag.assign(n, 0);
  node_side.assign(n, SideLabel::free);
  adj.assign(n, {});
  std::set<std::pair<int, int>> seen;
  for (const auto& t : triangles) {
    const hyp2::HPoint& a = nodes[t[0]];
    const hyp2::HPoint& b = nodes[t[1]];
    const hyp2::HPoint& c = nodes[t[2]];
    double det = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
    if (!(det > 0)) throw geometry_error("DomainMesh: inverted or degenerate triangle");
    for (int e = 0; e < 3; ++e) {
      int i = t[e], j = t[(e + 1) % 3];
      auto key = std::minmax(i, j);
      if (seen.insert(key).second) {
        adj[i].push_back(j);
        adj[j].push_back(i);
      }
    }
  }
  for (const auto& be : boundary_edges) {
    if (be.a < 0 || be.a >= n || be.b < 0 || be.b >= n)
      throw geometry_error("DomainMesh: boundary edge references unknown node");
    boundary_flag[be.a] = boundary_flag[be.b] = 1;
  }
  // Node labels: a corner node touches two sides; keep the first label seen
  // except that a finite-data side is not in question here, so order of
  // boundary_edges decides.  Corner policy for solves lives in the solver.
  for (const auto& be : boundary_edges) {
    if (node_side[be.a] == SideLabel::free) node_side[be.a] = be.label;
    if (node_side[be.b] == SideLabel::free) node_side[be.b] = be.label;
  }
}

DomainMesh mesh_quad(const hyp2::QuadDomain& q, int ns, int nt) {
  if (ns < 2 || nt < 2) throw config_error("mesh_quad: need ns, nt >= 2");
  using hyp2::HPoint;
  DomainMesh m;
  auto arc_point = [](const hyp2::HSegment& s, double frac, bool reversed) {
    double sa = hyp2::arclength_of_foot(s.geodesic, s.a);
    double sb = hyp2::arclength_of_foot(s.geodesic, s.b);
    if (reversed) std::swap(sa, sb);
    return hyp2::geodesic_point(s.geodesic, sa + frac * (sb - sa));
  };
  // row j = 0 on gamma1 (p1 -> q1), row j = nt on gamma2 (q2 -> p2)
  std::vector<HPoint> bottom(ns + 1), top(ns + 1);
  for (int i = 0; i <= ns; ++i) {
    double f = double(i) / ns;
    bottom[i] = arc_point(q.side[0], f, false);  // gamma1: p1 -> q1
    top[i] = arc_point(q.side[2], f, true);      // gamma2 reversed: q2 -> p2
  }
  m.nodes.resize((ns + 1) * (nt + 1));
  auto id = [&](int i, int j) { return j * (ns + 1) + i; };
  for (int i = 0; i <= ns; ++i) {
    if (bottom[i].x == top[i].x && bottom[i].y == top[i].y)
      throw geometry_error("mesh_quad: degenerate column");
    hyp2::HGeodesic col = hyp2::geodesic_through(bottom[i], top[i]);
    double sa = hyp2::arclength_of_foot(col, bottom[i]);
    double sb = hyp2::arclength_of_foot(col, top[i]);
    for (int j = 0; j <= nt; ++j) {
      double f = double(j) / nt;
      m.nodes[id(i, j)] =
          (j == 0) ? bottom[i]
                   : (j == nt) ? top[i] : hyp2::geodesic_point(col, sa + f * (sb - sa));
    }
  }
  for (int j = 0; j < nt; ++j)
    for (int i = 0; i < ns; ++i) {
      int v00 = id(i, j), v10 = id(i + 1, j), v01 = id(i, j + 1), v11 = id(i + 1, j + 1);
      m.triangles.push_back(std::array<int, 3>{v00, v10, v11});
      m.triangles.push_back(std::array<int, 3>{v00, v11, v01});
    }
  for (int i = 0; i < ns; ++i) {
    m.boundary_edges.push_back({id(i, 0), id(i + 1, 0), SideLabel::gamma1});
    m.boundary_edges.push_back({id(i, nt), id(i + 1, nt), SideLabel::gamma2});
  }
  for (int j = 0; j < nt; ++j) {
    m.boundary_edges.push_back({id(0, j), id(0, j + 1), SideLabel::eta2});
    m.boundary_edges.push_back({id(ns, j), id(ns, j + 1), SideLabel::eta1});
  }
  m.finalize();
  return m;
}

DerivRecovery::DerivRecovery(const DomainMesh& mesh, int fit_order) {
  if (mesh.adj.empty())
    throw discretization_error("DerivRecovery: mesh not finalized");
  int n = mesh.num_nodes();
  stencil_.resize(n);
  weights_.resize(n);
  for (int v = 0; v < n; ++v) {
    if (mesh.is_boundary(v)) continue;  // residuals are interior-only
    std::set<int> ring(mesh.adj[v].begin(), mesh.adj[v].end());
    std::set<int> two = ring;
    for (int w : ring) two.insert(mesh.adj[w].begin(), mesh.adj[w].end());
    two.erase(v);
    std::vector<int>& st = stencil_[v];
    st.push_back(v);
    st.insert(st.end(), two.begin(), two.end());

    // One-sided cubic fits next to the boundary are badly conditioned;
    // quadratic fits keep the stencil weights tame there.
    bool near_boundary = false;
    for (int w : mesh.adj[v])
      if (mesh.is_boundary(w)) near_boundary = true;
    int order = near_boundary ? std::min(fit_order, 2) : fit_order;
    while (order >= 2) {
      int nb = (order + 1) * (order + 2) / 2;
      if (static_cast<int>(st.size()) < nb + 2) {
        --order;
        continue;
      }
      double h = 0;
      for (size_t r = 1; r < st.size(); ++r)
        h += std::hypot(mesh.nodes[st[r]].x - mesh.nodes[v].x,
                        mesh.nodes[st[r]].y - mesh.nodes[v].y);
      h /= double(st.size() - 1);
      Eigen::MatrixXd A(st.size(), nb);
      for (size_t r = 0; r < st.size(); ++r) {
        double xi = (mesh.nodes[st[r]].x - mesh.nodes[v].x) / h;
        double eta = (mesh.nodes[st[r]].y - mesh.nodes[v].y) / h;
        int c = 0;
        for (int d = 0; d <= order; ++d)
          for (int p = d; p >= 0; --p) A(r, c++) = std::pow(xi, p) * std::pow(eta, d - p);
      }
      Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A);
      if (cod.rank() < nb) {
        --order;
        continue;
      }
      // pseudoinverse rows for the monomial coefficients
      Eigen::MatrixXd P = cod.pseudoInverse();  // nb x stencil
      Eigen::MatrixXd W(5, st.size());
      // coefficient layout: [1, x, y, x^2, xy, y^2, ...] scaled by h powers
      W.row(0) = P.row(1) / h;            // du/dx
      W.row(1) = P.row(2) / h;            // du/dy
      W.row(2) = 2.0 * P.row(3) / (h * h);  // d2u/dxx
      W.row(3) = P.row(4) / (h * h);        // d2u/dxy
      W.row(4) = 2.0 * P.row(5) / (h * h);  // d2u/dyy
      weights_[v] = W;
      break;
    }
    if (order < 2)
      throw discretization_error("DerivRecovery: underdetermined fit at node " +
                                 std::to_string(v));
  }
}

void DerivRecovery::evaluate(const ScalarField& u, int node, Eigen::Vector2d& grad,
                             Eigen::Matrix2d& hess) const {
  const std::vector<int>& st = stencil_[node];
  if (st.empty())
    throw discretization_error("DerivRecovery: no stencil at node (boundary?)");
  Eigen::VectorXd vals(st.size());
  for (size_t r = 0; r < st.size(); ++r) vals[r] = u[st[r]];
  Eigen::Matrix<double, 5, 1> d = weights_[node] * vals;
  grad = {d[0], d[1]};
  hess << d[2], d[3], d[3], d[4];
}

// ---- IO --------------------------------------------------------------------

void write_domain_mesh(std::ostream& os, const DomainMesh& mesh) {
  char buf[80];
  for (const auto& p : mesh.nodes) {
    std::snprintf(buf, sizeof(buf), "n %.17g %.17g\n", p.x, p.y);
    os << buf;
  }
  for (const auto& t : mesh.triangles) os << "t " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  for (const auto& b : mesh.boundary_edges)
    os << "b " << b.a << ' ' << b.b << ' ' << to_string(b.label) << '\n';
}

DomainMesh read_domain_mesh(std::istream& is) {
  DomainMesh m;
  std::string tag;
  while (is >> tag) {
    if (tag == "n") {
      hyp2::HPoint p;
      if (!(is >> p.x >> p.y)) throw config_error("mesh: bad node line");
      m.nodes.push_back(p);
    } else if (tag == "t") {
      std::array<int, 3> t{};
      if (!(is >> t[0] >> t[1] >> t[2])) throw config_error("mesh: bad triangle line");
      m.triangles.push_back(t);
    } else if (tag == "b") {
      BoundaryEdge b;
      std::string lbl;
      if (!(is >> b.a >> b.b >> lbl)) throw config_error("mesh: bad boundary line");
      b.label = side_label_from(lbl);
      m.boundary_edges.push_back(b);
    } else {
      throw config_error("mesh: unknown record '" + tag + "'");
    }
  }
  m.finalize();
  return m;
}

void save_domain_mesh(const std::string& path, const DomainMesh& mesh) {
  std::ofstream f(path);
  if (!f) throw config_error("save_domain_mesh: cannot open " + path);
  write_domain_mesh(f, mesh);
}

DomainMesh load_domain_mesh(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw config_error("load_domain_mesh: cannot open " + path);
  return read_domain_mesh(f);
}

void write_field_csv(std::ostream& os, const ScalarField& f) {
  os << "node,value\n";
  char buf[64];
  for (int i = 0; i < f.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g\n", i, f[i]);
    os << buf;
  }
}

ScalarField read_field_csv(std::istream& is) {
  ScalarField f;
  std::string line;
  std::getline(is, line);  // header
  int idx;
  char comma;
  double v;
  while (is >> idx >> comma >> v) f.values.push_back(v);
  return f;
}

}  // namespace ektlab::graph

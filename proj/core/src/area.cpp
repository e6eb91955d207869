#include <algorithm>
#include <cmath>
#include <numeric>

#include "ektlab/annulus.hpp"
#include "ektlab/domain_mesh.hpp"

namespace ektlab::annulus {

namespace {

const double kQuadPts[3][2] = {{0.5, 0.0}, {0.5, 0.5}, {0.0, 0.5}};

struct TriQuadData {
  double area = 0.0;
};

inline ekt::EPoint affine_point(const ekt::EPoint& v0, const Eigen::Vector3d& d1,
                                const Eigen::Vector3d& d2, double s, double t) {
  return {v0.x + s * d1[0] + t * d2[0], v0.y + s * d1[1] + t * d2[1],
          v0.z + s * d1[2] + t * d2[2]};
}

}  // namespace

double ambient_area(const ekt::MetricSpec& spec, const TriMesh& mesh) {
  double area = 0.0;
  std::vector<int> bad;
  for (int ti = 0; ti < mesh.num_triangles(); ++ti) {
    const auto& t = mesh.triangles[ti];
    const ekt::EPoint& v0 = mesh.vertices[t[0]];
    const ekt::EPoint& v1 = mesh.vertices[t[1]];
    const ekt::EPoint& v2 = mesh.vertices[t[2]];
    Eigen::Vector3d d1(v1.x - v0.x, v1.y - v0.y, v1.z - v0.z);
    Eigen::Vector3d d2(v2.x - v0.x, v2.y - v0.y, v2.z - v0.z);
    double a = 0.0;
    for (const auto& q : kQuadPts) {
      Eigen::Matrix3d g = ekt::metric_at(spec, affine_point(v0, d1, d2, q[0], q[1]));
      double E = d1.dot(g * d1), F = d1.dot(g * d2), G = d2.dot(g * d2);
      double det = E * G - F * F;
      if (!(det > 0)) {
        bad.push_back(ti);
        det = 0;
      }
      a += std::sqrt(det) / 6.0;
    }
    if (!(a > 1e-300)) bad.push_back(ti);
    area += a;
  }
  if (!bad.empty()) {
    std::string msg = "ambient_area: degenerate triangles:";
    for (size_t i = 0; i < bad.size() && i < 8; ++i)
      msg += ' ' + std::to_string(bad[i]);
    throw geometry_error(msg);
  }
  return area;
}

void ambient_area_gradient(const ekt::MetricSpec& spec, const TriMesh& mesh,
                           std::vector<Eigen::Vector3d>& grad, double* area_out) {
  grad.assign(mesh.num_vertices(), Eigen::Vector3d::Zero());
  double area = 0.0;
  for (const auto& t : mesh.triangles) {
    const ekt::EPoint& v0 = mesh.vertices[t[0]];
    const ekt::EPoint& v1 = mesh.vertices[t[1]];
    const ekt::EPoint& v2 = mesh.vertices[t[2]];
    Eigen::Vector3d d1(v1.x - v0.x, v1.y - v0.y, v1.z - v0.z);
    Eigen::Vector3d d2(v2.x - v0.x, v2.y - v0.y, v2.z - v0.z);
    for (const auto& q : kQuadPts) {
      double s = q[0], tt = q[1];
      ekt::EPoint p = affine_point(v0, d1, d2, s, tt);
      Eigen::Matrix3d g = ekt::metric_at(spec, p);
      Eigen::Matrix3d dgdx, dgdy;
      ekt::metric_derivs_at(spec, p, dgdx, dgdy);
      Eigen::Vector3d gd1 = g * d1, gd2 = g * d2;
      double E = d1.dot(gd1), F = d1.dot(gd2), G = d2.dot(gd2);
      double det = E * G - F * F;
      if (!(det > 0)) throw geometry_error("ambient_area_gradient: degenerate triangle");
      double sq = std::sqrt(det);
      area += sq / 6.0;
      // shape functions at the quadrature point
      double phi[3] = {1.0 - s - tt, s, tt};
      double s1[3] = {-1.0, 1.0, 0.0};  // d d1 / d v_k
      double s2[3] = {-1.0, 0.0, 1.0};  // d d2 / d v_k
      for (int k = 0; k < 3; ++k) {
        for (int c = 0; c < 3; ++c) {
          double dE, dF, dG;
          if (c < 2) {
            const Eigen::Matrix3d& dg = (c == 0) ? dgdx : dgdy;
            double w = phi[k];
            dE = w * d1.dot(dg * d1);
            dF = w * d1.dot(dg * d2);
            dG = w * d2.dot(dg * d2);
          } else {
            dE = dF = dG = 0.0;
          }
          dE += 2.0 * s1[k] * gd1[c];
          dF += s1[k] * gd2[c] + s2[k] * gd1[c];
          dG += 2.0 * s2[k] * gd2[c];
          double ddet = dE * G + E * dG - 2.0 * F * dF;
          grad[t[k]][c] += ddet / (12.0 * sq);
        }
      }
    }
  }
  if (area_out) *area_out = area;
}

DouglasReport douglas_gap(const ekt::MetricSpec& spec, const hyp2::QuadDomain& omega,
                          double n) {
  (void)spec;  // areas and lengths here are base-hyperbolic quantities
  DouglasReport rep;
  double lg = hyp2::segment_length(omega.side[0]) + hyp2::segment_length(omega.side[2]);
  double le = hyp2::segment_length(omega.side[1]) + hyp2::segment_length(omega.side[3]);
  double A = hyp2::area(omega);
  rep.disk_area_sum = 2.0 * n * lg;
  rep.comparison_annulus_area = 2.0 * A + 2.0 * n * le;
  rep.gap = rep.comparison_annulus_area - rep.disk_area_sum;
  double qg = lg - le;
  if (qg > 0) rep.n_threshold = static_cast<int>(std::ceil(A / qg));
  return rep;
}

// ---- initial annuli ----------------------------------------------------------

namespace {

void orient_consistently(TriMesh& mesh) {
  // BFS over triangle adjacency, flipping so shared edges are traversed in
  // opposite directions.
  std::map<std::pair<int, int>, std::vector<int>> edge2tri;
  for (int ti = 0; ti < mesh.num_triangles(); ++ti) {
    const auto& t = mesh.triangles[ti];
    for (int e = 0; e < 3; ++e)
      edge2tri[std::minmax(t[e], t[(e + 1) % 3])].push_back(ti);
  }
  std::vector<int> state(mesh.num_triangles(), 0);  // 0 unseen, 1 kept, 2 flipped
  std::vector<int> stack;
  for (int seed = 0; seed < mesh.num_triangles(); ++seed) {
    if (state[seed]) continue;
    state[seed] = 1;
    stack.push_back(seed);
    while (!stack.empty()) {
      int ti = stack.back();
      stack.pop_back();
      auto tri = mesh.triangles[ti];
      if (state[ti] == 2) std::swap(tri[1], tri[2]);
      for (int e = 0; e < 3; ++e) {
        int a = tri[e], b = tri[(e + 1) % 3];
        for (int tj : edge2tri[std::minmax(a, b)]) {
          if (tj == ti || state[tj]) continue;
          auto other = mesh.triangles[tj];
          bool same_dir = false;
          for (int f = 0; f < 3; ++f)
            if (other[f] == a && other[(f + 1) % 3] == b) same_dir = true;
          state[tj] = same_dir ? 2 : 1;
          stack.push_back(tj);
        }
      }
    }
  }
  for (int ti = 0; ti < mesh.num_triangles(); ++ti)
    if (state[ti] == 2) std::swap(mesh.triangles[ti][1], mesh.triangles[ti][2]);
}

}  // namespace

TriMesh build_initial_annulus(const BoundaryCurve& c1, const BoundaryCurve& c2,
                              const hyp2::QuadDomain& omega, AnnulusStyle style,
                              const AnnulusBuildOptions& opts) {
  TriMesh m;
  if (style == AnnulusStyle::tube) {
    size_t cnt = c1.samples.size();
    if (c2.samples.size() != cnt)
      throw geometry_error("build_initial_annulus: tube style needs equal sample counts");
    int K = std::max(2, opts.rings);
    // align the second curve: offset and direction minimizing chord length
    int best_off = 0, best_dir = 1;
    double best = 1e300;
    for (int dir : {1, -1})
      for (size_t off = 0; off < cnt; ++off) {
        double s = 0;
        for (size_t i = 0; i < cnt; ++i) {
          const ekt::EPoint& a = c1.samples[i];
          const ekt::EPoint& b = c2.samples[(off + dir * i + cnt * (i + 2)) % cnt];
          s += (a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) +
               (a.z - b.z) * (a.z - b.z);
        }
        if (s < best) {
          best = s;
          best_off = static_cast<int>(off);
          best_dir = dir;
        }
      }
    auto match = [&](size_t i) {
      return (best_off + best_dir * static_cast<int>(i) + 4 * static_cast<int>(cnt)) %
             static_cast<int>(cnt);
    };
    m.vertices.resize(cnt * (K + 1));
    auto vid = [&](size_t i, int k) { return static_cast<int>(k * cnt + i); };
    for (size_t i = 0; i < cnt; ++i) {
      const ekt::EPoint& a = c1.samples[i];
      const ekt::EPoint& b = c2.samples[match(i)];
      for (int k = 0; k <= K; ++k) {
        double f = double(k) / K;
        m.vertices[vid(i, k)] = {a.x + f * (b.x - a.x), a.y + f * (b.y - a.y),
                                 a.z + f * (b.z - a.z)};
      }
    }
    for (size_t i = 0; i < cnt; ++i) {
      size_t j = (i + 1) % cnt;
      for (int k = 0; k < K; ++k) {
        m.triangles.push_back(std::array<int, 3>{vid(i, k), vid(j, k), vid(j, k + 1)});
        m.triangles.push_back(std::array<int, 3>{vid(i, k), vid(j, k + 1), vid(i, k + 1)});
      }
    }
    TriMesh::Loop l0, l1;
    for (size_t i = 0; i < cnt; ++i) l0.vertices.push_back(vid(i, 0));
    for (size_t i = 0; i < cnt; ++i) l1.vertices.push_back(vid(i, K));
    l0.curve_id = 0;
    l1.curve_id = 1;
    m.boundary_loops = {l0, l1};
    orient_consistently(m);
    m.finalize();
    return m;
  }

  // comparison style: T_n(Omega x 0) + T_-n(Omega x 0) + eta strips, with the
  // boundary snapped onto the rounded curves.
  const int ns = opts.ns, nt = opts.nt, nz = opts.nz;
  graph::DomainMesh dm = graph::mesh_quad(omega, ns, nt);
  double n1 = c1.height, n2 = c2.height;
  if (std::abs(n1 - n2) > 1e-12)
    throw geometry_error("build_initial_annulus: curves at different heights");
  double n = n1;

  auto did = [&](int i, int j) { return j * (ns + 1) + i; };
  int dn = dm.num_nodes();
  std::vector<int> top(dn), bot(dn);
  for (int v = 0; v < dn; ++v) {
    m.vertices.push_back(ekt::EPoint{dm.nodes[v].x, dm.nodes[v].y, n});
    top[v] = static_cast<int>(m.vertices.size()) - 1;
  }
  for (int v = 0; v < dn; ++v) {
    m.vertices.push_back(ekt::EPoint{dm.nodes[v].x, dm.nodes[v].y, -n});
    bot[v] = static_cast<int>(m.vertices.size()) - 1;
  }
  // strips over eta1 (column i = ns) and eta2 (column i = 0)
  auto make_strip = [&](int col) {
    std::vector<std::vector<int>> S(nt + 1, std::vector<int>(nz + 1, -1));
    for (int j = 0; j <= nt; ++j) {
      int v = did(col, j);
      for (int k = 0; k <= nz; ++k) {
        if (k == 0)
          S[j][k] = bot[v];
        else if (k == nz)
          S[j][k] = top[v];
        else {
          double z = -n + 2.0 * n * double(k) / nz;
          m.vertices.push_back(ekt::EPoint{dm.nodes[v].x, dm.nodes[v].y, z});
          S[j][k] = static_cast<int>(m.vertices.size()) - 1;
        }
      }
    }
    return S;
  };
  auto S1 = make_strip(ns), S2 = make_strip(0);

  for (const auto& t : dm.triangles) {
    m.triangles.push_back(std::array<int, 3>{top[t[0]], top[t[1]], top[t[2]]});
    m.triangles.push_back(std::array<int, 3>{bot[t[0]], bot[t[2]], bot[t[1]]});
  }
  auto emit_strip = [&](const std::vector<std::vector<int>>& S) {
    for (int j = 0; j < nt; ++j)
      for (int k = 0; k < nz; ++k) {
        m.triangles.push_back(std::array<int, 3>{S[j][k], S[j + 1][k], S[j + 1][k + 1]});
        m.triangles.push_back(std::array<int, 3>{S[j][k], S[j + 1][k + 1], S[j][k + 1]});
      }
  };
  emit_strip(S1);
  emit_strip(S2);

  // boundary loops: rectangle around each gamma slab, then snap to the curve
  auto build_loop = [&](int row, const std::vector<std::vector<int>>& Sa,
                        const std::vector<std::vector<int>>& Sb, int jrow) {
    // Sa carries the eta1-side vertical at (col ns), Sb the eta2-side one.
    TriMesh::Loop loop;
    for (int i = 0; i <= ns; ++i) loop.vertices.push_back(top[did(i, row)]);
    for (int k = nz - 1; k >= 1; --k) loop.vertices.push_back(Sa[jrow][k]);
    for (int i = ns; i >= 0; --i) loop.vertices.push_back(bot[did(i, row)]);
    for (int k = 1; k <= nz - 1; ++k) loop.vertices.push_back(Sb[jrow][k]);
    return loop;
  };
  TriMesh::Loop loop1 = build_loop(0, S1, S2, 0);
  TriMesh::Loop loop2 = build_loop(nt, S1, S2, nt);
  loop1.curve_id = 0;
  loop2.curve_id = 1;
  m.boundary_loops = {loop1, loop2};

  for (int v : loop1.vertices) m.vertices[v] = c1.project(m.vertices[v]);
  for (int v : loop2.vertices) m.vertices[v] = c2.project(m.vertices[v]);

  orient_consistently(m);
  m.finalize();
  return m;
}

}  // namespace ektlab::annulus

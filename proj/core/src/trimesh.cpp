#include "ektlab/trimesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

namespace ektlab::annulus {

int TriMesh::euler_characteristic() const {
  std::set<std::pair<int, int>> edges;
  for (const auto& t : triangles)
    for (int e = 0; e < 3; ++e) edges.insert(std::minmax(t[e], t[(e + 1) % 3]));
  return num_vertices() - static_cast<int>(edges.size()) + num_triangles();
}

void TriMesh::finalize() {
  int n = num_vertices();
  boundary_flag.assign(n, 0);
  vertex_tris.assign(n, {});
  adj.assign(n, {});
  edge_tris.clear();
  for (int ti = 0; ti < num_triangles(); ++ti) {
    const auto& t = triangles[ti];
    if (t[0] == t[1] || t[1] == t[2] || t[2] == t[0])
      throw geometry_error("TriMesh: degenerate triangle (repeated vertex)");
    for (int e = 0; e < 3; ++e) {
      int i = t[e], j = t[(e + 1) % 3];
      vertex_tris[i].push_back(ti);
      auto key = std::minmax(i, j);
      auto it = edge_tris.find(key);
      if (it == edge_tris.end())
        edge_tris[key] = {ti, -1};
      else if (it->second[1] == -1)
        it->second[1] = ti;
      else
        throw geometry_error("TriMesh: non-manifold edge");
    }
  }
  for (const auto& [key, tris] : edge_tris) {
    adj[key.first].push_back(key.second);
    adj[key.second].push_back(key.first);
    if (tris[1] == -1) boundary_flag[key.first] = boundary_flag[key.second] = 1;
  }

  if (boundary_loops.empty()) {
    // walk boundary edges into loops
    std::map<int, std::vector<int>> next;  // boundary vertex -> neighbors on boundary
    for (const auto& [key, tris] : edge_tris)
      if (tris[1] == -1) {
        next[key.first].push_back(key.second);
        next[key.second].push_back(key.first);
      }
    std::set<int> used;
    for (const auto& [v0, nb] : next) {
      if (used.count(v0)) continue;
      Loop loop;
      int prev = -1, cur = v0;
      do {
        loop.vertices.push_back(cur);
        used.insert(cur);
        const auto& cand = next[cur];
        int nxt = (cand[0] != prev) ? cand[0] : (cand.size() > 1 ? cand[1] : -1);
        prev = cur;
        cur = nxt;
      } while (cur != -1 && cur != v0);
      boundary_loops.push_back(std::move(loop));
    }
  }

  loop_of_vertex.assign(n, -1);
  for (size_t li = 0; li < boundary_loops.size(); ++li)
    for (int v : boundary_loops[li].vertices) {
      if (!boundary_flag[v])
        throw geometry_error("TriMesh: loop vertex is not on the boundary");
      loop_of_vertex[v] = static_cast<int>(li);
    }
}

double edge_length_g(const ekt::MetricSpec& spec, const ekt::EPoint& a,
                     const ekt::EPoint& b) {
  Eigen::Vector3d d(b.x - a.x, b.y - a.y, b.z - a.z);
  const double t0 = 0.5 - 0.5 / std::sqrt(3.0), t1 = 0.5 + 0.5 / std::sqrt(3.0);
  double len = 0.0;
  for (double t : {t0, t1}) {
    ekt::EPoint p{a.x + t * d[0], a.y + t * d[1], a.z + t * d[2]};
    len += 0.5 * std::sqrt(d.dot(ekt::metric_at(spec, p) * d));
  }
  return len;
}

double mean_edge_length(const ekt::MetricSpec& spec, const TriMesh& mesh) {
  double s = 0.0;
  int n = 0;
  for (const auto& [key, tris] : mesh.edge_tris) {
    s += edge_length_g(spec, mesh.vertices[key.first], mesh.vertices[key.second]);
    ++n;
  }
  return n ? s / n : 0.0;
}

std::vector<LevelComponent> extract_level(const ekt::MetricSpec& spec,
                                          const TriMesh& mesh,
                                          const std::vector<double>& f, double t) {
  for (double v : f)
    if (v == t) throw geometry_error("extract_level: t is not a regular value");

  auto crossing = [&](int i, int j) { return (f[i] < t) != (f[j] < t); };
  std::map<std::pair<int, int>, int> cut_id;
  std::vector<Eigen::Vector3d> cuts;
  std::vector<std::pair<int, int>> cut_edge;
  auto cut_point = [&](int i, int j) {
    auto key = std::minmax(i, j);
    auto it = cut_id.find(key);
    if (it != cut_id.end()) return it->second;
    double s = (t - f[key.first]) / (f[key.second] - f[key.first]);
    const ekt::EPoint& a = mesh.vertices[key.first];
    const ekt::EPoint& b = mesh.vertices[key.second];
    cuts.emplace_back(a.x + s * (b.x - a.x), a.y + s * (b.y - a.y),
                      a.z + s * (b.z - a.z));
    cut_edge.push_back(key);
    int id = static_cast<int>(cuts.size()) - 1;
    cut_id[key] = id;
    return id;
  };

  // per-cut adjacency through triangles
  std::vector<std::array<int, 3>> segs;  // (cut_a, cut_b, triangle)
  for (int ti = 0; ti < mesh.num_triangles(); ++ti) {
    const auto& tr = mesh.triangles[ti];
    int ids[3], n = 0;
    for (int e = 0; e < 3; ++e) {
      int i = tr[e], j = tr[(e + 1) % 3];
      if (crossing(i, j)) ids[n++] = cut_point(i, j);
    }
    if (n == 2) segs.push_back(std::array<int, 3>{ids[0], ids[1], ti});
  }

  std::vector<std::vector<std::pair<int, int>>> at_cut(cuts.size());  // (seg, other cut)
  for (size_t si = 0; si < segs.size(); ++si) {
    at_cut[segs[si][0]].push_back({static_cast<int>(si), segs[si][1]});
    at_cut[segs[si][1]].push_back({static_cast<int>(si), segs[si][0]});
  }

  auto boundary_loop_of_cut = [&](int c) {
    auto key = cut_edge[c];
    auto it = mesh.edge_tris.find(key);
    if (it != mesh.edge_tris.end() && it->second[1] == -1)
      return mesh.loop_of_vertex[key.first];
    return -1;
  };

  std::vector<LevelComponent> out;
  std::vector<char> seg_used(segs.size(), 0);
  // open components first: start from cuts on boundary edges
  for (size_t c0 = 0; c0 < cuts.size(); ++c0) {
    if (boundary_loop_of_cut(static_cast<int>(c0)) < 0) continue;
    if (at_cut[c0].size() != 1) continue;
    int seg = at_cut[c0][0].first;
    if (seg_used[seg]) continue;
    LevelComponent comp;
    comp.loop_a = boundary_loop_of_cut(static_cast<int>(c0));
    int cur = static_cast<int>(c0), prev_seg = -1;
    comp.points.push_back(cuts[cur]);
    while (true) {
      int nseg = -1, nxt = -1;
      for (auto [s, other] : at_cut[cur])
        if (s != prev_seg && !seg_used[s]) {
          nseg = s;
          nxt = other;
          break;
        }
      if (nseg < 0) break;
      seg_used[nseg] = 1;
      comp.tri_of_segment.push_back(segs[nseg][2]);
      comp.points.push_back(cuts[nxt]);
      prev_seg = nseg;
      cur = nxt;
    }
    comp.loop_b = boundary_loop_of_cut(cur);
    comp.closed = false;
    out.push_back(std::move(comp));
  }
  // remaining segments form closed components
  for (size_t s0 = 0; s0 < segs.size(); ++s0) {
    if (seg_used[s0]) continue;
    LevelComponent comp;
    comp.closed = true;
    int start = segs[s0][0];
    int cur = start, prev_seg = -1;
    comp.points.push_back(cuts[cur]);
    while (true) {
      int nseg = -1, nxt = -1;
      for (auto [s, other] : at_cut[cur])
        if (s != prev_seg && !seg_used[s]) {
          nseg = s;
          nxt = other;
          break;
        }
      if (nseg < 0) break;
      seg_used[nseg] = 1;
      comp.tri_of_segment.push_back(segs[nseg][2]);
      prev_seg = nseg;
      cur = nxt;
      if (cur == start) break;
      comp.points.push_back(cuts[cur]);
    }
    out.push_back(std::move(comp));
  }

  for (auto& comp : out) {
    double len = 0.0;
    int np = static_cast<int>(comp.points.size());
    int ns = comp.closed ? np : np - 1;
    for (int i = 0; i < ns; ++i) {
      const Eigen::Vector3d& a = comp.points[i];
      const Eigen::Vector3d& b = comp.points[(i + 1) % np];
      len += edge_length_g(spec, {a[0], a[1], a[2]}, {b[0], b[1], b[2]});
    }
    comp.length = len;
  }
  return out;
}

// ---- IO ----------------------------------------------------------------------

void write_trimesh(std::ostream& os, const TriMesh& mesh) {
  char buf[120];
  for (const auto& p : mesh.vertices) {
    std::snprintf(buf, sizeof(buf), "v %.17g %.17g %.17g\n", p.x, p.y, p.z);
    os << buf;
  }
  for (const auto& t : mesh.triangles)
    os << "t " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  for (const auto& l : mesh.boundary_loops) {
    os << "loop " << l.curve_id;
    for (int v : l.vertices) os << ' ' << v;
    os << '\n';
  }
}

TriMesh read_trimesh(std::istream& is) {
  TriMesh m;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "v") {
      ekt::EPoint p;
      if (!(ls >> p.x >> p.y >> p.z)) throw config_error("trimesh: bad vertex line");
      m.vertices.push_back(p);
    } else if (tag == "t") {
      std::array<int, 3> t{};
      if (!(ls >> t[0] >> t[1] >> t[2])) throw config_error("trimesh: bad triangle line");
      m.triangles.push_back(t);
    } else if (tag == "loop") {
      TriMesh::Loop l;
      if (!(ls >> l.curve_id)) throw config_error("trimesh: bad loop line");
      int v;
      while (ls >> v) l.vertices.push_back(v);
      m.boundary_loops.push_back(std::move(l));
    } else {
      throw config_error("trimesh: unknown record '" + tag + "'");
    }
  }
  m.finalize();
  return m;
}

void save_trimesh(const std::string& path, const TriMesh& mesh) {
  std::ofstream f(path);
  if (!f) throw config_error("save_trimesh: cannot open " + path);
  write_trimesh(f, mesh);
}

TriMesh load_trimesh(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw config_error("load_trimesh: cannot open " + path);
  return read_trimesh(f);
}

void write_vertex_csv(std::ostream& os, const TriMesh& mesh,
                      const std::vector<double>* absA, const std::vector<double>* H) {
  os << "vertex,z";
  if (absA) os << ",absA";
  if (H) os << ",H";
  os << '\n';
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    os << v << ',' << mesh.vertices[v].z;
    if (absA) os << ',' << (*absA)[v];
    if (H) os << ',' << (*H)[v];
    os << '\n';
  }
}

}  // namespace ektlab::annulus

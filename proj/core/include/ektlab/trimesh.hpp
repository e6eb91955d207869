#pragma once

#include <Eigen/Dense>

#include <array>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "ektlab/ekt.hpp"
#include "ektlab/errors.hpp"

namespace ektlab::annulus {

/// Indexed triangulated surface with ambient cylinder-model vertex
/// positions.  The annulus pipeline produces meshes with two boundary
/// loops (Euler characteristic 0); graph lifts and plane patches are disks.
struct TriMesh {
  std::vector<ekt::EPoint> vertices;
  std::vector<std::array<int, 3>> triangles;

  struct Loop {
    std::vector<int> vertices;  // cyclic
    int curve_id = -1;          // index of the pinning BoundaryCurve, -1 if free
  };
  std::vector<Loop> boundary_loops;

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_triangles() const { return static_cast<int>(triangles.size()); }
  int euler_characteristic() const;
  bool is_boundary(int v) const { return boundary_flag.at(v); }

  /// Builds adjacency caches; derives boundary loops from the connectivity
  /// when none are stored; validates manifoldness and loop consistency.
  void finalize();

  // caches
  std::vector<char> boundary_flag;
  std::vector<std::vector<int>> vertex_tris;
  std::vector<std::vector<int>> adj;
  std::map<std::pair<int, int>, std::array<int, 2>> edge_tris;  // sorted edge -> tris
  std::vector<int> loop_of_vertex;  // boundary loop index or -1
};

/// Metric length of the coordinate chord between two vertices (2-point
/// Gauss quadrature of the ambient metric along the segment).
double edge_length_g(const ekt::MetricSpec& spec, const ekt::EPoint& a,
                     const ekt::EPoint& b);

double mean_edge_length(const ekt::MetricSpec& spec, const TriMesh& mesh);

/// One connected component of a level set {f = t} extracted by linear
/// edge interpolation.
struct LevelComponent {
  std::vector<Eigen::Vector3d> points;  // polyline in coordinates
  std::vector<int> tri_of_segment;      // triangle carrying each segment
  bool closed = false;
  int loop_a = -1, loop_b = -1;  // boundary loops touched by open endpoints
  double length = 0.0;           // ambient metric length
};

/// Extracts mesh cap {f = t}; t must be a regular value (no vertex value
/// equal to t); callers shift t by a small epsilon otherwise.
std::vector<LevelComponent> extract_level(const ekt::MetricSpec& spec,
                                          const TriMesh& mesh,
                                          const std::vector<double>& f, double t);

// ---- plain text format ------------------------------------------------------
// vertices: "v <x> <y> <z>", triangles: "t <i> <j> <k>",
// loops:    "loop <curve_id> <i0> <i1> ..."
void write_trimesh(std::ostream& os, const TriMesh& mesh);
TriMesh read_trimesh(std::istream& is);
void save_trimesh(const std::string& path, const TriMesh& mesh);
TriMesh load_trimesh(const std::string& path);

/// Per-vertex CSV "vertex,z,absA,H" (curvature columns optional).
void write_vertex_csv(std::ostream& os, const TriMesh& mesh,
                      const std::vector<double>* absA = nullptr,
                      const std::vector<double>* H = nullptr);

}  // namespace ektlab::annulus

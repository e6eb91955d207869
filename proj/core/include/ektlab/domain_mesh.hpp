#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "ektlab/errors.hpp"
#include "ektlab/hyp2.hpp"

namespace ektlab::graph {

enum class SideLabel : int { gamma1 = 0, eta1 = 1, gamma2 = 2, eta2 = 3, free = 4 };

const char* to_string(SideLabel s);
SideLabel side_label_from(const std::string& s);

struct BoundaryEdge {
  int a = -1, b = -1;
  SideLabel label = SideLabel::free;
};

/// Conforming triangulation of a planar domain in the hyperbolic disk
/// model.  Nodes are model coordinates; triangles have positive Euclidean
/// orientation; each boundary edge carries the label of the side it lies on.
struct DomainMesh {
  std::vector<hyp2::HPoint> nodes;
  std::vector<std::array<int, 3>> triangles;
  std::vector<BoundaryEdge> boundary_edges;

  int num_nodes() const { return static_cast<int>(nodes.size()); }
  bool is_boundary(int node) const { return boundary_flag.at(node); }
  const std::vector<int>& ring1(int node) const { return adj.at(node); }

  /// Rebuild adjacency/boundary caches; validates orientation and labels.
  void finalize();

  // caches built by finalize()
  std::vector<char> boundary_flag;
  std::vector<SideLabel> node_side;  // side label for boundary nodes, free otherwise
  std::vector<std::vector<int>> adj;
};

struct ScalarField {
  std::vector<double> values;
  double operator[](int i) const { return values[i]; }
  double& operator[](int i) { return values[i]; }
  int size() const { return static_cast<int>(values.size()); }
};

/// Structured transfinite mesh of a convex geodesic quadrilateral:
/// (ns+1) x (nt+1) grid, rows following gamma1 -> gamma2, columns the
/// eta2 -> eta1 direction.  Refining (2 ns, 2 nt) reproduces the coarse
/// nodes exactly, which the convergence studies rely on.
DomainMesh mesh_quad(const hyp2::QuadDomain& q, int ns, int nt);

/// Gradient/Hessian recovery by moving least squares over the node's
/// 2-ring.  fit_order 3 reproduces cubics (second-order accurate Hessians
/// on arbitrary stencils); it falls back to quadratic fits on small
/// stencils and throws discretization_error when even those are
/// underdetermined.
class DerivRecovery {
 public:
  DerivRecovery(const DomainMesh& mesh, int fit_order = 3);

  /// Nodes contributing to the fit at `node` (the node itself first).
  const std::vector<int>& stencil(int node) const { return stencil_[node]; }

  /// Rows mapping stencil values to (du/dx, du/dy, d2u/dxx, d2u/dxy, d2u/dyy).
  const Eigen::MatrixXd& weights(int node) const { return weights_[node]; }

  void evaluate(const ScalarField& u, int node, Eigen::Vector2d& grad,
                Eigen::Matrix2d& hess) const;

 private:
  std::vector<std::vector<int>> stencil_;
  std::vector<Eigen::MatrixXd> weights_;  // 5 x stencil size
};

// ---- plain text mesh format ----------------------------------------------
// nodes:     "n <x> <y>"
// triangles: "t <i> <j> <k>"
// boundary:  "b <i> <j> <label>"
void write_domain_mesh(std::ostream& os, const DomainMesh& mesh);
DomainMesh read_domain_mesh(std::istream& is);
void save_domain_mesh(const std::string& path, const DomainMesh& mesh);
DomainMesh load_domain_mesh(const std::string& path);

/// Field output: CSV "node,value".
void write_field_csv(std::ostream& os, const ScalarField& f);
ScalarField read_field_csv(std::istream& is);

}  // namespace ektlab::graph

#pragma once

#include <Eigen/Dense>

#include <array>
#include <optional>
#include <vector>

#include "ektlab/domain_mesh.hpp"
#include "ektlab/ekt.hpp"
#include "ektlab/hyp2.hpp"

// The vertical minimal-graph equation over planar domains: fundamental
// forms of graphs Gr(u), pointwise mean curvature in local coordinates, a
// Dirichlet solver with truncated infinite boundary data, and the
// Jenkins-Serrin admissibility check for quadrilaterals.
namespace ektlab::graph {

// ---- pointwise graph calculus ----------------------------------------------

/// First/second fundamental data of a graph at one point, computed from the
/// ambient metric and the graph derivatives.
struct GraphForms {
  Eigen::Matrix2d first;      // g^u_ij
  Eigen::Matrix2d first_inv;  // (g^u)^ij by the rank-one update identity
  double W = 1.0;             // |grad Phi|, Phi = z - u
  Eigen::Vector3d normal;     // upward unit normal, contravariant components
  Eigen::Matrix2d second;     // A_ij in the graph frame E_i
};

/// Evaluates the graph calculus at base point (x1,x2) with height u,
/// gradient q and (for the second form) Hessian S.  All metric data is
/// z-independent, so u only fixes the evaluation height.
GraphForms graph_forms_at(const ekt::MetricSpec& spec, const hyp2::HPoint& p, double u,
                          const Eigen::Vector2d& q, const Eigen::Matrix2d& S);

/// Mean curvature of Gr(u) at one point: 2 H W = sum (g^u)^ij (S_ij +
/// Gamma-terms) - sum du (g^u)^ij (Gamma-terms), everything evaluated at
/// (x1, x2, u).
double mean_curvature_at(const ekt::MetricSpec& spec, const hyp2::HPoint& p, double u,
                         const Eigen::Vector2d& q, const Eigen::Matrix2d& S);

/// Mesh-level wrappers: derivatives recovered from the node's 2-ring.
GraphForms graph_forms(const ekt::MetricSpec& spec, const DomainMesh& mesh,
                       const DerivRecovery& rec, const ScalarField& u, int node);
double mean_curvature_graph(const ekt::MetricSpec& spec, const DomainMesh& mesh,
                            const DerivRecovery& rec, const ScalarField& u, int node);

// ---- boundary data ----------------------------------------------------------

enum class DataKind { finite, plus_inf, minus_inf };

struct SideData {
  DataKind kind = DataKind::finite;
  double value = 0.0;  // used when kind == finite
};

/// Per-side boundary data with the truncation level M substituted for the
/// infinite sides.  The Scherk-domain condition (no two +inf or two -inf
/// sides meeting at a convex corner) is checked by the admissibility test.
struct ScherkData {
  std::array<SideData, 4> side;  // gamma1, eta1, gamma2, eta2
  double truncation = 4.0;       // M > 0

  double boundary_value(SideLabel s) const;
};

enum class CornerPolicy { prefer_finite, average };

// ---- Jenkins-Serrin admissibility -------------------------------------------

struct InscribedPolygon {
  std::vector<int> vertices;  // indices into QuadDomain::vertex, cyclic
  double perimeter = 0.0;     // l(P)
  double a_length = 0.0;      // total length of +inf sides on P
  double b_length = 0.0;      // total length of -inf sides on P
};

enum class AdmissibilityCase { cond1, cond2 };

struct AdmissibilityReport {
  bool admissible = false;
  AdmissibilityCase used = AdmissibilityCase::cond1;
  std::optional<InscribedPolygon> witness;  // violating (or equality) polygon
  std::vector<InscribedPolygon> polygons;   // everything enumerated
  double equality_defect = 0.0;             // b(Omega) - a(Omega) for cond2
};

/// Enumerates the inscribed polygonal domains of a quadrilateral (the four
/// vertex-triple triangles and the quadrilateral itself) and evaluates the
/// Jenkins-Serrin conditions for the given data.
AdmissibilityReport jenkins_serrin_check(const hyp2::QuadDomain& domain,
                                         const ScherkData& data, double tol = 1e-10);

/// Ideal quadrilaterals: only the symmetric equality case is decidable with
/// the bounded-polygon machinery; the classification compares
/// dist(gamma1,gamma2) with dist(eta1,eta2).
AdmissibilityReport jenkins_serrin_check(const hyp2::IdealQuadDomain& domain,
                                         const ScherkData& data, double tol = 1e-9);

// ---- Dirichlet solver --------------------------------------------------------

struct SolveOptions {
  double tolerance = 1e-8;        // max-norm of the interior residual 2HW
  int max_newton_iterations = 60;
  double damping = 1e-4;          // Armijo slope factor
  CornerPolicy corner_policy = CornerPolicy::prefer_finite;
  // Boundary data jumps at corners are interpolated over this many edges;
  // a hard jump makes the nodal collocation system unsolvable.  Sides whose
  // datum equals the corner value are unaffected.
  int corner_ramp_edges = 2;
  bool continuation = true;       // adaptive homotopy in the data amplitude
  bool override_admissibility = false;
  const ScalarField* initial = nullptr;  // interior warm start (boundary rows ignored)
};

struct SolveReport {
  bool converged = false;
  int iterations = 0;
  double residual = 0.0;
  std::vector<double> residual_history;
  bool admissibility_overridden = false;
};

/// Solves the minimal-graph equation 2HW = 0 on the interior nodes with
/// Dirichlet data from `data` (+-M on infinite sides).  Throws solver_error
/// on Newton divergence and geometry_error when the data is inadmissible
/// and not overridden.
std::pair<ScalarField, SolveReport> solve_dirichlet(const ekt::MetricSpec& spec,
                                                    const DomainMesh& mesh,
                                                    const hyp2::QuadDomain& domain,
                                                    const ScherkData& data,
                                                    const SolveOptions& opts = {});

/// Dirichlet boundary values only (exposed for tests and barriers).
ScalarField boundary_values(const DomainMesh& mesh, const ScherkData& data,
                            CornerPolicy policy, int corner_ramp_edges = 2);

enum class BarrierKind { u_plus, u_minus };

/// u+ = max of the two solutions with +M on one gamma side and 0 elsewhere;
/// u- the reflected construction with -M.
std::pair<ScalarField, SolveReport> barrier_field(const ekt::MetricSpec& spec,
                                                  const DomainMesh& mesh,
                                                  const hyp2::QuadDomain& domain,
                                                  BarrierKind which, double M,
                                                  const SolveOptions& opts = {});

/// Max-norm of the interior residual of a candidate field.
double graph_residual(const ekt::MetricSpec& spec, const DomainMesh& mesh,
                      const DerivRecovery& rec, const ScalarField& u);

}  // namespace ektlab::graph

// Batch driver for the E(kappa,tau) minimal-surface laboratory: domain
// checks, graph solves, annulus minimization sweeps, and exports.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "ektlab/analysis.hpp"
#include "ektlab/annulus.hpp"
#include "ektlab/domain_mesh.hpp"
#include "ektlab/ekt.hpp"
#include "ektlab/errors.hpp"
#include "ektlab/graphsolver.hpp"
#include "ektlab/hyp2.hpp"
#include "ektlab/trimesh.hpp"

namespace fs = std::filesystem;
using namespace ektlab;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitGeometry = 2;
constexpr int kExitSolver = 3;
constexpr int kExitDegenerated = 4;

struct DomainConfig {
  double dist = 1.2;  // symmetric pair distance; used unless thetas given
  std::vector<double> g1_ideal, g2_ideal;  // explicit ideal endpoint angles
  double t1 = 1.2, t2 = 1.2;
  bool ideal = false;  // classify the ideal quadrilateral instead
};

struct Options {
  ekt::MetricSpec metric;
  DomainConfig domain;
  graph::SolveOptions solver;
  std::array<std::string, 4> data{"0", "0", "0", "0"};  // gamma1,eta1,gamma2,eta2
  double truncation = 4.0;
  int mesh_ns = 32, mesh_nt = 32, mesh_nz = 24, rings = 12;
  int curve_samples = 96;
  double n = 6.0, rho = 0.05, tol = 1e-6;
  int max_iter = 20000;
  std::string style = "comparison";
  std::vector<double> n_list;
  std::string outdir;
  unsigned seed = 0;  // recorded for reproducibility; the pipeline is deterministic
};

std::string out_root(const Options& opt) {
  if (!opt.outdir.empty()) return opt.outdir;
  if (const char* env = std::getenv("EKTLAB_OUTDIR")) return env;
  return ".";
}

std::pair<hyp2::HGeodesic, hyp2::HGeodesic> domain_geodesics(const DomainConfig& dc) {
  if (dc.g1_ideal.size() == 2 && dc.g2_ideal.size() == 2)
    return {hyp2::geodesic_from_ideal(hyp2::make_ideal(dc.g1_ideal[0]),
                                      hyp2::make_ideal(dc.g1_ideal[1])),
            hyp2::geodesic_from_ideal(hyp2::make_ideal(dc.g2_ideal[0]),
                                      hyp2::make_ideal(dc.g2_ideal[1]))};
  // symmetric standard pair at the requested distance, feet on the x-axis
  double r = 2.0 * std::tanh(dc.dist / 4.0);
  auto perp_at = [](double x) {
    double c = (x * x + 4.0) / (2.0 * x);
    double R = std::sqrt(c * c - 4.0);
    double cost = (c * c + 4.0 - R * R) / (4.0 * c);
    double th = std::acos(std::clamp(cost, -1.0, 1.0));
    return hyp2::geodesic_from_ideal(hyp2::make_ideal(th), hyp2::make_ideal(-th));
  };
  return {perp_at(-r), perp_at(r)};
}

graph::ScherkData make_data(const Options& opt) {
  graph::ScherkData d;
  d.truncation = opt.truncation;
  for (int i = 0; i < 4; ++i) {
    const std::string& s = opt.data[i];
    if (s == "+inf" || s == "inf")
      d.side[i] = {graph::DataKind::plus_inf, 0.0};
    else if (s == "-inf")
      d.side[i] = {graph::DataKind::minus_inf, 0.0};
    else
      d.side[i] = {graph::DataKind::finite, std::stod(s)};
  }
  return d;
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream f(path);
  if (!f) throw config_error("cannot open output file " + path);
  f << content;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

int cmd_check_domain(const Options& opt) {
  auto [g1, g2] = domain_geodesics(opt.domain);
  hyp2::ThresholdClass tc = hyp2::threshold_check(g1, g2, 1e-9);
  std::cout << "threshold: " << hyp2::to_string(tc) << "\n";
  std::cout << "dist: " << hyp2::geodesic_distance(g1, g2) << "\n";

  graph::ScherkData data = make_data(opt);
  if (opt.domain.ideal) {
    hyp2::IdealQuadDomain iq = hyp2::build_ideal_quad(g1, g2);
    auto rep = graph::jenkins_serrin_check(iq, data, 1e-6);
    std::cout << "admissibility: "
              << (rep.admissible ? "equality case (cond2)" : "violated (cond2)")
              << "\n";
    std::cout << "equality_defect: " << rep.equality_defect << "\n";
    std::cout << "n_threshold: infinite\n";
    return 0;
  }

  hyp2::QuadDomain omega = hyp2::build_quad(g1, g2, opt.domain.t1, opt.domain.t2);
  std::cout << "quad_gap: " << hyp2::quad_gap(omega) << "\n";
  std::cout << "area: " << hyp2::area(omega) << "\n";

  auto rep = graph::jenkins_serrin_check(omega, data);
  std::cout << "admissibility: " << (rep.admissible ? "admissible" : "violated")
            << " (" << (rep.used == graph::AdmissibilityCase::cond1 ? "cond1" : "cond2")
            << ")\n";
  if (rep.witness) {
    std::cout << "witness: P(";
    for (size_t i = 0; i < rep.witness->vertices.size(); ++i)
      std::cout << (i ? "," : "") << rep.witness->vertices[i];
    std::cout << ") l=" << rep.witness->perimeter << " a=" << rep.witness->a_length
              << " b=" << rep.witness->b_length << "\n";
  }

  auto dg = annulus::douglas_gap(opt.metric, omega, opt.n);
  if (dg.n_threshold)
    std::cout << "n_threshold: " << *dg.n_threshold << "\n";
  else
    std::cout << "n_threshold: infinite\n";
  return 0;
}

int cmd_solve_graph(const Options& opt) {
  auto [g1, g2] = domain_geodesics(opt.domain);
  hyp2::QuadDomain omega = hyp2::build_quad(g1, g2, opt.domain.t1, opt.domain.t2);
  graph::DomainMesh mesh = graph::mesh_quad(omega, opt.mesh_ns, opt.mesh_nt);
  graph::ScherkData data = make_data(opt);

  fs::path root = out_root(opt);
  fs::create_directories(root);
  graph::save_domain_mesh((root / "domain_mesh.txt").string(), mesh);

  auto [u, rep] = graph::solve_dirichlet(opt.metric, mesh, omega, data, opt.solver);
  if (rep.admissibility_overridden)
    std::cout << "WARNING: admissibility violated, solve forced by override\n";
  {
    std::ofstream f(root / "field.csv");
    graph::write_field_csv(f, u);
  }
  {
    std::string hist;
    for (double r : rep.residual_history) hist += fmt(r) + "\n";
    write_text((root / "residual_history.txt").string(), hist);
  }
  for (auto which : {graph::BarrierKind::u_plus, graph::BarrierKind::u_minus}) {
    auto [b, brep] = graph::barrier_field(opt.metric, mesh, omega, which,
                                          opt.truncation, opt.solver);
    std::ofstream f(root / (which == graph::BarrierKind::u_plus ? "barrier_plus.csv"
                                                                : "barrier_minus.csv"));
    graph::write_field_csv(f, b);
    if (!brep.converged) std::cout << "WARNING: barrier solve did not converge\n";
  }
  std::cout << "converged: " << (rep.converged ? "yes" : "no")
            << " iterations: " << rep.iterations << " residual: " << rep.residual
            << "\n";
  return rep.converged ? 0 : kExitSolver;
}

void append_diagnostics(std::string& row, const ekt::MetricSpec& spec,
                        const annulus::TriMesh& mesh) {
  analysis::CurvatureField cf = analysis::second_form(spec, mesh);
  analysis::StabilityReport st = analysis::jacobi_operator(spec, mesh, &cf);
  double fl = analysis::flux_boundary_loop(spec, mesh, 0) +
              analysis::flux_boundary_loop(spec, mesh, 1);
  analysis::TangencyReport th =
      analysis::tangency_count(spec, mesh, analysis::HorizontalFoliation{});
  row += "," + fmt(cf.sup_absA) + "," + fmt(st.lambda1) + "," + fmt(fl) + "," +
         std::to_string(th.count);
}

int cmd_minimize_annulus(const Options& opt) {
  auto [g1, g2] = domain_geodesics(opt.domain);
  hyp2::QuadDomain omega = hyp2::build_quad(g1, g2, opt.domain.t1, opt.domain.t2);
  annulus::BoundaryCurve c1 = annulus::build_boundary(g1, omega.side[0], opt.n, opt.rho,
                                                      opt.curve_samples, 1);
  annulus::BoundaryCurve c2 = annulus::build_boundary(g2, omega.side[2], opt.n, opt.rho,
                                                      opt.curve_samples, 2);
  annulus::AnnulusBuildOptions bo;
  bo.ns = opt.mesh_ns;
  bo.nt = opt.mesh_nt;
  bo.nz = opt.mesh_nz;
  bo.rings = opt.rings;
  annulus::AnnulusStyle style = opt.style == "tube" ? annulus::AnnulusStyle::tube
                                                    : annulus::AnnulusStyle::comparison;
  annulus::TriMesh mesh = annulus::build_initial_annulus(c1, c2, omega, style, bo);

  annulus::MinimizeOptions mo;
  mo.tolerance_scale = opt.tol;
  mo.max_iterations = opt.max_iter;
  mo.curve0 = &c1;
  mo.curve1 = &c2;
  annulus::MinimizeReport rep = annulus::minimize_area(opt.metric, mesh, mo);

  fs::path root = out_root(opt);
  fs::create_directories(root);
  annulus::save_trimesh((root / "annulus_mesh.txt").string(), mesh);
  {
    analysis::CurvatureField cf = analysis::second_form(opt.metric, mesh);
    std::ofstream f(root / "annulus_vertices.csv");
    annulus::write_vertex_csv(f, mesh, &cf.absA, &cf.H);
  }
  std::cout << "status: " << annulus::to_string(rep.status) << " area: " << rep.area
            << " iterations: " << rep.iterations << " grad: " << rep.gradient_norm
            << " neck: " << rep.neck_width << "\n";
  if (rep.status == annulus::MinimizeStatus::degenerated) return kExitDegenerated;
  return 0;
}

int cmd_sweep(const Options& opt) {
  auto [g1, g2] = domain_geodesics(opt.domain);
  hyp2::QuadDomain omega = hyp2::build_quad(g1, g2, opt.domain.t1, opt.domain.t2);
  annulus::SweepOptions so;
  so.rho = opt.rho;
  so.curve_samples = opt.curve_samples;
  so.build.ns = opt.mesh_ns;
  so.build.nt = opt.mesh_nt;
  so.build.nz = opt.mesh_nz;
  so.minimize.tolerance_scale = opt.tol;
  so.minimize.max_iterations = opt.max_iter;

  std::vector<double> ns = opt.n_list;
  if (ns.empty()) ns = {opt.n};
  std::vector<annulus::TriMesh> meshes;
  auto records = annulus::sweep_n(opt.metric, omega, ns, so, &meshes);

  fs::path root = out_root(opt);
  fs::create_directories(root);
  std::string csv = "n,status,area,h_plus,h_minus,neck_width,absA_sup,lambda1,flux_sum,"
                    "tangency_h,error\n";
  for (size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    std::string row = fmt(r.n);
    row += std::string(",") + annulus::to_string(r.status) + "," + fmt(r.area) + "," +
           fmt(r.h_plus) + "," + fmt(r.h_minus) + "," + fmt(r.neck_width);
    if (r.error.empty() && meshes[i].num_vertices() > 0) {
      try {
        append_diagnostics(row, opt.metric, meshes[i]);
      } catch (const std::exception& e) {
        row += ",,,,";
      }
      char name[64];
      std::snprintf(name, sizeof(name), "annulus_n%g.txt", r.n);
      annulus::save_trimesh((root / name).string(), meshes[i]);
    } else {
      row += ",,,,";
    }
    row += "," + r.error;
    csv += row + "\n";
  }
  write_text((root / "sweep.csv").string(), csv);
  std::cout << csv;
  return 0;
}

int cmd_export(const std::string& input, const std::string& format,
               const std::string& output, const ekt::MetricSpec& spec) {
  annulus::TriMesh mesh = annulus::load_trimesh(input);
  if (format == "mesh") {
    annulus::save_trimesh(output, mesh);
  } else if (format == "csv") {
    analysis::CurvatureField cf = analysis::second_form(spec, mesh);
    std::ofstream f(output);
    if (!f) throw config_error("cannot open output file " + output);
    annulus::write_vertex_csv(f, mesh, &cf.absA, &cf.H);
  } else {
    throw config_error("unknown export format '" + format + "' (mesh|csv)");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"minimal-surface laboratory for the cylinder model of E(kappa,tau)"};
  app.set_config("--config", "", "structured text run configuration");
  app.allow_config_extras(CLI::config_extras_mode::error);

  Options opt;
  app.add_option("--kappa", opt.metric.kappa, "base curvature (< 0)");
  app.add_option("--tau", opt.metric.tau, "bundle curvature");
  app.add_option("--dist", opt.domain.dist, "distance of the symmetric geodesic pair");
  app.add_option("--g1", opt.domain.g1_ideal, "ideal angles of gamma1-hat")->expected(2);
  app.add_option("--g2", opt.domain.g2_ideal, "ideal angles of gamma2-hat")->expected(2);
  app.add_option("--t1", opt.domain.t1, "half-length of gamma1");
  app.add_option("--t2", opt.domain.t2, "half-length of gamma2");
  app.add_flag("--ideal", opt.domain.ideal, "classify the ideal quadrilateral");
  app.add_option("--data-gamma1", opt.data[0], "boundary datum (+inf|-inf|number)");
  app.add_option("--data-eta1", opt.data[1], "boundary datum");
  app.add_option("--data-gamma2", opt.data[2], "boundary datum");
  app.add_option("--data-eta2", opt.data[3], "boundary datum");
  app.add_option("--truncation", opt.truncation, "truncation level M for infinite data");
  app.add_option("--solver-tol", opt.solver.tolerance, "Newton residual tolerance");
  app.add_option("--solver-max-iter", opt.solver.max_newton_iterations, "");
  app.add_option("--solver-damping", opt.solver.damping, "Armijo slope factor");
  app.add_flag("--override-admissibility", opt.solver.override_admissibility, "");
  app.add_option("--mesh-ns", opt.mesh_ns, "domain mesh resolution along gamma");
  app.add_option("--mesh-nt", opt.mesh_nt, "domain mesh resolution across");
  app.add_option("--mesh-nz", opt.mesh_nz, "strip resolution in z");
  app.add_option("--rings", opt.rings, "tube loft cross sections");
  app.add_option("--curve-samples", opt.curve_samples, "boundary curve samples");
  app.add_option("--n", opt.n, "slab half-height");
  app.add_option("--rho", opt.rho, "corner rounding radius");
  app.add_option("--tol", opt.tol, "optimizer gradient tolerance scale");
  app.add_option("--max-iter", opt.max_iter, "optimizer iteration cap");
  app.add_option("--style", opt.style, "initial annulus style (comparison|tube)");
  app.add_option("--sweep-n", opt.n_list, "list of n values for the sweep");
  app.add_option("--out", opt.outdir, "output directory (default $EKTLAB_OUTDIR)");
  app.add_option("--seed", opt.seed, "run seed recorded for reproducibility");

  auto* c_check = app.add_subcommand("check-domain", "threshold, admissibility, Douglas");
  auto* c_graph = app.add_subcommand("solve-graph", "minimal graph Dirichlet solve");
  auto* c_min = app.add_subcommand("minimize-annulus", "fixed-boundary area minimization");
  auto* c_sweep = app.add_subcommand("sweep", "annulus family sweep over n");
  auto* c_export = app.add_subcommand("export", "re-export a mesh file");
  std::string exp_in, exp_fmt = "mesh", exp_out;
  c_export->add_option("input", exp_in, "mesh file")->required();
  c_export->add_option("--format", exp_fmt, "mesh|csv");
  c_export->add_option("--output", exp_out, "output file")->required();
  app.require_subcommand(1);

  try {
    app.parse(argc, argv);
    if (c_check->parsed()) return cmd_check_domain(opt);
    if (c_graph->parsed()) return cmd_solve_graph(opt);
    if (c_min->parsed()) return cmd_minimize_annulus(opt);
    if (c_sweep->parsed()) return cmd_sweep(opt);
    if (c_export->parsed()) return cmd_export(exp_in, exp_fmt, exp_out, opt.metric);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const geometry_error& e) {
    std::cerr << "geometry error: " << e.what() << "\n";
    return kExitGeometry;
  } catch (const degeneration_error& e) {
    std::cerr << "degenerated: " << e.what() << "\n";
    return kExitDegenerated;
  } catch (const std::exception& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kExitSolver;
  }
  return 0;
}

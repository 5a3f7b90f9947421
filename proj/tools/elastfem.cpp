#include "elastfem/assembly.hpp"
#include "elastfem/error.hpp"
#include "elastfem/harness.hpp"
#include "elastfem/mesh.hpp"
#include "elastfem/solver.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

namespace {

using namespace elastfem;

int run_mesh(const std::string& kind, int n, const std::string& out) {
  nlohmann::json j;
  if (kind == "prism") {
    const PrismMesh m = build_prism_mesh(n);
    std::printf("prism mesh n=%d: %zu cells, %zu vertices, %zu side faces, %zu horizontal faces\n", n,
                m.num_cells(), m.num_vertices(), m.num_side_faces(), m.num_horizontal_faces());
    if (!out.empty()) j = to_json(m);
  } else if (kind == "tet") {
    const TetMesh m = build_tet_mesh(n);
    std::printf("tet mesh n=%d: %zu cells, %zu vertices, %zu faces\n", n, m.num_cells(), m.num_vertices(),
                m.num_faces());
    if (!out.empty()) j = to_json(m);
  } else {
    const TriMesh2D m = build_tri_mesh(n);
    std::printf("tri mesh n=%d: %zu cells, %zu vertices, %zu edges\n", n, m.num_cells(), m.num_vertices(),
                m.num_edges());
    if (!out.empty()) j = to_json(m);
  }
  if (!out.empty()) {
    std::ofstream f(out);
    if (!f) throw Error("cannot open " + out);
    f << j.dump(1) << "\n";
  }
  return 0;
}

int run_verify(const std::string& element, double tol) {
  const Certificate c = verify_element(parse_element_kind(element), tol);
  std::cout << c.to_text();
  return c.pass() ? 0 : 1;
}

int run_converge(const std::string& element, int levels, const std::string& out, const std::string& dump,
                 double penalty) {
  ConvergenceOptions opt;
  opt.dump_prefix = dump;
  opt.solver.penalty = penalty;
  bool ok = true;
  opt.progress = [&](const ConvergenceRow& r) {
    std::fprintf(stderr, "level %d: n_sigma=%d n_u=%d residual=%.2e energy=%.2e cg=%d %.2fs\n", r.level,
                 r.n_sigma, r.n_u, r.residual, r.energy_defect, r.cg_iterations, r.seconds);
    if (!(r.residual <= opt.solver.tol) || !(r.energy_defect <= 1e-9)) ok = false;
  };
  const auto kind = parse_element_kind(element);
  const auto rows = convergence_study(kind, levels, opt);
  if (static_cast<int>(rows.size()) != levels) ok = false;
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (rows[i].err_sigma > rows[i - 1].err_sigma || rows[i].err_u > rows[i - 1].err_u ||
        rows[i].err_div > rows[i - 1].err_div)
      ok = false;
  const std::string csv = convergence_csv(rows);
  std::cout << csv;
  if (!out.empty()) {
    std::ofstream f(out);
    if (!f) throw Error("cannot open " + out);
    f << csv;
  }
  return ok ? 0 : 1;
}

int run_infsup(const std::string& element, int levels) {
  if (levels < 1 || levels > kMaxLevels) throw Error("levels must lie in [1, 5]");
  const auto kind = parse_element_kind(element);
  const ManufacturedCase mc = manufactured_case(kind == ElementKind::TriNC ? 2 : 3);
  AssemblyOptions ao;
  ao.frobenius_mass = true;
  std::cout << "level,n_u,beta,eig_residual,iterations\n";
  bool ok = true;
  double beta1 = 0.0;
  for (int level = 1; level <= levels; ++level) {
    const Discretization d = Discretization::make(kind, level_to_n(level));
    const SaddleSystem s = assemble(d, mc.material, nullptr, ao);
    const InfSupResult r = infsup_constant(s);
    std::printf("%d,%d,%.8f,%.2e,%d\n", level, s.n_u, r.beta, r.residual, r.iterations);
    std::fflush(stdout);
    if (level == 1) beta1 = r.beta;
    if (!(r.beta > 0.0) || r.beta < 0.5 * beta1) ok = false;
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"elastfem: mixed finite elements for linear elasticity"};
  app.require_subcommand(1);

  std::string kind = "prism", out, dump, element = "prism";
  int n = 1, levels = 3;
  double tol = 1e-10, penalty = 1e3;
  const std::vector<std::string> kinds{"prism", "tet", "tri"};

  auto* mesh = app.add_subcommand("mesh", "build a structured mesh and print its entity counts");
  mesh->add_option("--kind", kind, "mesh kind")->check(CLI::IsMember(kinds))->required();
  mesh->add_option("--n", n, "subdivisions per axis")->check(CLI::Range(1, 64))->required();
  mesh->add_option("--out", out, "write the mesh as JSON");

  auto* verify = app.add_subcommand("verify", "element certificate");
  verify->add_option("--element", element, "element")->check(CLI::IsMember(kinds))->required();
  verify->add_option("--tol", tol, "tolerance for residual checks");

  auto* converge = app.add_subcommand("converge", "manufactured-solution convergence table");
  converge->add_option("--element", element, "element")->check(CLI::IsMember(kinds))->required();
  converge->add_option("--levels", levels, "number of levels")->check(CLI::Range(1, kMaxLevels));
  converge->add_option("--out", out, "write the CSV table");
  converge->add_option("--dump-system", dump, "Matrix Market prefix for the assembled systems");
  converge->add_option("--penalty", penalty, "augmented Lagrangian parameter")->check(CLI::PositiveNumber);

  auto* infsup = app.add_subcommand("infsup", "discrete inf-sup constant per level");
  infsup->add_option("--element", element, "element")->check(CLI::IsMember(kinds));
  infsup->add_option("--levels", levels, "number of levels")->check(CLI::Range(1, kMaxLevels));

  CLI11_PARSE(app, argc, argv);
  try {
    if (*mesh) return run_mesh(kind, n, out);
    if (*verify) return run_verify(element, tol);
    if (*converge) return run_converge(element, levels, out, dump, penalty);
    if (*infsup) return run_infsup(element, levels);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}

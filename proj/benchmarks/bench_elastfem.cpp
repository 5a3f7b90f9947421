#include "elastfem/assembly.hpp"
#include "elastfem/harness.hpp"
#include "elastfem/solver.hpp"

#include <benchmark/benchmark.h>

using namespace elastfem;

namespace {

ElementBasis reference_basis(ElementKind k) {
  switch (k) {
    case ElementKind::Prism: return prism_element(reference_prism_cell());
    case ElementKind::TetNC: return tet_nc_element(reference_tet_cell());
    case ElementKind::TriNC: return tri_nc_element(reference_triangle_cell());
  }
  return {};
}

void BM_ElementBasis(benchmark::State& state) {
  const auto k = static_cast<ElementKind>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(reference_basis(k));
  state.SetLabel(to_string(k));
}
BENCHMARK(BM_ElementBasis)->DenseRange(0, 2)->Unit(benchmark::kMicrosecond);

void BM_LocalMatrices(benchmark::State& state) {
  const auto k = static_cast<ElementKind>(state.range(0));
  const ElementBasis b = reference_basis(k);
  const ManufacturedCase mc = manufactured_case(k == ElementKind::TriNC ? 2 : 3);
  const VectorFunction f = mc.load();
  for (auto _ : state) benchmark::DoNotOptimize(local_matrices(b, mc.material, &f));
  state.SetLabel(to_string(k));
}
BENCHMARK(BM_LocalMatrices)->DenseRange(0, 2)->Unit(benchmark::kMicrosecond);

void BM_Assemble(benchmark::State& state) {
  const auto k = static_cast<ElementKind>(state.range(0));
  const int n = static_cast<int>(state.range(1));
  const Discretization d = Discretization::make(k, n);
  const ManufacturedCase mc = manufactured_case(d.dim());
  const VectorFunction f = mc.load();
  for (auto _ : state) benchmark::DoNotOptimize(assemble(d, mc.material, f));
  state.SetLabel(to_string(k) + " n=" + std::to_string(n));
}
BENCHMARK(BM_Assemble)->Args({0, 2})->Args({1, 2})->Args({2, 8})->Unit(benchmark::kMillisecond);

void BM_Solve(benchmark::State& state) {
  const auto k = static_cast<ElementKind>(state.range(0));
  const int n = static_cast<int>(state.range(1));
  const Discretization d = Discretization::make(k, n);
  const ManufacturedCase mc = manufactured_case(d.dim());
  const SaddleSystem s = assemble(d, mc.material, mc.load());
  for (auto _ : state) benchmark::DoNotOptimize(solve_saddle(s));
  state.counters["dofs"] = s.n_sigma + s.n_u;
  state.SetLabel(to_string(k) + " n=" + std::to_string(n));
}
BENCHMARK(BM_Solve)->Args({0, 2})->Args({1, 2})->Args({2, 8})->Unit(benchmark::kMillisecond);

void BM_InfSup(benchmark::State& state) {
  AssemblyOptions ao;
  ao.frobenius_mass = true;
  const SaddleSystem s = assemble(Discretization::make(ElementKind::Prism, 2), Material{}, nullptr, ao);
  for (auto _ : state) benchmark::DoNotOptimize(infsup_constant(s));
}
BENCHMARK(BM_InfSup)->Unit(benchmark::kMillisecond);

void BM_ErrorNorms(benchmark::State& state) {
  const Discretization d = Discretization::make(ElementKind::TetNC, 2);
  const ManufacturedCase mc = manufactured_case(3);
  const SolveResult r = solve_saddle(assemble(d, mc.material, mc.load()));
  for (auto _ : state) benchmark::DoNotOptimize(error_norms(d, r.sigma, r.u, mc));
}
BENCHMARK(BM_ErrorNorms)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

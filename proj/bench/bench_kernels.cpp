// Serial reference vs OpenMP timings of the data-parallel kernels.
//   bench_kernels [reps]

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>

#include "g2lab/mclean.hpp"
#include "g2lab/spectral.hpp"

using namespace g2lab;

namespace {

double best_of(int reps, const std::function<void()>& f) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

SpinorGrid random_field(const ThinCylinderGrid& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  auto V = SpinorGrid::zeros(g);
  for (auto* f : {&V.u, &V.v})
    for (auto& z : *f) z = cplx(n(rng), n(rng));
  V.project(BoundaryClass::Minus);
  return V;
}

volatile double sink;

void row(const char* name, int reps, const std::function<void(Exec)>& f) {
  const double s = best_of(reps, [&] { f(Exec::Serial); });
  const double p = best_of(reps, [&] { f(Exec::Parallel); });
  std::printf("%-28s %12.4f %12.4f %9.2fx\n", name, s * 1e3, p * 1e3, s / p);
}

}  // namespace

int main(int argc, char** argv) {
  const int reps = argc > 1 ? std::max(1, std::atoi(argv[1])) : 5;
  std::printf("threads %d, best of %d\n", omp_get_max_threads(), reps);
  std::printf("%-28s %12s %12s %10s\n", "kernel", "serial ms", "parallel ms", "speedup");

  const ThinCylinderGrid g{0.1, 128, 32, 32};
  const auto warp = WarpProfile::sample(WarpSpec::cosine(1.0, 0.5, 2.0), g.N2, g.N3);
  const DiscreteOperator D(g, {0.5, 0.5}, warp);
  const auto V = random_field(g, 1);
  row("apply M=128 N=32", reps, [&](Exec e) { sink = D.apply(V, e).u[0].real(); });
  row("apply_adjoint M=128 N=32", reps, [&](Exec e) { sink = D.apply_adjoint(V, e).u[0].real(); });

  const ThinCylinderGrid gs{0.1, 16, 16, 16};
  const auto Vs = random_field(gs, 2);
  const auto ws = WarpProfile::sample(WarpSpec::cosine(1.0, 0.5, 2.0), gs.N2, gs.N3);
  HolderOptions ho;
  ho.all_pairs_limit = 1u << 13;
  row("holder all pairs (4352 pts)", reps, [&](Exec e) { sink = discrete_norms(Vs, ws, ho, e).holder_full; });
  row("holder sampled (2^21 pairs)", reps, [&](Exec e) { sink = discrete_norms(V, warp, {}, e).holder_full; });

  const auto nf = NormalField::band_limited(24, 4, 3, 0.5);
  row("tau pullback n=24", reps, [&](Exec e) { sink = pullback_tau_graph(nf, 0.01, e)[0].c[0]; });
  row("fd linearization n=24", reps, [&](Exec e) { sink = fd_linearization(nf, {1e-2, 5e-3}, e).values[0].c[0]; });

  ScalingConfig sc;
  sc.epsilons = {0.4, 0.2, 0.1, 0.05};
  sc.grid.M = 16;
  row("scaling experiment 4 cells", 1, [&](Exec e) { sink = inverse_scaling_experiment(sc, e).fitted_exponent; });
  return 0;
}

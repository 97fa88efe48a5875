#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "g2lab/error.hpp"
#include "g2lab/spectral.hpp"

namespace g2lab {

namespace {

double periodic_gap(int d, int n) {
  const int k = std::min(std::abs(d), n - std::abs(d));
  return 2.0 * std::numbers::pi * k / n;
}

struct HolderKernel {
  const ThinCylinderGrid& g;
  const std::vector<double>& h;
  const std::vector<cplx>& u;
  const std::vector<cplx>& v;
  double half_alpha;

  double operator()(std::size_t p, std::size_t q) const {
    const int S = g.slice();
    const int jp = static_cast<int>(p / S), zp = static_cast<int>(p % S);
    const int jq = static_cast<int>(q / S), zq = static_cast<int>(q % S);
    const double dt2 = std::pow(periodic_gap(zp / g.N3 - zq / g.N3, g.N2), 2) +
                       std::pow(periodic_gap(zp % g.N3 - zq % g.N3, g.N3), 2);
    const double dx = (jp - jq) * g.dx();
    const double d2 = 0.5 * (h[zp] + h[zq]) * dx * dx + dt2;
    const double diff2 = std::norm(u[p] - u[q]) + std::norm(v[p] - v[q]);
    return std::sqrt(diff2) / std::pow(d2, half_alpha);
  }
};

}  // namespace

DiscreteNorms discrete_norms(const SpinorGrid& V, const WarpProfile& warp, const HolderOptions& opt, Exec exec) {
  validate_holder_parameters(opt.p, opt.alpha);
  const auto& g = V.grid;
  require(warp.N2 == g.N2 && warp.N3 == g.N3, "discrete_norms: warp grid mismatch");
  const int S = g.slice(), J = g.M + 1;
  const std::size_t P = g.points();

  DiscreteNorms n;
  n.p = opt.p;
  n.alpha = opt.alpha;
  double lp = 0.0;
  for (int j = 0; j < J; ++j)
    for (int z = 0; z < S; ++z) {
      const std::size_t i = static_cast<std::size_t>(j) * S + z;
      const double m = std::sqrt(std::norm(V.u[i]) + std::norm(V.v[i]));
      n.sup = std::max(n.sup, m);
      lp += g.trap(j) * g.area_element() * std::sqrt(warp.h[z]) * std::pow(m, opt.p);
    }
  n.lp = std::pow(lp, 1.0 / opt.p);
  n.l2_weighted = std::sqrt(std::max(0.0, weighted_inner(V, V, warp).real()));

  const HolderKernel k{g, warp.h, V.u, V.v, 0.5 * opt.alpha};
  double hx = 0.0, hz = 0.0;
#pragma omp parallel for schedule(static) reduction(max : hx) if (exec == Exec::Parallel)
  for (int z = 0; z < S; ++z)
    for (int j = 0; j < J; ++j)
      for (int l = j + 1; l < J; ++l)
        hx = std::max(hx, k(static_cast<std::size_t>(j) * S + z, static_cast<std::size_t>(l) * S + z));
#pragma omp parallel for schedule(static) reduction(max : hz) if (exec == Exec::Parallel)
  for (int j = 0; j < J; ++j)
    for (int z = 0; z < S; ++z)
      for (int y = z + 1; y < S; ++y)
        hz = std::max(hz, k(static_cast<std::size_t>(j) * S + z, static_cast<std::size_t>(j) * S + y));
  n.holder_x = hx;
  n.holder_z = hz;

  double full = std::max(hx, hz);
  if (P <= opt.all_pairs_limit) {
    const long long NP = static_cast<long long>(P);
#pragma omp parallel for schedule(dynamic, 16) reduction(max : full) if (exec == Exec::Parallel)
    for (long long p = 0; p < NP; ++p)
      for (long long q = p + 1; q < NP; ++q)
        full = std::max(full, k(static_cast<std::size_t>(p), static_cast<std::size_t>(q)));
    n.pairs = P * (P - 1) / 2;
  } else {
    n.subsampled = true;
    std::mt19937_64 rng(opt.seed);
    std::uniform_int_distribution<std::size_t> pick(0, P - 1);
    std::vector<std::pair<std::size_t, std::size_t>> pairs(opt.sample_pairs);
    for (auto& pr : pairs) pr = {pick(rng), pick(rng)};
    const long long NS = static_cast<long long>(pairs.size());
#pragma omp parallel for schedule(static) reduction(max : full) if (exec == Exec::Parallel)
    for (long long i = 0; i < NS; ++i)
      if (pairs[i].first != pairs[i].second) full = std::max(full, k(pairs[i].first, pairs[i].second));
    n.pairs = pairs.size();
  }
  n.holder_full = full;
  return n;
}

}  // namespace g2lab

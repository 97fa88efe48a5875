#include <omp.h>

#include "doctest.h"
#include "g2lab/mclean.hpp"
#include "g2lab/spectral.hpp"
#include "gen.hpp"

using namespace g2lab;

namespace {

struct Threads {
  int saved = omp_get_max_threads();
  explicit Threads(int n) { omp_set_num_threads(n); }
  ~Threads() { omp_set_num_threads(saved); }
};

bool same(const SpinorGrid& a, const SpinorGrid& b) { return a.u == b.u && a.v == b.v; }

bool same(const std::vector<ImOcton>& a, const std::vector<ImOcton>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].c != b[i].c) return false;
  return true;
}

}  // namespace

TEST_CASE("operator kernels are bitwise identical across execution modes") {
  Threads t(4);
  for (const char* h : {"const:1", "cos:1,0.4,2"}) {
    CAPTURE(h);
    const ThinCylinderGrid g{0.2, 24, 16, 8};
    const auto warp = WarpProfile::sample(WarpSpec::parse(h), g.N2, g.N3);
    for (auto st : {X1Stencil::SummationByParts, X1Stencil::OneSidedSecondOrder}) {
      const DiscreteOperator D(g, {0.3, 0.7}, warp, BoundaryClass::Minus, st);
      const auto V = gen::smooth_field(g, 11);
      CHECK(same(D.apply(V, Exec::Serial), D.apply(V, Exec::Parallel)));
      CHECK(same(D.apply_adjoint(V, Exec::Serial), D.apply_adjoint(V, Exec::Parallel)));
      CHECK(same(D.system_apply(V, Exec::Serial), D.system_apply(V, Exec::Parallel)));
      auto a = V.u, b = V.u;
      D.to_modes(a, Exec::Serial);
      D.to_modes(b, Exec::Parallel);
      CHECK(a == b);
      D.apply_symbol(a, true, Exec::Serial);
      D.apply_symbol(b, true, Exec::Parallel);
      CHECK(a == b);
      D.from_modes(a, Exec::Serial);
      D.from_modes(b, Exec::Parallel);
      CHECK(a == b);
    }
  }
}

TEST_CASE("discrete norms are bitwise identical across execution modes") {
  Threads t(4);
  const ThinCylinderGrid g{0.1, 16, 8, 8};
  const auto warp = WarpProfile::sample(WarpSpec::parse("cos:1,0.3"), g.N2, g.N3);
  const auto V = gen::smooth_field(g, 5);
  HolderOptions all;
  HolderOptions sampled;
  sampled.all_pairs_limit = 256;
  sampled.sample_pairs = 1 << 14;
  for (const auto& opt : {all, sampled}) {
    const auto s = discrete_norms(V, warp, opt, Exec::Serial);
    const auto p = discrete_norms(V, warp, opt, Exec::Parallel);
    CHECK(s.subsampled == p.subsampled);
    CHECK(s.sup == p.sup);
    CHECK(s.l2_weighted == p.l2_weighted);
    CHECK(s.lp == p.lp);
    CHECK(s.holder_x == p.holder_x);
    CHECK(s.holder_z == p.holder_z);
    CHECK(s.holder_full == p.holder_full);
  }
}

TEST_CASE("pullback and linearization are bitwise identical across execution modes") {
  Threads t(4);
  const auto v = NormalField::band_limited(8, 3, 9, 0.5);
  CHECK(same(pullback_tau_graph(v, 0.3, Exec::Serial), pullback_tau_graph(v, 0.3, Exec::Parallel)));
  CHECK(same(twisted_dirac_flat(v, Exec::Serial), twisted_dirac_flat(v, Exec::Parallel)));
  CHECK(same(twisted_dirac_cross_form(v, Exec::Serial), twisted_dirac_cross_form(v, Exec::Parallel)));
  const auto a = fd_linearization(v, {1e-2, 5e-3}, Exec::Serial);
  const auto b = fd_linearization(v, {1e-2, 5e-3}, Exec::Parallel);
  CHECK(same(a.values, b.values));
  CHECK(a.observed_order == b.observed_order);
}

TEST_CASE("scaling experiment is identical across execution modes and thread counts") {
  ScalingConfig c;
  c.epsilons = {0.4, 0.2, 0.1};
  c.grid.M = 16;
  c.warp = WarpSpec::parse("cos:1,0.3");
  const auto s = inverse_scaling_experiment(c, Exec::Serial);
  for (int n : {1, 3}) {
    Threads t(n);
    const auto p = inverse_scaling_experiment(c, Exec::Parallel);
    CHECK(s.inverse_sup_norms == p.inverse_sup_norms);
    CHECK(s.inverse_holder_norms == p.inverse_holder_norms);
    CHECK(s.sigma_mins == p.sigma_mins);
    CHECK(s.fitted_exponent == p.fitted_exponent);
  }
}

#include <cmath>

#include "doctest.h"
#include "g2lab/calibration.hpp"
#include "g2lab/error.hpp"
#include "gen.hpp"

using namespace g2lab;

namespace {
ImOcton e(int i) { return ImOcton::basis(i); }

double maxdiff(const ImOcton& a, const ImOcton& b) {
  double m = 0;
  for (int i = 0; i < 7; ++i) m = std::max(m, std::abs(a.c[i] - b.c[i]));
  return m;
}

Frame random_cd_frame() {
  const auto w1 = gen::unit_octon();
  const auto w2 = gen::unit_orthogonal(w1);
  const auto w3 = cross(w1, w2);
  const auto w4 = gen::unit_orthogonal(w1, w2, w3);
  return cayley_dickson_frame(w1, w2, w4);
}
}  // namespace

TEST_CASE("associative residual") {
  auto r = associative_residual(Frame::standard({1, 2, 3}));
  CHECK(r.norm == 0.0);
  r = associative_residual(Frame::standard({1, 4, 5}));
  CHECK(r.norm == 0.0);
  r = associative_residual(Frame::standard({1, 2, 4}));
  CHECK(r.norm == 1.0);
  CHECK(maxdiff(r.tau, e(7)) == 0.0);
  CHECK_THROWS_AS(associative_residual(Frame({e(1), e(1) + e(2), e(3)})), PreconditionError);
}

TEST_CASE("pairs with their cross product span associative planes") {
  for (int n = 0; n < 1000; ++n) {
    const auto a = gen::unit_octon();
    const auto b = gen::unit_orthogonal(a);
    CHECK(associative_residual(Frame({a, b, cross(a, b)})).norm < 1e-10);
  }
}

TEST_CASE("coassociative residual") {
  CHECK(coassociative_residual(Frame::standard({4, 5, 6, 7})) == 0.0);
  CHECK(coassociative_residual(Frame::standard({1, 2, 3, 4})) == 1.0);
  const auto& G = g2_signed_permutations();
  // The signed permutations preserving Omega form a group of order 1344 = 8 * 168.
  CHECK(G.size() == 1344);
  const Frame h = Frame::standard({4, 5, 6, 7});
  std::mt19937_64 r(7);
  for (int n = 0; n < 50; ++n) {
    std::vector<ImOcton> v = h.vectors;
    for (int step = 0; step < 3; ++step) {
      const auto& g = G[r() % G.size()];
      for (auto& x : v) x = g.apply(x);
    }
    CHECK(coassociative_residual(Frame(v)) == 0.0);
  }
}

TEST_CASE("cayley-dickson frame") {
  const Frame std7 = cayley_dickson_frame(e(1), e(2), e(4));
  for (int i = 1; i <= 7; ++i) CHECK(maxdiff(std7[i - 1], e(i)) == 0.0);
  CHECK(structure_constant_residual(std7) == 0.0);
  for (int n = 0; n < 200; ++n) {
    const Frame f = random_cd_frame();
    CHECK(f.orthonormal(1e-12));
    CHECK(structure_constant_residual(f) < 1e-10);
  }
  CHECK_THROWS_AS(cayley_dickson_frame(e(1), e(2), (e(3) + e(4)) * std::sqrt(0.5)), PreconditionError);
}

TEST_CASE("almost-instanton map") {
  const auto at0 = almost_instanton_map({0, 0, 0, 0});
  CHECK(norm(at0.normal) == 0.0);
  CHECK(at0.sigma_min >= 0.5);
  // First-order pattern under this basis: t4 e7 - t5 e6 + t6 e5 - t7 e4.
  Eigen::Matrix4d expected;
  expected << 0, 0, 0, -1,
              0, 0, 1, 0,
              0, -1, 0, 0,
              1, 0, 0, 0;
  CHECK((at0.jacobian - expected).cwiseAbs().maxCoeff() < 1e-9);

  const auto one = almost_instanton_map({0, 0.1, 0, 0});
  CHECK(std::abs(one.normal(6) + 0.1 / std::sqrt(1.01)) < 1e-14);
  double others = 0;
  for (int i = 1; i <= 7; ++i)
    if (i != 6) others = std::max(others, std::abs(one.normal(i)));
  CHECK(others < 1e-14);

  const auto half = almost_instanton_map({0, 0, 0, 0}, 0.5e-5);
  CHECK(std::abs(half.sigma_min - at0.sigma_min) < 1e-8);
}

TEST_CASE("J_n") {
  CHECK(maxdiff(jn_apply(e(1), e(4)), e(5)) == 0.0);
  CHECK(maxdiff(jn_apply(e(1), e(6)), -e(7)) == 0.0);
  CHECK_THROWS_AS(jn_apply(ImOcton{}, e(4)), PreconditionError);
  for (int n = 0; n < 1000; ++n) {
    const auto f = random_cd_frame();
    const auto nrm = f[0];
    ImOcton u;
    for (int k = 3; k < 7; ++k) u += gen::gauss() * f[k];
    CHECK(maxdiff(jn_apply(nrm, jn_apply(nrm, u)), -u) < 1e-10);
    CHECK(maxdiff(jn_apply(2.5 * nrm, u), jn_apply(nrm, u)) < 1e-12);
  }
}

TEST_CASE("eta from normal") {
  const Frame c = Frame::standard({4, 5, 6, 7});
  const SelfDualForm eta = eta_from_normal(e(1), c);
  // eta0 = W4* ^ W5* - W6* ^ W7* on the pairs (01,02,03,12,13,23).
  const std::array<double, 6> expected{1, 0, 0, 0, 0, -1};
  for (int p = 0; p < 6; ++p) CHECK(eta.coeff[p] == expected[p]);
  CHECK(std::abs(eta.norm() - std::sqrt(2.0)) < 1e-15);
  CHECK(eta.orientation == -1);
  CHECK(eta.self_duality_residual() <= 1e-12);
  CHECK(eta.wedge_square() * eta.orientation == doctest::Approx(eta.norm() * eta.norm()));
  CHECK(hermitian_compat_residual(e(1), c) < 1e-15);
  // The unit-norm rescaling differs from g(J_n u, v) by 1/sqrt(2).
  CHECK(std::abs(eta(0, 1) / eta.norm() - dot(jn_apply(e(1), e(4)), e(5)) / std::sqrt(2.0)) < 1e-15);
  CHECK_THROWS_AS(eta_from_normal(e(4), Frame::standard({1, 2, 3, 5})), PreconditionError);

  for (int n = 0; n < 200; ++n) {
    const auto f = random_cd_frame();
    const Frame cf({f[3], f[4], f[5], f[6]});
    const auto en = eta_from_normal(f[0], cf);
    CHECK(en.self_duality_residual() < 1e-12);
    CHECK(hermitian_compat_residual(f[0], cf) < 1e-12);
  }
}

TEST_CASE("j-holomorphic residual") {
  CHECK(j_holomorphic_residual(Frame::standard({4, 5}), e(1)) == 0.0);
  CHECK(std::abs(j_holomorphic_residual(Frame::standard({4, 6}), e(1)) - std::sqrt(2.0)) < 1e-15);
  for (int n = 0; n < 100; ++n) {
    const auto f = random_cd_frame();
    ImOcton t1;
    for (int k = 3; k < 7; ++k) t1 += gen::gauss() * f[k];
    t1 *= 1.0 / norm(t1);
    CHECK(j_holomorphic_residual(Frame({t1, jn_apply(f[0], t1)}), f[0]) < 1e-12);
  }
}

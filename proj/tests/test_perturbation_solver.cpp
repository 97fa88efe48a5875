#include <Eigen/Dense>
#include <cmath>

#include "doctest.h"
#include "g2lab/newton.hpp"
#include "gen.hpp"

using namespace g2lab;

namespace {

double absval(double x) { return std::abs(x); }

NewtonConfig scalar_cfg(double A, double B, double kappa, double r) {
  NewtonConfig c;
  c.A = A;
  c.B = B;
  c.kappa = kappa;
  c.r = r;
  return c;
}

// Full Newton with the dense Jacobian of the assembled square system.
SpinorGrid dense_newton_oracle(const DiscreteOperator& D, double gamma, const SpinorGrid& W0) {
  const auto& g = D.grid();
  const Eigen::Index n = 2 * static_cast<Eigen::Index>(g.points());
  Eigen::MatrixXcd S(n, n);
  Eigen::VectorXcd e = Eigen::VectorXcd::Zero(n);
  for (Eigen::Index c = 0; c < n; ++c) {
    e(c) = 1.0;
    S.col(c) = D.system_apply(SpinorGrid::unflatten(g, e)).flatten();
    e(c) = 0.0;
  }
  const Eigen::Index P = n / 2;
  std::vector<bool> reserved(n, false);
  for (int z = 0; z < g.slice(); ++z) {
    reserved[P + z] = true;
    reserved[P + static_cast<Eigen::Index>(g.M) * g.slice() + z] = true;
  }
  const Eigen::VectorXcd w0 = restrict_rows(D, W0).flatten();
  Eigen::VectorXcd x = Eigen::VectorXcd::Zero(n);
  for (int it = 0; it < 30; ++it) {
    Eigen::VectorXcd F = S * x - w0;
    Eigen::MatrixXcd J = S;
    for (Eigen::Index p = 0; p < P; ++p) {
      const cplx u = x(p), v = x(P + p);
      if (!reserved[p]) {
        F(p) += gamma * u * v;
        J(p, p) += gamma * v;
        J(p, P + p) += gamma * u;
      }
      if (!reserved[P + p]) {
        F(P + p) += gamma * u * u;
        J(P + p, p) += 2.0 * gamma * u;
      }
    }
    if (F.cwiseAbs().maxCoeff() < 1e-15) break;
    x -= J.partialPivLu().solve(F);
  }
  return SpinorGrid::unflatten(g, x);
}

SpinorGrid scaled_probe(const ThinCylinderGrid& g, double sup, std::uint64_t seed) {
  SpinorGrid W = gen::smooth_field(g, seed);
  return (sup / W.max_abs()) * W;
}

double max_diff(const SpinorGrid& a, const SpinorGrid& b) { return (a - b).max_abs(); }

}  // namespace

TEST_CASE("linear maps converge in one step") {
  Eigen::Matrix3d L;
  L << 2, 0.5, 0, -0.3, 1.5, 0.2, 0.1, 0, 3;
  const Eigen::Vector3d c(0.01, -0.02, 0.005);
  const auto F = [&](const Eigen::Vector3d& x) -> Eigen::Vector3d { return L * x + c; };
  const auto inv = [&](const Eigen::Vector3d& y) -> Eigen::Vector3d { return L.partialPivLu().solve(y); };
  const auto nrm = [](const Eigen::Vector3d& x) { return x.cwiseAbs().maxCoeff(); };
  const auto A = nrm(inv(c));
  const auto res = quantitative_newton(F, inv, scalar_cfg(A, 2.0, 0.0, 4 * A), Eigen::Vector3d::Zero().eval(), nrm);
  CHECK(res.trace.iterations == 1);
  CHECK(nrm(F(res.x)) <= 1e-15);
}

TEST_CASE("scalar quadratic roots") {
  const auto cfg = scalar_cfg(0.05, 1.0, 0.2, 0.2);
  CHECK(cfg.admissible());
  const auto inv = [](double y) { return y; };
  SUBCASE("F = 0.05 + x + 0.05 x^2") {
    const auto res = quantitative_newton([](double x) { return 0.05 + x + 0.05 * x * x; }, inv, cfg, 0.0, absval);
    CHECK(res.x == doctest::Approx(-0.0501256).epsilon(1e-6));
    CHECK(res.x == doctest::Approx((-1.0 + std::sqrt(0.99)) / 0.1).epsilon(1e-12));
    CHECK(std::abs(res.x) <= 0.1);
  }
  SUBCASE("F = 0.05 + x + 0.1 x^2") {
    const auto res = quantitative_newton([](double x) { return 0.05 + x + 0.1 * x * x; }, inv, cfg, 0.0, absval);
    CHECK(res.x == doctest::Approx((-1.0 + std::sqrt(0.98)) / 0.2).epsilon(1e-12));
    CHECK(std::abs(res.x) <= 0.1);
    CHECK(res.trace.observed_contraction <= 2.0 * cfg.predicted_contraction());
  }
}

TEST_CASE("inadmissible configurations are refused") {
  const auto F = [](double x) { return x; };
  const auto inv = [](double y) { return y; };
  const auto bad = scalar_cfg(0.5, 1.0, 1.2, 2.0);
  CHECK(bad.kab() == doctest::Approx(1.2));
  CHECK_THROWS_AS(quantitative_newton(F, inv, bad, 0.0, absval), AdmissibilityError);
  try {
    quantitative_newton(F, inv, bad, 0.0, absval);
  } catch (const AdmissibilityError& e) {
    CHECK(std::string(e.what()).find("2*kappa*A*B") != std::string::npos);
  }
  CHECK_THROWS_AS(quantitative_newton(F, inv, scalar_cfg(0.1, 1.0, 0.1, 0.2), 0.0, absval), AdmissibilityError);
  CHECK_THROWS_AS(quantitative_newton(F, inv, scalar_cfg(0.1, -1.0, 0.1, 1.0), 0.0, absval), PreconditionError);
}

TEST_CASE("iterates leaving the ball are reported") {
  // Claimed constants understate the curvature; the map has no real root.
  const auto F = [](double x) { return 0.05 + x + 10.0 * x * x; };
  CHECK_THROWS_AS(quantitative_newton(F, [](double y) { return y; }, scalar_cfg(0.05, 1.0, 0.2, 0.2), 0.0, absval),
                  NonConvergenceError);
}

TEST_CASE("admissible scalar problems: root in the 2A ball, unique under perturbed starts") {
  for (int n = 0; n < 500; ++n) {
    const double c = 0.2 * gen::uniform(), q = gen::uniform();
    if (std::abs(c) < 1e-6) continue;
    auto cfg = scalar_cfg(std::abs(c), 1.0, 2.0 * std::abs(q), 4.0 * std::abs(c));
    if (std::abs(q * c) >= 0.1) continue;
    REQUIRE(cfg.admissible());
    const auto F = [&](double x) { return c + x + q * x * x; };
    const auto inv = [](double y) { return y; };
    const auto a = quantitative_newton(F, inv, cfg, 0.0, absval);
    CHECK(std::abs(a.x) <= 2.0 * cfg.A);
    CHECK(std::abs(F(a.x)) <= cfg.tol);
    CHECK(a.trace.observed_contraction <= 2.0 * cfg.predicted_contraction() + 1e-12);
    const auto b = quantitative_newton(F, inv, cfg, 2.0 * cfg.A * gen::uniform(), absval);
    CHECK(std::abs(a.x - b.x) <= 1e-11);
  }
}

TEST_CASE("toy instanton") {
  const ThinCylinderGrid g{0.25, 16, 8, 8};
  const DiscreteOperator D(g, TwistedBundle{0.5, 0.5}, WarpProfile::sample(WarpSpec::constant(1.0), 8, 8));

  SUBCASE("W0 = 0") {
    const auto rep = toy_instanton(D, 0.1, SpinorGrid::zeros(g));
    CHECK(rep.V.max_abs() == 0.0);
    CHECK(rep.trace.iterations == 0);
  }
  SUBCASE("gamma = 0 is the linear solve") {
    const auto W0 = scaled_probe(g, 0.01, 4);
    const auto rep = toy_instanton(D, 0.0, W0);
    const auto lin = D.solve(restrict_rows(D, W0));
    CHECK(max_diff(rep.V, lin) <= 1e-14 * lin.max_abs());
    CHECK(rep.trace.iterations == 1);
  }
  SUBCASE("gamma = 0.1, |W0| = 0.01") {
    const auto W0 = scaled_probe(g, 0.01, 5);
    const auto rep = toy_instanton(D, 0.1, W0);
    const auto& c = rep.config;
    CHECK(c.kappa == doctest::Approx(0.2));
    CHECK(c.A == doctest::Approx(c.B * 0.01));
    CHECK(c.admissible());
    CHECK(rep.V.max_abs() <= 2.0 * c.A);
    CHECK(rep.trace.converged);
    CHECK(rep.trace.iterations >= 3);
    for (std::size_t k = 2; k < rep.trace.residuals.size(); ++k)
      if (rep.trace.residuals[k - 1] > c.tol)
        CHECK(rep.trace.residuals[k] <= 2.0 * c.predicted_contraction() * rep.trace.residuals[k - 1]);
    // The full-Newton convenience path reaches the same root.
    ToyOptions full;
    full.full_newton = true;
    CHECK(max_diff(toy_instanton(D, 0.1, W0, full).V, rep.V) <= 1e-12);
  }
  SUBCASE("large gamma is inadmissible") {
    const auto W0 = scaled_probe(g, 0.5, 6);
    CHECK_THROWS_AS(toy_instanton(D, 5.0, W0), AdmissibilityError);
  }
  const DiscreteOperator Z(g, TwistedBundle{0.0, 0.0}, WarpProfile::sample(WarpSpec::constant(1.0), 8, 8));
  CHECK_THROWS_AS(toy_instanton(Z, 0.1, SpinorGrid::zeros(g)), PreconditionError);
}

TEST_CASE("toy instanton agrees with a dense full-Newton oracle") {
  const ThinCylinderGrid g{0.25, 8, 4, 4};
  for (const auto& spec : {WarpSpec::constant(1.0), WarpSpec::cosine(1.0, 0.5, 2.0)}) {
    const DiscreteOperator D(g, TwistedBundle{0.5, 0.5}, WarpProfile::sample(spec, 4, 4));
    const auto W0 = scaled_probe(g, 0.02, 7);
    const auto rep = toy_instanton(D, 0.2, W0);
    const auto ref = dense_newton_oracle(D, 0.2, W0);
    CHECK(max_diff(rep.V, ref) <= 1e-11);
  }
}

TEST_CASE("quadratic deviation") {
  const ThinCylinderGrid g{0.25, 8, 4, 4};
  const DiscreteOperator D(g, TwistedBundle{0.5, 0.5}, WarpProfile::sample(WarpSpec::constant(1.0), 4, 4));
  CHECK(quadratic_deviation(D, 0.3, SpinorGrid::zeros(g), gen::smooth_field(g, 1)).deviation == 0.0);
  for (int n = 0; n < 1000; ++n) {
    const auto V0 = gen::smooth_field(g, 2 * n + 11), V = gen::smooth_field(g, 2 * n + 12);
    const double gamma = 0.5 * (1.0 + gen::uniform());
    const auto q = quadratic_deviation(D, gamma, V0, V);
    CHECK(q.holds);
    CHECK(std::abs(q.via_difference - q.deviation) <= 1e-12 * (1.0 + D.system_apply(V).max_abs()));
  }
  const auto V0 = gen::smooth_field(g, 3), V = gen::smooth_field(g, 4);
  const auto a = quadratic_deviation(D, 0.3, V0, V), b = quadratic_deviation(D, 0.3, 2.0 * V0, V);
  CHECK(b.bound == doctest::Approx(2.0 * a.bound));
  CHECK(b.deviation == doctest::Approx(2.0 * a.deviation));
  // Equality: u constant, v = 0 in both arguments.
  auto U = SpinorGrid::zeros(g);
  for (auto& x : U.u) x = cplx(0.6, -0.8);
  const auto e = quadratic_deviation(D, 0.3, U, U);
  CHECK(e.holds);
  CHECK(e.equality);
}

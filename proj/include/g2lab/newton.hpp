#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "g2lab/error.hpp"
#include "g2lab/thin_dirac.hpp"

namespace g2lab {

struct NewtonConfig {
  double A = 0.0;      // |DF(0)^{-1} F(0)|
  double B = 1.0;      // |DF(0)^{-1}|
  double kappa = 0.0;  // Lipschitz constant of DF on the ball
  double r = 1.0;
  double tol = 1e-12;
  int max_iter = 100;

  double kab() const { return 2.0 * kappa * A * B; }
  bool admissible() const { return kab() < 1.0 && 2.0 * A < r; }
  // Empty when admissible, otherwise names the violated constant.
  std::string violation() const;
  void validate() const;
  // Residual contraction bound 2 kappa B (2A).
  double predicted_contraction() const { return 4.0 * kappa * A * B; }
};

struct NewtonTrace {
  std::vector<double> residuals;  // |F(x_k)|, k = 0..
  std::vector<double> iterate_norms;
  double observed_contraction = 0.0;  // max residual ratio after the first step
  int iterations = 0;
  bool converged = false;
  std::string describe() const;
};

template <class X>
struct NewtonResult {
  X x;
  NewtonTrace trace;
};

// Simplified Newton x_{k+1} = x_k - invDF0(F(x_k)) from x0.
template <class X, class F, class Solve, class Norm>
NewtonResult<X> quantitative_newton(const F& f, const Solve& inv_df0, const NewtonConfig& cfg, X x0,
                                    const Norm& norm) {
  cfg.validate();
  NewtonResult<X> out{std::move(x0), {}};
  auto& t = out.trace;
  X fx = f(out.x);
  t.residuals.push_back(norm(fx));
  t.iterate_norms.push_back(norm(out.x));
  for (int k = 0; k < cfg.max_iter; ++k) {
    if (t.residuals.back() <= cfg.tol) {
      t.converged = true;
      break;
    }
    out.x = out.x - inv_df0(fx);
    fx = f(out.x);
    ++t.iterations;
    t.residuals.push_back(norm(fx));
    t.iterate_norms.push_back(norm(out.x));
    if (t.iterate_norms.back() > cfg.r || !std::isfinite(t.residuals.back()))
      throw NonConvergenceError("newton: iterate left the ball of radius r; " + t.describe());
  }
  if (!t.converged && t.residuals.back() <= cfg.tol) t.converged = true;
  if (!t.converged) throw NonConvergenceError("newton: no convergence within max_iter; " + t.describe());
  for (std::size_t k = 2; k < t.residuals.size(); ++k)
    if (t.residuals[k - 1] > cfg.tol)
      t.observed_contraction = std::max(t.observed_contraction, t.residuals[k] / t.residuals[k - 1]);
  return out;
}

// Pointwise Q(u, v) = (u v, u u).
SpinorGrid quadratic_map(const SpinorGrid& V);
// Symmetric bilinear part: Q(V, W) + Q(W, V) = (u_V v_W + u_W v_V, 2 u_V u_W).
SpinorGrid quadratic_polar(const SpinorGrid& V, const SpinorGrid& W);
// Zero the rows the square system reserves for boundary values.
SpinorGrid restrict_rows(const DiscreteOperator& D, SpinorGrid X);

struct ToyOptions {
  bool full_newton = false;  // unverified convenience: Jacobian re-solved each step by GMRES
  double tol = 1e-12;
  int max_iter = 100;
  std::uint64_t seed = 1;
};

struct ToyReport {
  SpinorGrid V;
  NewtonConfig config;
  NewtonTrace trace;
  double w0_sup = 0.0;
  std::vector<double> probe_ratios;  // |D^{-1} W|/|W| per probe
};

// |D^{-1}|_sup estimated from probe solves.
double measured_inverse_norm(const DiscreteOperator& D, std::uint64_t seed, std::vector<double>* ratios = nullptr);

// F(V) = S V + gamma R Q(V) - R W0 with S the square system, solved by
// simplified Newton with inverse S^{-1}. Sup norms are max-entry norms so
// kappa = 2 gamma.
ToyReport toy_instanton(const DiscreteOperator& D, double gamma, const SpinorGrid& W0, const ToyOptions& opt = {});

struct QuadraticDeviation {
  double deviation = 0.0;       // gamma |R(Q(V0,V) + Q(V,V0))|_sup
  double via_difference = 0.0;  // |F'(V0) V - F'(0) V|_sup by subtraction
  double bound = 0.0;           // 2 gamma |V0|_sup |V|_sup
  bool holds = false;
  bool equality = false;
};

QuadraticDeviation quadratic_deviation(const DiscreteOperator& D, double gamma, const SpinorGrid& V0,
                                       const SpinorGrid& V);

}  // namespace g2lab

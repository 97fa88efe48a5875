#include "g2lab/newton.hpp"

#include <iomanip>

#include "g2lab/spectral.hpp"
#include "krylov.hpp"

namespace g2lab {

std::string NewtonConfig::violation() const {
  std::ostringstream s;
  s << std::setprecision(6);
  if (kab() >= 1.0) s << "2*kappa*A*B = " << kab() << " >= 1";
  else if (2.0 * A >= r) s << "2A = " << 2.0 * A << " >= r = " << r;
  return s.str();
}

void NewtonConfig::validate() const {
  require(A >= 0.0 && B > 0.0 && kappa >= 0.0 && r > 0.0, "newton: constants must be nonnegative with B, r > 0");
  require(tol > 0.0 && max_iter > 0, "newton: tol and max_iter must be positive");
  if (!admissible()) throw AdmissibilityError("newton: inadmissible configuration: " + violation());
}

std::string NewtonTrace::describe() const {
  std::ostringstream s;
  s << std::setprecision(3) << "residuals [";
  for (std::size_t k = 0; k < residuals.size(); ++k) s << (k ? ", " : "") << residuals[k];
  s << "], |x| [";
  for (std::size_t k = 0; k < iterate_norms.size(); ++k) s << (k ? ", " : "") << iterate_norms[k];
  s << "]";
  return s.str();
}

SpinorGrid quadratic_map(const SpinorGrid& V) {
  SpinorGrid Q = SpinorGrid::zeros(V.grid);
  for (std::size_t p = 0; p < V.u.size(); ++p) {
    Q.u[p] = V.u[p] * V.v[p];
    Q.v[p] = V.u[p] * V.u[p];
  }
  return Q;
}

SpinorGrid quadratic_polar(const SpinorGrid& V, const SpinorGrid& W) {
  require(V.grid == W.grid, "quadratic_polar: grid mismatch");
  SpinorGrid Q = SpinorGrid::zeros(V.grid);
  for (std::size_t p = 0; p < V.u.size(); ++p) {
    Q.u[p] = V.u[p] * W.v[p] + W.u[p] * V.v[p];
    Q.v[p] = 2.0 * V.u[p] * W.u[p];
  }
  return Q;
}

SpinorGrid restrict_rows(const DiscreteOperator& D, SpinorGrid X) {
  X.project(D.boundary_class());
  return X;
}

double measured_inverse_norm(const DiscreteOperator& D, std::uint64_t seed, std::vector<double>* ratios) {
  double B = 0.0;
  for (Probe p : {Probe::BoundaryHard, Probe::CaseOne, Probe::RandomSmooth}) {
    const SpinorGrid W = restrict_rows(D, probe_rhs(p, D.grid(), seed));
    const double q = D.solve(W).max_abs() / W.max_abs();
    if (ratios) ratios->push_back(q);
    B = std::max(B, q);
  }
  return B;
}

ToyReport toy_instanton(const DiscreteOperator& D, double gamma, const SpinorGrid& W0, const ToyOptions& opt) {
  require(!D.twist().is_zero(), "toy_instanton: twist must be nonzero");
  require(D.boundary_class() != BoundaryClass::None, "toy_instanton: operator needs a boundary class");
  require(W0.grid == D.grid(), "toy_instanton: grid mismatch");
  require(gamma >= 0.0, "toy_instanton: gamma must be nonnegative");
  ToyReport rep;
  const SpinorGrid RW0 = restrict_rows(D, W0);
  rep.w0_sup = W0.max_abs();
  NewtonConfig& c = rep.config;
  c.B = measured_inverse_norm(D, opt.seed, &rep.probe_ratios);
  c.A = c.B * rep.w0_sup;
  c.kappa = 2.0 * gamma;
  c.r = c.A > 0.0 ? 4.0 * c.A : 1.0;
  c.tol = opt.tol;
  c.max_iter = opt.max_iter;
  if (!c.admissible())
    throw AdmissibilityError("toy_instanton: inadmissible constants (" + c.violation() + ")");

  const auto F = [&](const SpinorGrid& V) {
    return D.system_apply(V) + restrict_rows(D, gamma * quadratic_map(V)) - RW0;
  };
  const auto norm = [](const SpinorGrid& V) { return V.max_abs(); };
  const SpinorGrid zero = SpinorGrid::zeros(D.grid());
  NewtonResult<SpinorGrid> res;
  if (!opt.full_newton) {
    res = quantitative_newton(F, [&](const SpinorGrid& r) { return D.solve(r); }, c, zero, norm);
  } else {
    SpinorGrid at = zero;
    const auto F_track = [&](const SpinorGrid& V) {
      at = V;
      return F(V);
    };
    const auto step = [&](const SpinorGrid& r) {
      const auto& g = D.grid();
      const detail::LinOp J = [&](const Eigen::VectorXcd& h) {
        const SpinorGrid H = SpinorGrid::unflatten(g, h);
        return (D.system_apply(H) + restrict_rows(D, gamma * quadratic_polar(at, H))).flatten();
      };
      const detail::LinOp P = [&](const Eigen::VectorXcd& y) { return D.solve(SpinorGrid::unflatten(g, y)).flatten(); };
      const auto kr = detail::gmres(J, P, r.flatten(), 1e-14, 40, 20);
      SpinorGrid h = SpinorGrid::unflatten(g, kr.x);
      h.project(D.boundary_class());
      return h;
    };
    res = quantitative_newton(F_track, step, c, zero, norm);
  }
  rep.V = std::move(res.x);
  rep.trace = std::move(res.trace);
  return rep;
}

QuadraticDeviation quadratic_deviation(const DiscreteOperator& D, double gamma, const SpinorGrid& V0,
                                       const SpinorGrid& V) {
  QuadraticDeviation q;
  const SpinorGrid polar = restrict_rows(D, gamma * quadratic_polar(V0, V));
  q.deviation = polar.max_abs();
  const SpinorGrid lin = D.system_apply(V);
  q.via_difference = ((lin + polar) - lin).max_abs();
  q.bound = 2.0 * gamma * V0.max_abs() * V.max_abs();
  q.holds = q.deviation <= q.bound * (1.0 + 1e-15);
  q.equality = q.bound > 0.0 && q.deviation >= q.bound * (1.0 - 1e-12);
  return q;
}

}  // namespace g2lab

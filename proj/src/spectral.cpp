#include "g2lab/spectral.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <exception>
#include <random>
#include <sstream>

#include "g2lab/error.hpp"
#include "krylov.hpp"

namespace g2lab {

std::vector<double> surface_spectrum(const TwistedBundle& twist, int nmodes) {
  require(nmodes >= 1, "surface_spectrum: nmodes must be >= 1");
  twist.validate();
  std::vector<double> out;
  out.reserve(4 * nmodes * nmodes);
  for (int m = -nmodes; m < nmodes; ++m)
    for (int n = -nmodes; n < nmodes; ++n) {
      const double k2 = m + twist.alpha, k3 = n + twist.beta;
      out.push_back(0.25 * (k2 * k2 + k3 * k3));
    }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> assembled_surface_spectrum(const TwistedBundle& twist, int nmodes, bool plus_minus) {
  require(nmodes >= 2, "assembled_surface_spectrum: nmodes must be >= 2");
  const int N = 2 * nmodes;
  const ThinCylinderGrid g{0.25, 4, N, N};
  const DiscreteOperator D(g, twist, WarpProfile::sample(WarpSpec::constant(1.0), N, N), BoundaryClass::None);
  const int S = g.slice();
  auto column_matrix = [&](bool minus) {
    Eigen::MatrixXcd A(S, S);
    std::vector<cplx> f(g.points());
    for (int c = 0; c < S; ++c) {
      std::fill(f.begin(), f.end(), cplx(0.0));
      f[c] = 1.0;
      D.to_modes(f, Exec::Serial);
      D.apply_symbol(f, minus, Exec::Serial);
      D.from_modes(f, Exec::Serial);
      for (int r = 0; r < S; ++r) A(r, c) = f[r];
    }
    return A;
  };
  const Eigen::MatrixXcd Dm = column_matrix(true), Dp = column_matrix(false);
  const Eigen::MatrixXcd L = plus_minus ? Eigen::MatrixXcd(Dp * Dm) : Eigen::MatrixXcd(Dm * Dp);
  const Eigen::MatrixXcd H = 0.5 * (L + L.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H, Eigen::EigenvaluesOnly);
  std::vector<double> out(es.eigenvalues().data(), es.eigenvalues().data() + S);
  return out;
}

double lambda_surface(const TwistedBundle& twist) {
  twist.validate();
  const double a = std::min(twist.alpha, 1.0 - twist.alpha);
  const double b = std::min(twist.beta, 1.0 - twist.beta);
  return 0.25 * (a * a + b * b);
}

double lambda_bound(double epsilon, const TwistedBundle& twist, const WarpProfile& warp) {
  const double K = warp.K, c1 = warp.c1_hinv_sqrt;
  return std::min(lambda_surface(twist), 2.0 / (K * epsilon * epsilon) - K * c1 * c1) / K;
}

namespace {

using detail::Vec;

struct Weights {
  std::vector<double> w;  // flattened (u block then v block)
  Vec apply(const Vec& x) const {
    Vec y = x;
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) *= w[i];
    return y;
  }
  double norm2(const Vec& x) const {
    double s = 0;
    for (Eigen::Index i = 0; i < x.size(); ++i) s += w[i] * std::norm(x(i));
    return s;
  }
};

Weights make_weights(const DiscreteOperator& D) {
  const auto& g = D.grid();
  const int S = g.slice();
  const std::size_t P = g.points();
  Weights W;
  W.w.resize(2 * P);
  for (int j = 0; j <= g.M; ++j)
    for (int z = 0; z < S; ++z) {
      const std::size_t p = static_cast<std::size_t>(j) * S + z;
      W.w[p] = W.w[P + p] = g.trap(j) * g.area_element() * std::sqrt(D.warp().h[z]);
    }
  return W;
}

Vec project(const DiscreteOperator& D, Vec x) {
  const auto& g = D.grid();
  const std::size_t P = g.points(), S = g.slice(), off = D.boundary_class() == BoundaryClass::Minus ? P : 0;
  if (D.boundary_class() == BoundaryClass::None) return x;
  for (std::size_t z = 0; z < S; ++z) {
    x(off + z) = 0.0;
    x(off + static_cast<std::size_t>(g.M) * S + z) = 0.0;
  }
  return x;
}

// Per-mode sparse LDLT of c (A_m^H T A_m + shift T) on class columns.
class NormalPreconditioner {
 public:
  NormalPreconditioner(const DiscreteOperator& D, double shift) : D_(D) {
    const auto& g = D.grid();
    const int M = g.M, n = 2 * (M + 1);
    cols_ = D.class_columns();
    const double hb = D.hbar();
    scale_ = g.area_element() * std::sqrt(hb);
    Eigen::SparseMatrix<cplx> T(n, n), Tc(static_cast<int>(cols_.size()), static_cast<int>(cols_.size()));
    std::vector<Eigen::Triplet<cplx>> tt, tc;
    for (int r = 0; r < n; ++r) tt.emplace_back(r, r, g.trap(r / 2));
    T.setFromTriplets(tt.begin(), tt.end());
    Eigen::SparseMatrix<cplx> C(n, static_cast<int>(cols_.size()));
    std::vector<Eigen::Triplet<cplx>> cs;
    for (std::size_t k = 0; k < cols_.size(); ++k) {
      cs.emplace_back(cols_[k], static_cast<int>(k), 1.0);
      tc.emplace_back(static_cast<int>(k), static_cast<int>(k), shift * g.trap(cols_[k] / 2));
    }
    C.setFromTriplets(cs.begin(), cs.end());
    Tc.setFromTriplets(tc.begin(), tc.end());
    ldlt_.resize(g.slice());
    for (int a = 0; a < g.N2; ++a)
      for (int b = 0; b < g.N3; ++b) {
        const Eigen::SparseMatrix<cplx> A = D.mode_operator(a, b, hb) * C;
        Eigen::SparseMatrix<cplx> N = Eigen::SparseMatrix<cplx>(A.adjoint()) * T * A + Tc;
        N *= scale_;
        auto& f = ldlt_[a * g.N3 + b];
        f = std::make_unique<Eigen::SimplicialLDLT<Eigen::SparseMatrix<cplx>>>(N);
        if (f->info() != Eigen::Success) throw NonConvergenceError("lambda_D: preconditioner factorization failed");
      }
  }

  Vec operator()(const Vec& y) const {
    const auto& g = D_.grid();
    const int S = g.slice(), M = g.M;
    SpinorGrid f = SpinorGrid::unflatten(g, y);
    D_.to_modes(f.u);
    D_.to_modes(f.v);
    const int nc = static_cast<int>(cols_.size());
#pragma omp parallel for schedule(static)
    for (int m = 0; m < S; ++m) {
      Vec r(nc);
      for (int k = 0; k < nc; ++k) {
        const std::size_t p = static_cast<std::size_t>(cols_[k] / 2) * S + m;
        r(k) = (cols_[k] % 2 ? f.v : f.u)[p];
      }
      const Vec x = ldlt_[m]->solve(r);
      for (int j = 0; j <= M; ++j) {
        f.u[static_cast<std::size_t>(j) * S + m] = 0.0;
        f.v[static_cast<std::size_t>(j) * S + m] = 0.0;
      }
      for (int k = 0; k < nc; ++k) {
        const std::size_t p = static_cast<std::size_t>(cols_[k] / 2) * S + m;
        (cols_[k] % 2 ? f.v : f.u)[p] = x(k);
      }
    }
    D_.from_modes(f.u);
    D_.from_modes(f.v);
    return f.flatten();
  }

 private:
  const DiscreteOperator& D_;
  std::vector<int> cols_;
  double scale_ = 1.0;
  std::vector<std::unique_ptr<Eigen::SimplicialLDLT<Eigen::SparseMatrix<cplx>>>> ldlt_;
};

}  // namespace

LambdaResult lambda_D(const DiscreteOperator& D, const LambdaOptions& opt) {
  require(opt.tol > 0 && opt.max_iter > 0 && opt.shift > 0, "lambda_D: invalid options");
  const auto& g = D.grid();
  const Weights W = make_weights(D);
  auto A = [&](const Vec& x) { return D.apply(SpinorGrid::unflatten(g, x)).flatten(); };
  const detail::LinOp B = [&](const Vec& x) {
    const Vec y = W.apply(A(x));
    return project(D, Vec(D.apply_adjoint(SpinorGrid::unflatten(g, y)).flatten() + opt.shift * W.apply(x)));
  };
  const NormalPreconditioner pre(D, opt.shift);
  const detail::LinOp Minv = [&](const Vec& y) { return pre(y); };

  // All-ones start with a small seeded perturbation so that every torus mode
  // is represented.
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Vec x(2 * static_cast<Eigen::Index>(g.points()));
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = cplx(1.0 + 1e-3 * uni(rng), 1e-3 * uni(rng));
  x = project(D, x);
  x /= std::sqrt(W.norm2(x));

  LambdaResult res;
  double lam = W.norm2(A(x));
  for (int it = 1; it <= opt.max_iter; ++it) {
    const Vec guess = x / (lam + opt.shift);
    const auto kr = detail::pcg(B, Minv, W.apply(x), guess, 1e-12, 2000);
    res.inner_iterations += kr.iterations;
    if (kr.relative_residual > 1e-8) {
      std::ostringstream s;
      s << "lambda_D: inner solve stalled at relative residual " << kr.relative_residual;
      throw NonConvergenceError(s.str());
    }
    x = project(D, kr.x);
    x /= std::sqrt(W.norm2(x));
    const double next = W.norm2(A(x));
    res.iterations = it;
    const bool done = std::abs(next - lam) <= opt.tol * std::max(next, 1e-6);
    lam = next;
    if (done) {
      res.value = lam;
      return res;
    }
  }
  std::ostringstream s;
  s << "lambda_D: no convergence after " << opt.max_iter << " iterations (last value " << lam << ")";
  throw NonConvergenceError(s.str());
}

SpectrumReport verify_lambda_bound(const ThinCylinderGrid& grid, const TwistedBundle& twist,
                                   const WarpProfile& warp, const LambdaOptions& opt) {
  grid.validate();
  twist.validate();
  SpectrumReport r;
  r.lambda_surface_minus = r.lambda_surface_plus = lambda_surface(twist);
  r.bound = lambda_bound(grid.epsilon, twist, warp);
  const auto coarse = lambda_D(DiscreteOperator(grid, twist, warp), opt);
  ThinCylinderGrid fine = grid;
  fine.M *= 2;
  const auto refined = lambda_D(DiscreteOperator(fine, twist, warp), opt);
  r.lambda_D = coarse.value;
  r.lambda_D_refined = refined.value;
  r.iterations = coarse.iterations + refined.iterations;
  r.M_refined = fine.M;
  r.margin = r.lambda_D - r.bound;
  r.refinement_change = std::abs(refined.value - coarse.value);
  r.stable = r.refinement_change <= kRefinementTol * std::max(coarse.value, 1e-6);
  r.pass = r.stable && r.margin >= -kLambdaTol && refined.value - r.bound >= -kLambdaTol;
  return r;
}

std::vector<double> singular_values(const DiscreteOperator& D) {
  const auto& g = D.grid();
  std::vector<double> out;
  if (D.warp().is_constant()) {
    const int n = 2 * (g.M + 1);
    const auto cols = D.class_columns();
    const int nc = static_cast<int>(cols.size());
    for (int a = 0; a < g.N2; ++a)
      for (int b = 0; b < g.N3; ++b) {
        const Eigen::MatrixXcd A = Eigen::MatrixXcd(D.mode_operator(a, b, D.hbar()));
        Eigen::MatrixXcd Aw(n, nc);
        for (int k = 0; k < nc; ++k)
          for (int r = 0; r < n; ++r)
            Aw(r, k) = std::sqrt(g.trap(r / 2) / g.trap(cols[k] / 2)) * A(r, cols[k]);
        Eigen::BDCSVD<Eigen::MatrixXcd> svd(Aw);
        for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) out.push_back(svd.singularValues()(i));
      }
  } else {
    const Eigen::MatrixXcd A = D.dense_operator();
    require(A.cols() <= 4096, "singular_values: variable warp needs a grid with at most 4096 class unknowns");
    const Weights W = make_weights(D);
    std::vector<double> colw;
    const std::size_t P = g.points(), S = g.slice();
    for (std::size_t p = 0; p < 2 * P; ++p) {
      const bool is_v = p >= P;
      const std::size_t j = (is_v ? p - P : p) / S;
      const bool edge = j == 0 || j == static_cast<std::size_t>(g.M);
      if (edge && is_v && D.boundary_class() == BoundaryClass::Minus) continue;
      if (edge && !is_v && D.boundary_class() == BoundaryClass::Plus) continue;
      colw.push_back(W.w[p]);
    }
    Eigen::MatrixXcd Aw = A;
    for (Eigen::Index c = 0; c < Aw.cols(); ++c)
      for (Eigen::Index r = 0; r < Aw.rows(); ++r) Aw(r, c) *= std::sqrt(W.w[r] / colw[c]);
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(Aw);
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) out.push_back(svd.singularValues()(i));
  }
  std::sort(out.begin(), out.end());
  return out;
}

int kernel_dimension(const DiscreteOperator& D, double threshold) {
  const auto s = singular_values(D);
  const double cut = threshold * s.back();
  return 2 * static_cast<int>(std::count_if(s.begin(), s.end(), [&](double x) { return x < cut; }));
}

double mean_free_check(const SpinorGrid& V) {
  const auto& g = V.grid;
  const int S = g.slice();
  double worst = 0.0;
  for (int z = 0; z < S; ++z) {
    cplx s = 0.0;
    for (int j = 0; j <= g.M; ++j) s += g.trap(j) * V.u[static_cast<std::size_t>(j) * S + z];
    worst = std::max(worst, std::abs(s));
  }
  return worst;
}

std::string probe_name(Probe p) {
  switch (p) {
    case Probe::BoundaryHard: return "boundary-hard";
    case Probe::CaseOne: return "case-i";
    case Probe::RandomSmooth: return "random-smooth";
  }
  return "";
}

Probe parse_probe(const std::string& s) {
  for (Probe p : {Probe::BoundaryHard, Probe::CaseOne, Probe::RandomSmooth})
    if (probe_name(p) == s) return p;
  throw PreconditionError("unknown probe '" + s + "'");
}

SpinorGrid probe_rhs(Probe p, const ThinCylinderGrid& g, std::uint64_t seed) {
  auto W = SpinorGrid::zeros(g);
  switch (p) {
    case Probe::BoundaryHard:
    case Probe::CaseOne:
      for (int j = 0; j <= g.M; ++j)
        for (int a = 0; a < g.N2; ++a)
          for (int b = 0; b < g.N3; ++b) {
            if (p == Probe::BoundaryHard) W.u[W.index(j, a, b)] = 1.0 + std::polar(0.5, g.x2(a));
            else W.v[W.index(j, a, b)] = 1.0 + std::polar(0.5, g.x3(b));
          }
      break;
    case Probe::RandomSmooth: {
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> uni(-1.0, 1.0);
      for (int comp = 0; comp < 2; ++comp)
        for (int m = -2; m <= 2; ++m)
          for (int k = -2; k <= 2; ++k) {
            const cplx c(uni(rng), uni(rng));
            const double f1 = 3.0 * uni(rng), f2 = 3.0 * uni(rng);
            const double damp = 1.0 / (1.0 + m * m + k * k);
            for (int j = 0; j <= g.M; ++j) {
              const double x = g.x1(j) / g.epsilon;
              const double prof = std::cos(f1 + 2.0 * x) + 0.5 * std::sin(f2 + 3.0 * x);
              for (int a = 0; a < g.N2; ++a)
                for (int b = 0; b < g.N3; ++b)
                  (comp ? W.v : W.u)[W.index(j, a, b)] +=
                      damp * c * prof * std::polar(1.0, m * g.x2(a) + k * g.x3(b));
            }
          }
      break;
    }
  }
  return W;
}

int GridPolicy::resolve(double epsilon) const {
  const int m = kind == Kind::FixedM ? M : static_cast<int>(std::lround(epsilon / dx));
  if (m < min_M) {
    std::ostringstream s;
    s << "grid policy gives M = " << m << " at epsilon = " << epsilon << ", below the resolution floor " << min_M;
    throw NonConvergenceError(s.str());
  }
  return m;
}

double fit_exponent(const std::vector<double>& eps, const std::vector<double>& values) {
  require(eps.size() == values.size(), "fit_exponent: size mismatch");
  if (eps.size() < 3) throw PreconditionError("fit_exponent: need at least 3 points to fit, got " + std::to_string(eps.size()));
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(eps.size());
  for (std::size_t i = 0; i < eps.size(); ++i) {
    require(eps[i] > 0 && values[i] > 0, "fit_exponent: data must be positive");
    const double x = std::log(eps[i]), y = std::log(values[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double den = n * sxx - sx * sx;
  require(den > 0, "fit_exponent: epsilons must not all coincide");
  return -(n * sxy - sx * sy) / den;
}

void validate_holder_parameters(double p, double alpha) {
  require(p > 3.0, "p must exceed 3");
  require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
  require(3.0 / p + 3.0 * alpha <= 0.5 + 1e-12, "3/p + 3 alpha must not exceed 1/2");
}

ScalingReport inverse_scaling_experiment(const ScalingConfig& cfg, Exec exec) {
  validate_holder_parameters(cfg.p, cfg.alpha);
  cfg.twist.validate();
  if (cfg.epsilons.size() < 3)
    throw PreconditionError("scaling: need at least 3 epsilons to fit an exponent, got " +
                            std::to_string(cfg.epsilons.size()));
  for (std::size_t i = 1; i < cfg.epsilons.size(); ++i)
    require(cfg.epsilons[i] < cfg.epsilons[i - 1], "scaling: epsilons must be strictly decreasing");
  require(!cfg.probes.empty(), "scaling: no probes");
  const WarpProfile warp = WarpProfile::sample(cfg.warp, cfg.grid.N2, cfg.grid.N3);

  const int n = static_cast<int>(cfg.epsilons.size());
  std::vector<ScalingCell> cells(n);
  std::vector<int> Ms(n);
  for (int i = 0; i < n; ++i) {
    Ms[i] = cfg.grid.resolve(cfg.epsilons[i]);
    ThinCylinderGrid{cfg.epsilons[i], Ms[i], cfg.grid.N2, cfg.grid.N3}.validate();
  }
  HolderOptions hopt;
  hopt.p = cfg.p;
  hopt.alpha = cfg.alpha;
  std::vector<std::exception_ptr> errors(n);
#pragma omp parallel for schedule(dynamic) if (exec == Exec::Parallel)
  for (int i = 0; i < n; ++i) {
    try {
      const ThinCylinderGrid g{cfg.epsilons[i], Ms[i], cfg.grid.N2, cfg.grid.N3};
      const DiscreteOperator D(g, cfg.twist, warp);
      ScalingCell c;
      c.epsilon = g.epsilon;
      c.M = g.M;
      c.sigma_min = std::sqrt(lambda_D(D, cfg.lambda).value);
      c.sigma_bound = std::sqrt(std::max(0.0, lambda_bound(g.epsilon, cfg.twist, warp)));
      for (Probe p : cfg.probes) {
        const SpinorGrid W = probe_rhs(p, g, cfg.seed);
        const SpinorGrid V = D.solve(W);
        const auto nw = discrete_norms(W, warp, hopt, Exec::Serial);
        const auto nv = discrete_norms(V, warp, hopt, Exec::Serial);
        c.sup_ratios.push_back(nv.sup / nw.c0_alpha());
        c.holder_ratios.push_back(nv.c0_alpha() / nw.c0_alpha());
        c.subsampled = c.subsampled || nv.subsampled || nw.subsampled;
      }
      cells[i] = std::move(c);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  ScalingReport r;
  r.probes = cfg.probes;
  r.target_exponent = 3.0 / cfg.p + 2.0 * cfg.alpha;
  r.sigma_ok = true;
  for (const auto& c : cells) {
    r.epsilons.push_back(c.epsilon);
    r.Ms.push_back(c.M);
    r.inverse_sup_norms.push_back(*std::max_element(c.sup_ratios.begin(), c.sup_ratios.end()));
    r.inverse_holder_norms.push_back(*std::max_element(c.holder_ratios.begin(), c.holder_ratios.end()));
    r.sigma_mins.push_back(c.sigma_min);
    r.sigma_bounds.push_back(c.sigma_bound);
    r.sigma_ok = r.sigma_ok && c.sigma_min >= c.sigma_bound - kSigmaSlack;
  }
  r.cells = std::move(cells);
  r.fitted_exponent = fit_exponent(r.epsilons, r.inverse_sup_norms);
  r.fitted_exponent_holder = fit_exponent(r.epsilons, r.inverse_holder_norms);
  r.exponent_ok = r.fitted_exponent <= r.target_exponent + kExponentSlack;
  return r;
}

}  // namespace g2lab

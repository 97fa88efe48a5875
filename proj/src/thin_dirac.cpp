#include "g2lab/thin_dirac.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

#include "fft.hpp"
#include "g2lab/error.hpp"
#include "krylov.hpp"

namespace g2lab {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

// ---------------------------------------------------------------- grid types

void ThinCylinderGrid::validate() const {
  std::ostringstream s;
  if (M < 4) s << "M must be >= 4 (got " << M << "); ";
  if (N2 < 4 || N2 % 2) s << "N2 must be even and >= 4 (got " << N2 << "); ";
  if (N3 < 4 || N3 % 2) s << "N3 must be even and >= 4 (got " << N3 << "); ";
  if (!(epsilon > 0.0 && epsilon <= 1.5)) s << "epsilon must lie in (0, 3/2] (got " << epsilon << "); ";
  if (M >= 4 && epsilon > 0.0 && dx() < 1e-6) s << "dx1 = " << dx() << " below 1e-6; ";
  if (!s.str().empty()) throw PreconditionError("ThinCylinderGrid: " + s.str());
}

double ThinCylinderGrid::area_element() const { return kTwoPi * kTwoPi / (N2 * N3); }
double ThinCylinderGrid::x2(int a) const { return kTwoPi * a / N2; }
double ThinCylinderGrid::x3(int b) const { return kTwoPi * b / N3; }

void TwistedBundle::validate() const {
  if (!(alpha >= 0.0 && alpha < 1.0 && beta >= 0.0 && beta < 1.0)) {
    std::ostringstream s;
    s << "TwistedBundle: alpha, beta must lie in [0,1) (got " << alpha << ", " << beta << ")";
    throw PreconditionError(s.str());
  }
}

WarpSpec WarpSpec::parse(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw PreconditionError("warp spec '" + text + "': expected kind:params");
  const std::string kind = text.substr(0, colon);
  std::vector<double> vals;
  std::stringstream ss(text.substr(colon + 1));
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      vals.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw PreconditionError("warp spec '" + text + "': bad number '" + item + "'");
    }
  }
  if (kind == "const" && vals.size() == 1 && vals[0] > 0) return constant(vals[0]);
  if (kind == "cos" && (vals.size() == 2 || vals.size() == 3)) {
    const double K = vals.size() == 3 ? vals[2] : 0.0;
    if (vals.size() == 3 && K < 1.0) throw PreconditionError("warp spec '" + text + "': K must be >= 1");
    return cosine(vals[0], vals[1], K);
  }
  throw PreconditionError("warp spec '" + text + "': expected const:c or cos:c0,c1[,K]");
}

std::string WarpSpec::str() const {
  const auto num = [](double x) {
    char b[32];
    return std::string(b, std::to_chars(b, b + sizeof b, x).ptr);
  };
  if (kind == Kind::Constant) return "const:" + num(c0);
  if (kind == Kind::Samples) return "samples";
  std::string s = "cos:" + num(c0) + "," + num(c1);
  if (clip_K > 0) s += "," + num(clip_K);
  return s;
}

WarpProfile WarpProfile::sample(const WarpSpec& spec, int N2, int N3) {
  std::vector<double> h(static_cast<std::size_t>(N2) * N3);
  for (int a = 0; a < N2; ++a)
    for (int b = 0; b < N3; ++b) {
      double v = spec.c0;
      if (spec.kind == WarpSpec::Kind::Cosine) v = spec.c0 + spec.c1 * std::cos(kTwoPi * a / N2);
      if (spec.clip_K > 0) v = std::clamp(v, 1.0 / spec.clip_K, spec.clip_K);
      h[a * N3 + b] = v;
    }
  WarpProfile w = from_samples(N2, N3, std::move(h));
  w.spec = spec;
  return w;
}

WarpProfile WarpProfile::from_samples(int N2, int N3, std::vector<double> h) {
  require(N2 >= 4 && N3 >= 4 && h.size() == static_cast<std::size_t>(N2) * N3,
          "WarpProfile: sample count must equal N2*N3");
  WarpProfile w;
  w.N2 = N2;
  w.N3 = N3;
  w.h = std::move(h);
  double lo = w.h[0], hi = w.h[0];
  for (double x : w.h) {
    if (!(x > 0.0) || !std::isfinite(x)) throw PreconditionError("WarpProfile: h must be positive and finite");
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  w.K = std::max({1.0, hi, 1.0 / lo});

  // Spectral gradient of h^{-1/2} on the 2pi-periodic torus.
  const int S = N2 * N3;
  std::vector<cplx> g(S);
  for (int p = 0; p < S; ++p) g[p] = 1.0 / std::sqrt(w.h[p]);
  double sup_g = 0;
  for (const auto& x : g) sup_g = std::max(sup_g, x.real());
  detail::Fft fft({N2, N3});
  fft.forward(g.data());
  std::vector<cplx> g2(S), g3(S);
  for (int a = 0; a < N2; ++a)
    for (int b = 0; b < N3; ++b) {
      const int m = 2 * a == N2 ? 0 : detail::signed_frequency(a, N2);
      const int n = 2 * b == N3 ? 0 : detail::signed_frequency(b, N3);
      g2[a * N3 + b] = g[a * N3 + b] * cplx(0, m) / double(S);
      g3[a * N3 + b] = g[a * N3 + b] * cplx(0, n) / double(S);
    }
  fft.backward(g2.data());
  fft.backward(g3.data());
  double sup_grad = 0;
  for (int p = 0; p < S; ++p) sup_grad = std::max(sup_grad, std::hypot(g2[p].real(), g3[p].real()));
  w.c1_hinv_sqrt = sup_g + sup_grad;
  w.spec = w.is_constant() ? WarpSpec::constant(w.h[0]) : WarpSpec{WarpSpec::Kind::Samples, 0.0, 0.0, 0.0};
  return w;
}

bool WarpProfile::is_constant() const {
  return std::all_of(h.begin(), h.end(), [&](double x) { return x == h[0]; });
}

double WarpProfile::sup_hinv_sqrt() const {
  return 1.0 / std::sqrt(*std::min_element(h.begin(), h.end()));
}

// ---------------------------------------------------------------- SpinorGrid

SpinorGrid SpinorGrid::zeros(const ThinCylinderGrid& g) {
  SpinorGrid s;
  s.grid = g;
  s.u.assign(g.points(), 0.0);
  s.v.assign(g.points(), 0.0);
  return s;
}

void SpinorGrid::project(BoundaryClass c) {
  if (c == BoundaryClass::None) return;
  auto& f = c == BoundaryClass::Minus ? v : u;
  const int S = grid.slice();
  for (int z = 0; z < S; ++z) {
    f[z] = 0.0;
    f[static_cast<std::size_t>(grid.M) * S + z] = 0.0;
  }
}

bool SpinorGrid::in_class(BoundaryClass c) const {
  if (c == BoundaryClass::None) return true;
  const auto& f = c == BoundaryClass::Minus ? v : u;
  const int S = grid.slice();
  const double tol = 1e-12 * (1.0 + max_abs());
  for (int z = 0; z < S; ++z)
    if (std::abs(f[z]) > tol || std::abs(f[static_cast<std::size_t>(grid.M) * S + z]) > tol) return false;
  return true;
}

SpinorGrid& SpinorGrid::operator+=(const SpinorGrid& o) {
  require(grid == o.grid, "SpinorGrid: grid mismatch");
  for (std::size_t p = 0; p < u.size(); ++p) {
    u[p] += o.u[p];
    v[p] += o.v[p];
  }
  return *this;
}

SpinorGrid& SpinorGrid::operator-=(const SpinorGrid& o) {
  require(grid == o.grid, "SpinorGrid: grid mismatch");
  for (std::size_t p = 0; p < u.size(); ++p) {
    u[p] -= o.u[p];
    v[p] -= o.v[p];
  }
  return *this;
}

SpinorGrid& SpinorGrid::operator*=(cplx s) {
  for (auto& x : u) x *= s;
  for (auto& x : v) x *= s;
  return *this;
}

Eigen::VectorXcd SpinorGrid::flatten() const {
  const Eigen::Index P = static_cast<Eigen::Index>(u.size());
  Eigen::VectorXcd x(2 * P);
  for (Eigen::Index p = 0; p < P; ++p) {
    x(p) = u[p];
    x(P + p) = v[p];
  }
  return x;
}

SpinorGrid SpinorGrid::unflatten(const ThinCylinderGrid& g, const Eigen::VectorXcd& x) {
  SpinorGrid s = zeros(g);
  const Eigen::Index P = static_cast<Eigen::Index>(g.points());
  require(x.size() == 2 * P, "SpinorGrid::unflatten: size mismatch");
  for (Eigen::Index p = 0; p < P; ++p) {
    s.u[p] = x(p);
    s.v[p] = x(P + p);
  }
  return s;
}

double SpinorGrid::max_abs() const {
  double m = 0;
  for (const auto& x : u) m = std::max(m, std::abs(x));
  for (const auto& x : v) m = std::max(m, std::abs(x));
  return m;
}

// ---------------------------------------------------------------- operator

namespace {

std::vector<DiscreteOperator::StencilRow> build_d1(int M, double dx, X1Stencil st) {
  std::vector<DiscreteOperator::StencilRow> rows(M + 1);
  const double c = 1.0 / (2.0 * dx);
  for (int j = 1; j < M; ++j) rows[j] = {{j - 1, j + 1, 0}, {-c, c, 0}, 2};
  if (st == X1Stencil::SummationByParts) {
    rows[0] = {{0, 1, 0}, {-1.0 / dx, 1.0 / dx, 0}, 2};
    rows[M] = {{M - 1, M, 0}, {-1.0 / dx, 1.0 / dx, 0}, 2};
  } else {
    rows[0] = {{0, 1, 2}, {-3 * c, 4 * c, -c}, 3};
    rows[M] = {{M, M - 1, M - 2}, {3 * c, -4 * c, c}, 3};
  }
  return rows;
}

std::vector<DiscreteOperator::StencilRow> transpose_rows(const std::vector<DiscreteOperator::StencilRow>& r) {
  std::vector<DiscreteOperator::StencilRow> t(r.size());
  for (auto& x : t) x.n = 0;
  for (int j = 0; j < static_cast<int>(r.size()); ++j)
    for (int q = 0; q < r[j].n; ++q) {
      auto& row = t[r[j].col[q]];
      if (row.n == 3) throw InvariantError("stencil transpose: more than 3 entries per column");
      row.col[row.n] = j;
      row.w[row.n] = r[j].w[q];
      ++row.n;
    }
  return t;
}

}  // namespace

DiscreteOperator::DiscreteOperator(const ThinCylinderGrid& grid, const TwistedBundle& twist,
                                   const WarpProfile& warp, BoundaryClass klass, X1Stencil stencil)
    : grid_(grid), twist_(twist), warp_(warp), klass_(klass), stencil_(stencil) {
  grid_.validate();
  twist_.validate();
  if (warp_.N2 != grid_.N2 || warp_.N3 != grid_.N3)
    throw PreconditionError("DiscreteOperator: warp profile sampled on a different torus grid");
  hinv_sqrt_.resize(warp_.h.size());
  for (std::size_t z = 0; z < hinv_sqrt_.size(); ++z) hinv_sqrt_[z] = 1.0 / std::sqrt(warp_.h[z]);
  if (warp_.is_constant()) {
    hbar_ = warp_.h[0];
  } else {
    double c = 0;
    for (double x : warp_.h) c += std::sqrt(x);
    c /= static_cast<double>(warp_.h.size());
    hbar_ = c * c;
  }
  d1_ = build_d1(grid_.M, grid_.dx(), stencil_);
  d1t_ = transpose_rows(d1_);
  fft_ = std::make_unique<detail::Fft>(std::vector<int>{grid_.N2, grid_.N3});

  if (!twist_.is_zero() && klass_ != BoundaryClass::None) {
    lu_.resize(grid_.slice());
    for (int a = 0; a < grid_.N2; ++a)
      for (int b = 0; b < grid_.N3; ++b) {
        auto lu = std::make_unique<Eigen::SparseLU<Eigen::SparseMatrix<cplx>>>();
        const auto A = mode_system(a, b, hbar_);
        lu->compute(A);
        if (lu->info() != Eigen::Success)
          throw InvariantError("DiscreteOperator: per-mode factorization failed");
        lu_[a * grid_.N3 + b] = std::move(lu);
      }
  }
}

DiscreteOperator::~DiscreteOperator() = default;
DiscreteOperator::DiscreteOperator(DiscreteOperator&&) noexcept = default;

std::string DiscreteOperator::scheme_tag() const {
  std::ostringstream s;
  s << "collocated-x1:" << (stencil_ == X1Stencil::SummationByParts ? "sbp" : "onesided2")
    << ";torus:pseudospectral;bc:"
    << (klass_ == BoundaryClass::Minus ? "v-dirichlet" : klass_ == BoundaryClass::Plus ? "u-dirichlet" : "none")
    << ";prefactors:dropped";
  return s.str();
}

double DiscreteOperator::kappa2(int a) const { return detail::signed_frequency(a, grid_.N2) + twist_.alpha; }
double DiscreteOperator::kappa3(int b) const { return detail::signed_frequency(b, grid_.N3) + twist_.beta; }

cplx DiscreteOperator::symbol_minus(int a, int b) const { return -0.5 * cplx(kappa2(a), kappa3(b)); }

Eigen::SparseMatrix<cplx> DiscreteOperator::mode_operator(int a, int b, double hbar) const {
  const int M = grid_.M;
  const double q = 1.0 / std::sqrt(hbar);
  const cplx sm = symbol_minus(a, b), sp = std::conj(sm);
  std::vector<Eigen::Triplet<cplx>> t;
  for (int j = 0; j <= M; ++j) {
    for (int k = 0; k < d1_[j].n; ++k) {
      t.emplace_back(2 * j, 2 * d1_[j].col[k], q * d1_[j].w[k]);
      t.emplace_back(2 * j + 1, 2 * d1_[j].col[k] + 1, q * d1_[j].w[k]);
    }
    t.emplace_back(2 * j, 2 * j + 1, sp);
    t.emplace_back(2 * j + 1, 2 * j, sm);
  }
  Eigen::SparseMatrix<cplx> A(2 * (M + 1), 2 * (M + 1));
  A.setFromTriplets(t.begin(), t.end());
  return A;
}

Eigen::SparseMatrix<cplx> DiscreteOperator::mode_system(int a, int b, double hbar) const {
  Eigen::SparseMatrix<cplx> A = mode_operator(a, b, hbar);
  if (klass_ == BoundaryClass::None) return A;
  const int M = grid_.M;
  const int off = klass_ == BoundaryClass::Minus ? 1 : 0;
  Eigen::SparseMatrix<cplx, Eigen::RowMajor> R = A;
  for (int row : {off, 2 * M + off}) {
    for (Eigen::SparseMatrix<cplx, Eigen::RowMajor>::InnerIterator it(R, row); it; ++it)
      it.valueRef() = it.col() == row ? cplx(1.0) : cplx(0.0);
  }
  R.prune([](Eigen::Index, Eigen::Index, const cplx& x) { return x != cplx(0.0); });
  Eigen::SparseMatrix<cplx> out = R;
  out.makeCompressed();
  return out;
}

std::vector<int> DiscreteOperator::class_columns() const {
  const int M = grid_.M;
  std::vector<int> cols;
  for (int c = 0; c < 2 * (M + 1); ++c) {
    if (klass_ == BoundaryClass::Minus && (c == 1 || c == 2 * M + 1)) continue;
    if (klass_ == BoundaryClass::Plus && (c == 0 || c == 2 * M)) continue;
    cols.push_back(c);
  }
  return cols;
}

void DiscreteOperator::to_modes(std::vector<cplx>& f, Exec exec) const {
  const int S = grid_.slice(), J = grid_.M + 1;
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
  for (int j = 0; j < J; ++j) fft_->forward(f.data() + static_cast<std::size_t>(j) * S);
}

void DiscreteOperator::from_modes(std::vector<cplx>& f, Exec exec) const {
  const int S = grid_.slice(), J = grid_.M + 1;
  const double inv = 1.0 / S;
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
  for (int j = 0; j < J; ++j) {
    cplx* p = f.data() + static_cast<std::size_t>(j) * S;
    fft_->backward(p);
    for (int z = 0; z < S; ++z) p[z] *= inv;
  }
}

void DiscreteOperator::apply_symbol(std::vector<cplx>& f, bool minus, Exec exec) const {
  const int S = grid_.slice(), J = grid_.M + 1, N3 = grid_.N3;
  std::vector<cplx> sym(S);
  for (int a = 0; a < grid_.N2; ++a)
    for (int b = 0; b < N3; ++b) sym[a * N3 + b] = minus ? symbol_minus(a, b) : symbol_plus(a, b);
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
  for (int j = 0; j < J; ++j) {
    cplx* p = f.data() + static_cast<std::size_t>(j) * S;
    for (int z = 0; z < S; ++z) p[z] *= sym[z];
  }
}

void DiscreteOperator::d1_apply(const std::vector<cplx>& f, std::vector<cplx>& out, bool transpose,
                                Exec exec) const {
  const auto& rows = transpose ? d1t_ : d1_;
  const int S = grid_.slice(), J = grid_.M + 1;
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
  for (int j = 0; j < J; ++j) {
    const auto& r = rows[j];
    cplx* o = out.data() + static_cast<std::size_t>(j) * S;
    for (int z = 0; z < S; ++z) {
      cplx acc = 0.0;
      for (int q = 0; q < r.n; ++q) acc += r.w[q] * f[static_cast<std::size_t>(r.col[q]) * S + z];
      o[z] = acc;
    }
  }
}

SpinorGrid DiscreteOperator::apply(const SpinorGrid& V, Exec exec) const {
  require(V.grid == grid_ && V.u.size() == grid_.points(), "apply: grid mismatch");
  const int S = grid_.slice();
  std::vector<cplx> dmu = V.u, dpv = V.v;
  to_modes(dmu, exec);
  to_modes(dpv, exec);
  apply_symbol(dmu, true, exec);
  apply_symbol(dpv, false, exec);
  from_modes(dmu, exec);
  from_modes(dpv, exec);
  SpinorGrid out = SpinorGrid::zeros(grid_);
  d1_apply(V.u, out.u, false, exec);
  d1_apply(V.v, out.v, false, exec);
  const long long P = static_cast<long long>(grid_.points());
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
  for (long long p = 0; p < P; ++p) {
    const double q = hinv_sqrt_[p % S];
    out.u[p] = q * out.u[p] + dpv[p];
    out.v[p] = q * out.v[p] + dmu[p];
  }
  return out;
}

SpinorGrid DiscreteOperator::apply_adjoint(const SpinorGrid& Y, Exec exec) const {
  require(Y.grid == grid_ && Y.u.size() == grid_.points(), "apply_adjoint: grid mismatch");
  const int S = grid_.slice();
  const long long P = static_cast<long long>(grid_.points());
  std::vector<cplx> su(P), sv(P);
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
  for (long long p = 0; p < P; ++p) {
    su[p] = hinv_sqrt_[p % S] * Y.u[p];
    sv[p] = hinv_sqrt_[p % S] * Y.v[p];
  }
  std::vector<cplx> dpv = Y.v, dmu = Y.u;
  to_modes(dpv, exec);
  to_modes(dmu, exec);
  apply_symbol(dpv, false, exec);
  apply_symbol(dmu, true, exec);
  from_modes(dpv, exec);
  from_modes(dmu, exec);
  SpinorGrid out = SpinorGrid::zeros(grid_);
  d1_apply(su, out.u, true, exec);
  d1_apply(sv, out.v, true, exec);
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
  for (long long p = 0; p < P; ++p) {
    out.u[p] += dpv[p];
    out.v[p] += dmu[p];
  }
  return out;
}

SpinorGrid DiscreteOperator::system_apply(const SpinorGrid& V, Exec exec) const {
  SpinorGrid out = apply(V, exec);
  if (klass_ == BoundaryClass::None) return out;
  const int S = grid_.slice();
  const std::size_t last = static_cast<std::size_t>(grid_.M) * S;
  auto& o = klass_ == BoundaryClass::Minus ? out.v : out.u;
  const auto& in = klass_ == BoundaryClass::Minus ? V.v : V.u;
  for (int z = 0; z < S; ++z) {
    o[z] = in[z];
    o[last + z] = in[last + z];
  }
  return out;
}

SpinorGrid DiscreteOperator::solve(const SpinorGrid& W) const {
  require(W.grid == grid_ && W.u.size() == grid_.points(), "solve: grid mismatch");
  if (klass_ == BoundaryClass::None) throw PreconditionError("solve: operator has no boundary class");
  if (twist_.is_zero())
    throw SingularSystemError("solve: zero twist; kernel spanned by constant u (real dimension 2)", 2);
  SpinorGrid rhs = W;
  rhs.project(klass_);
  if (warp_.is_constant()) {
    stats_ = {1, 0.0};
    return solve_constant(rhs);
  }
  return solve_gmres(rhs);
}

SpinorGrid DiscreteOperator::solve_constant(const SpinorGrid& W) const {
  const int S = grid_.slice(), M = grid_.M;
  std::vector<cplx> fu = W.u, fv = W.v;
  to_modes(fu);
  to_modes(fv);
#pragma omp parallel for schedule(static)
  for (int m = 0; m < S; ++m) {
    Eigen::VectorXcd r(2 * (M + 1));
    for (int j = 0; j <= M; ++j) {
      r(2 * j) = fu[static_cast<std::size_t>(j) * S + m];
      r(2 * j + 1) = fv[static_cast<std::size_t>(j) * S + m];
    }
    const Eigen::VectorXcd x = lu_[m]->solve(r);
    for (int j = 0; j <= M; ++j) {
      fu[static_cast<std::size_t>(j) * S + m] = x(2 * j);
      fv[static_cast<std::size_t>(j) * S + m] = x(2 * j + 1);
    }
  }
  from_modes(fu);
  from_modes(fv);
  SpinorGrid out = SpinorGrid::zeros(grid_);
  out.u = std::move(fu);
  out.v = std::move(fv);
  return out;
}

SpinorGrid DiscreteOperator::precondition(const SpinorGrid& y) const {
  // P = c * S_bar on differential rows, identity on boundary rows, c = hbar^{1/2}.
  const int S = grid_.slice(), M = grid_.M;
  const double inv_c = 1.0 / std::sqrt(hbar_);
  SpinorGrid r = y;
  for (int j = 0; j <= M; ++j)
    for (int z = 0; z < S; ++z) {
      const std::size_t p = static_cast<std::size_t>(j) * S + z;
      const bool edge = j == 0 || j == M;
      if (!(edge && klass_ == BoundaryClass::Plus)) r.u[p] *= inv_c;
      if (!(edge && klass_ == BoundaryClass::Minus)) r.v[p] *= inv_c;
    }
  return solve_constant(r);
}

SpinorGrid DiscreteOperator::solve_gmres(const SpinorGrid& W) const {
  const int S = grid_.slice(), M = grid_.M;
  std::vector<double> rowscale(grid_.points() * 2);
  const std::size_t P = grid_.points();
  for (int j = 0; j <= M; ++j)
    for (int z = 0; z < S; ++z) {
      const std::size_t p = static_cast<std::size_t>(j) * S + z;
      const bool edge = j == 0 || j == M;
      const double hs = std::sqrt(warp_.h[z]);
      rowscale[p] = (edge && klass_ == BoundaryClass::Plus) ? 1.0 : hs;
      rowscale[P + p] = (edge && klass_ == BoundaryClass::Minus) ? 1.0 : hs;
    }
  auto scale = [&](Eigen::VectorXcd x) {
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) *= rowscale[i];
    return x;
  };
  const detail::LinOp A = [&](const Eigen::VectorXcd& x) {
    return scale(system_apply(SpinorGrid::unflatten(grid_, x)).flatten());
  };
  const detail::LinOp Minv = [&](const Eigen::VectorXcd& y) {
    return precondition(SpinorGrid::unflatten(grid_, y)).flatten();
  };
  const auto res = detail::gmres(A, Minv, scale(W.flatten()), 1e-13, 60, 60);
  stats_ = {res.iterations, res.relative_residual};
  if (!res.converged) {
    std::ostringstream s;
    s << "solve: GMRES stalled at relative residual " << res.relative_residual << " after "
      << res.iterations << " iterations";
    throw NonConvergenceError(s.str());
  }
  SpinorGrid out = SpinorGrid::unflatten(grid_, res.x);
  out.project(klass_);
  return out;
}

Eigen::MatrixXcd DiscreteOperator::dense_operator() const {
  const int S = grid_.slice(), M = grid_.M;
  const std::size_t P = grid_.points();
  std::vector<std::size_t> cols;  // flattened indices of class unknowns
  for (std::size_t p = 0; p < 2 * P; ++p) {
    const bool is_v = p >= P;
    const int j = static_cast<int>((is_v ? p - P : p) / S);
    const bool edge = j == 0 || j == M;
    if (edge && is_v && klass_ == BoundaryClass::Minus) continue;
    if (edge && !is_v && klass_ == BoundaryClass::Plus) continue;
    cols.push_back(p);
  }
  require(cols.size() <= 6000, "dense_operator: grid too large for dense assembly");
  Eigen::MatrixXcd A(2 * P, cols.size());
  Eigen::VectorXcd e = Eigen::VectorXcd::Zero(2 * P);
  for (std::size_t c = 0; c < cols.size(); ++c) {
    e(cols[c]) = 1.0;
    A.col(c) = apply(SpinorGrid::unflatten(grid_, e)).flatten();
    e(cols[c]) = 0.0;
  }
  return A;
}

// ---------------------------------------------------------------- free functions

cplx weighted_inner(const SpinorGrid& V, const SpinorGrid& W, const WarpProfile& warp) {
  require(V.grid == W.grid, "weighted_inner: grid mismatch");
  const auto& g = V.grid;
  require(warp.N2 == g.N2 && warp.N3 == g.N3, "weighted_inner: warp grid mismatch");
  const int S = g.slice();
  std::vector<double> wz(S);
  for (int z = 0; z < S; ++z) wz[z] = g.area_element() * std::sqrt(warp.h[z]);
  cplx total = 0.0;
  for (int j = 0; j <= g.M; ++j) {
    cplx slice = 0.0;
    for (int z = 0; z < S; ++z) {
      const std::size_t p = static_cast<std::size_t>(j) * S + z;
      slice += wz[z] * (std::conj(V.u[p]) * W.u[p] + std::conj(V.v[p]) * W.v[p]);
    }
    total += g.trap(j) * slice;
  }
  return total;
}

double adjointness_residual(const DiscreteOperator& D, const SpinorGrid& V, const SpinorGrid& W) {
  if (!V.in_class(BoundaryClass::Minus)) throw PreconditionError("adjointness_residual: V must vanish in v on the walls");
  if (!W.in_class(BoundaryClass::Plus)) throw PreconditionError("adjointness_residual: W must vanish in u on the walls");
  const cplx I(0.0, 1.0);
  auto prefactor = [&](SpinorGrid X) {
    for (auto& x : X.u) x *= I;
    for (auto& x : X.v) x *= -I;
    return X;
  };
  const SpinorGrid PDV = prefactor(D.apply(V));
  const SpinorGrid PDW = prefactor(D.apply(W));
  return std::abs(weighted_inner(PDV, W, D.warp()) - weighted_inner(V, PDW, D.warp()));
}

namespace {

SpinorGrid reflect(const SpinorGrid& V, int k, int u_sign, int v_sign) {
  require(k >= 1, "reflect_extend: k must be >= 1");
  if (k * V.grid.epsilon > 1.5)
    throw PreconditionError("reflect_extend: k*epsilon exceeds the working range 3/2");
  ThinCylinderGrid g = V.grid;
  g.epsilon = k * V.grid.epsilon;
  g.M = k * V.grid.M;
  SpinorGrid out = SpinorGrid::zeros(g);
  const int S = g.slice(), M = V.grid.M;
  for (int je = 0; je <= g.M; ++je) {
    int seg = je / M;
    if (seg == k) seg = k - 1;
    const int r = je - seg * M;
    const bool odd = seg % 2;
    const int src = odd ? M - r : r;
    const double su = odd ? u_sign : 1, sv = odd ? v_sign : 1;
    for (int z = 0; z < S; ++z) {
      out.u[static_cast<std::size_t>(je) * S + z] = su * V.u[static_cast<std::size_t>(src) * S + z];
      out.v[static_cast<std::size_t>(je) * S + z] = sv * V.v[static_cast<std::size_t>(src) * S + z];
    }
  }
  return out;
}

}  // namespace

SpinorGrid reflect_extend(const SpinorGrid& V, int k) {
  if (!V.in_class(BoundaryClass::Minus)) throw PreconditionError("reflect_extend: V must vanish in v on the walls");
  return reflect(V, k, 1, -1);
}

SpinorGrid reflect_extend_rhs(const SpinorGrid& W, int k) { return reflect(W, k, -1, 1); }

ReflectionResidual reflection_residual(const DiscreteOperator& ext, const SpinorGrid& V_ext,
                                       const SpinorGrid& W_ext, int k) {
  const SpinorGrid R = ext.apply(V_ext) - W_ext;
  const auto& g = ext.grid();
  require(k >= 1 && g.M % k == 0, "reflection_residual: M not divisible by k");
  const int seg = g.M / k, S = g.slice();
  ReflectionResidual out;
  for (int j = 0; j <= g.M; ++j) {
    const int r = j % seg;
    const int dist = std::min(r, seg - r);
    const bool outer = j == 0 || j == g.M;
    for (int z = 0; z < S; ++z) {
      const std::size_t p = static_cast<std::size_t>(j) * S + z;
      const double eu = std::abs(R.u[p]);
      const double ev = outer ? 0.0 : std::abs(R.v[p]);
      double& slot = dist >= 2 ? out.interior : out.wall;
      slot = std::max({slot, eu, ev});
    }
  }
  return out;
}

}  // namespace g2lab

#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <complex>
#include <memory>
#include <string>
#include <vector>

#include "g2lab/exec.hpp"

namespace g2lab {

using cplx = std::complex<double>;

namespace detail {
class Fft;
}

// [0, epsilon] x T^2 with M+1 collocation points in x1 and an N2 x N3 torus
// grid of period 2pi.
struct ThinCylinderGrid {
  double epsilon = 0.25;
  int M = 16;
  int N2 = 8;
  int N3 = 8;

  void validate() const;
  double dx() const { return epsilon / M; }
  int slice() const { return N2 * N3; }
  std::size_t points() const { return static_cast<std::size_t>(M + 1) * slice(); }
  double x1(int j) const { return j * dx(); }
  double trap(int j) const { return (j == 0 || j == M) ? 0.5 * dx() : dx(); }
  double area_element() const;
  double x2(int a) const;
  double x3(int b) const;
  friend bool operator==(const ThinCylinderGrid&, const ThinCylinderGrid&) = default;
};

// Bloch twist: sections pick up e^{2 pi i alpha} around the x2 circle.
struct TwistedBundle {
  double alpha = 0.5;
  double beta = 0.5;

  void validate() const;
  bool is_zero() const { return alpha == 0.0 && beta == 0.0; }
  friend bool operator==(const TwistedBundle&, const TwistedBundle&) = default;
};

// Analytic warp description, resampled onto any torus grid.
struct WarpSpec {
  enum class Kind { Constant, Cosine, Samples };
  Kind kind = Kind::Constant;
  double c0 = 1.0;
  double c1 = 0.0;
  double clip_K = 0.0;  // 0: no clipping

  static WarpSpec constant(double c) { return {Kind::Constant, c, 0.0, 0.0}; }
  static WarpSpec cosine(double c0, double c1, double clip_K) { return {Kind::Cosine, c0, c1, clip_K}; }
  // "const:c" or "cos:c0,c1[,K]"
  static WarpSpec parse(const std::string& s);
  std::string str() const;
};

struct WarpProfile {
  int N2 = 0, N3 = 0;
  std::vector<double> h;  // index a*N3 + b
  double K = 1.0;         // smallest K with 1/K <= h <= K
  double c1_hinv_sqrt = 1.0;  // sup|h^{-1/2}| + sup|grad h^{-1/2}|
  WarpSpec spec;

  static WarpProfile sample(const WarpSpec& spec, int N2, int N3);
  static WarpProfile from_samples(int N2, int N3, std::vector<double> h);
  bool is_constant() const;
  double sup_hinv_sqrt() const;
};

enum class BoundaryClass { Minus, Plus, None };

struct SpinorGrid {
  ThinCylinderGrid grid;
  std::vector<cplx> u, v;  // index (j*N2 + a)*N3 + b

  static SpinorGrid zeros(const ThinCylinderGrid& g);
  std::size_t index(int j, int a, int b) const {
    return (static_cast<std::size_t>(j) * grid.N2 + a) * grid.N3 + b;
  }
  // Zero the boundary slices of the constrained component.
  void project(BoundaryClass c);
  bool in_class(BoundaryClass c) const;

  SpinorGrid& operator+=(const SpinorGrid& o);
  SpinorGrid& operator-=(const SpinorGrid& o);
  SpinorGrid& operator*=(cplx s);
  friend SpinorGrid operator+(SpinorGrid a, const SpinorGrid& b) { return a += b; }
  friend SpinorGrid operator-(SpinorGrid a, const SpinorGrid& b) { return a -= b; }
  friend SpinorGrid operator*(cplx s, SpinorGrid a) { return a *= s; }

  Eigen::VectorXcd flatten() const;  // u block then v block
  static SpinorGrid unflatten(const ThinCylinderGrid& g, const Eigen::VectorXcd& x);
  double max_abs() const;
};

enum class X1Stencil {
  SummationByParts,     // first-order one-sided end rows; exact discrete Green identity
  OneSidedSecondOrder,  // (-3f0 + 4f1 - f2)/2dx closures
};

// h^{-1/2} d1 u + d+ v = w1, h^{-1/2} d1 v + d- u = w2 on the collocated grid,
// with d- -> -(k2 + i k3)/2 and d+ -> its conjugate on twisted Fourier modes.
// The unitary +-i prefactors of the three-dimensional Dirac operator are omitted.
class DiscreteOperator {
 public:
  DiscreteOperator(const ThinCylinderGrid& grid, const TwistedBundle& twist, const WarpProfile& warp,
                   BoundaryClass klass = BoundaryClass::Minus,
                   X1Stencil stencil = X1Stencil::SummationByParts);
  ~DiscreteOperator();
  DiscreteOperator(DiscreteOperator&&) noexcept;

  const ThinCylinderGrid& grid() const { return grid_; }
  const TwistedBundle& twist() const { return twist_; }
  const WarpProfile& warp() const { return warp_; }
  BoundaryClass boundary_class() const { return klass_; }
  X1Stencil stencil() const { return stencil_; }
  std::string scheme_tag() const;

  // Differential action at every node (2(M+1) rows per torus point).
  SpinorGrid apply(const SpinorGrid& V, Exec exec = Exec::Parallel) const;
  // Euclidean adjoint of apply.
  SpinorGrid apply_adjoint(const SpinorGrid& Y, Exec exec = Exec::Parallel) const;
  // Square system: apply with the constrained component's boundary rows
  // replaced by identity rows.
  SpinorGrid system_apply(const SpinorGrid& V, Exec exec = Exec::Parallel) const;
  // Solves system_apply(V) = W, ignoring W on the identity rows (set to 0).
  SpinorGrid solve(const SpinorGrid& W) const;

  struct SolveStats {
    int iterations = 0;
    double relative_residual = 0.0;
  };
  const SolveStats& last_solve_stats() const { return stats_; }

  // Mode (a, b) of the torus FFT grid.
  double kappa2(int a) const;
  double kappa3(int b) const;
  cplx symbol_minus(int a, int b) const;
  cplx symbol_plus(int a, int b) const { return std::conj(symbol_minus(a, b)); }
  // Per-mode matrices on interleaved unknowns (u_0, v_0, u_1, v_1, ...), with
  // h replaced by the constant hbar.
  Eigen::SparseMatrix<cplx> mode_operator(int a, int b, double hbar) const;  // 2(M+1) square, no BC rows
  Eigen::SparseMatrix<cplx> mode_system(int a, int b, double hbar) const;    // with identity rows
  // Columns kept for the boundary class (v_0 and v_M dropped for Minus).
  std::vector<int> class_columns() const;
  double hbar() const { return hbar_; }

  // Slice-wise torus FFT (unnormalized) and its inverse (normalized).
  void to_modes(std::vector<cplx>& f, Exec exec = Exec::Parallel) const;
  void from_modes(std::vector<cplx>& f, Exec exec = Exec::Parallel) const;
  void apply_symbol(std::vector<cplx>& f, bool minus, Exec exec = Exec::Parallel) const;

  // Dense matrix of apply restricted to class unknowns (small grids only).
  Eigen::MatrixXcd dense_operator() const;

  struct StencilRow {
    int col[3];
    double w[3];
    int n;
  };
  const std::vector<StencilRow>& d1_rows() const { return d1_; }

 private:
  void d1_apply(const std::vector<cplx>& f, std::vector<cplx>& out, bool transpose, Exec exec) const;
  SpinorGrid solve_constant(const SpinorGrid& W) const;
  SpinorGrid solve_gmres(const SpinorGrid& W) const;
  SpinorGrid precondition(const SpinorGrid& y) const;

  ThinCylinderGrid grid_;
  TwistedBundle twist_;
  WarpProfile warp_;
  BoundaryClass klass_;
  X1Stencil stencil_;
  std::vector<double> hinv_sqrt_;
  double hbar_ = 1.0;
  std::vector<StencilRow> d1_, d1t_;
  std::unique_ptr<detail::Fft> fft_;
  std::vector<std::unique_ptr<Eigen::SparseLU<Eigen::SparseMatrix<cplx>>>> lu_;
  mutable SolveStats stats_;
};

// Trapezoid in x1, exact in Sigma: sum trap_j dA h^{1/2} conj(V) W.
cplx weighted_inner(const SpinorGrid& V, const SpinorGrid& W, const WarpProfile& warp);

// |<P DV, W>_h - <V, P DW>_h| with P = diag(i, -i) restoring the dropped
// prefactors; V in the Minus class and W in the Plus class.
double adjointness_residual(const DiscreteOperator& D, const SpinorGrid& V, const SpinorGrid& W);

// u even, v odd across the walls; the result lives on [0, k epsilon].
SpinorGrid reflect_extend(const SpinorGrid& V, int k);
// Right-hand side parity: w1 odd, w2 even.
SpinorGrid reflect_extend_rhs(const SpinorGrid& W, int k);

struct ReflectionResidual {
  double interior = 0.0;  // nodes at distance >= 2 from every wall
  double wall = 0.0;      // remaining rows, excluding the outer identity rows
};
ReflectionResidual reflection_residual(const DiscreteOperator& extended, const SpinorGrid& V_ext,
                                       const SpinorGrid& W_ext, int k);

}  // namespace g2lab

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "g2lab/exec.hpp"
#include "g2lab/thin_dirac.hpp"

namespace g2lab {

// 1/4((m+alpha)^2 + (n+beta)^2) for m, n in [-nmodes, nmodes), ascending.
std::vector<double> surface_spectrum(const TwistedBundle& twist, int nmodes);
// Eigenvalues of the pseudospectral d+d- (or d-d+) assembled column by column
// on a 2*nmodes square torus grid.
std::vector<double> assembled_surface_spectrum(const TwistedBundle& twist, int nmodes, bool plus_minus = true);
// First eigenvalue over all integer modes.
double lambda_surface(const TwistedBundle& twist);

struct LambdaOptions {
  double tol = 1e-9;
  int max_iter = 200;
  double shift = 1e-8;
  std::uint64_t seed = 17;
};

struct LambdaResult {
  double value = 0.0;
  int iterations = 0;
  int inner_iterations = 0;
};

// Smallest <DV,DV>_h / <V,V>_h over nonzero class fields.
LambdaResult lambda_D(const DiscreteOperator& D, const LambdaOptions& opt = {});

// (1/K) min{lambda_surface, 2/(K eps^2) - K |h^{-1/2}|_{C^1}^2}
double lambda_bound(double epsilon, const TwistedBundle& twist, const WarpProfile& warp);

struct SpectrumReport {
  double lambda_surface_minus = 0.0;
  double lambda_surface_plus = 0.0;
  double lambda_D = 0.0;
  double lambda_D_refined = 0.0;
  double bound = 0.0;
  double margin = 0.0;  // lambda_D - bound, unclamped
  double refinement_change = 0.0;
  int iterations = 0;
  int M_refined = 0;
  bool stable = false;
  bool pass = false;
};

inline constexpr double kLambdaTol = 1e-6;
inline constexpr double kRefinementTol = 1e-2;

// Solves on grid and on grid with 2M, compares against lambda_bound.
SpectrumReport verify_lambda_bound(const ThinCylinderGrid& grid, const TwistedBundle& twist,
                                   const WarpProfile& warp, const LambdaOptions& opt = {});

// Singular values of the h-weighted class-restricted operator, ascending.
// Per mode for constant h, dense otherwise.
std::vector<double> singular_values(const DiscreteOperator& D);
// Real dimension: twice the number of singular values below threshold * sigma_max.
int kernel_dimension(const DiscreteOperator& D, double threshold = 1e-10);

// sup_z |trapezoid integral of u(., z)|
double mean_free_check(const SpinorGrid& V);

struct HolderOptions {
  double p = 12.0;
  double alpha = 1.0 / 12.0;
  std::size_t all_pairs_limit = 4096;  // grid points
  std::size_t sample_pairs = 1u << 21;
  std::uint64_t seed = 7;
};

struct DiscreteNorms {
  double sup = 0.0;
  double l2_weighted = 0.0;
  double lp = 0.0;
  double p = 12.0;
  double alpha = 1.0 / 12.0;
  double holder_x = 0.0;     // pairs sharing z
  double holder_z = 0.0;     // pairs sharing x1
  double holder_full = 0.0;  // all (or sampled) pairs
  bool subsampled = false;
  std::size_t pairs = 0;
  double c0_alpha() const { return sup + holder_full; }
};

// Hoelder quotients use the distance sqrt(hbar dx1^2 + d_T(z,z')^2) with
// hbar the mean of h at the two torus points; fields are taken in their
// periodic representative.
DiscreteNorms discrete_norms(const SpinorGrid& V, const WarpProfile& warp, const HolderOptions& opt = {},
                             Exec exec = Exec::Parallel);

enum class Probe { BoundaryHard, CaseOne, RandomSmooth };
std::string probe_name(Probe p);
Probe parse_probe(const std::string& s);
// Right-hand sides: (w1, 0) with w1 nonzero on the walls, (0, w2), and a
// seeded smooth field.
SpinorGrid probe_rhs(Probe p, const ThinCylinderGrid& g, std::uint64_t seed);

struct GridPolicy {
  enum class Kind { FixedM, FixedDx };
  Kind kind = Kind::FixedM;
  int M = 32;
  double dx = 0.0125;
  int N2 = 8, N3 = 8;
  int min_M = 8;
  int resolve(double epsilon) const;
};

struct ScalingConfig {
  std::vector<double> epsilons{0.4, 0.2, 0.1, 0.05, 0.025};
  GridPolicy grid;
  TwistedBundle twist;
  WarpSpec warp;
  double p = 12.0;
  double alpha = 1.0 / 12.0;
  std::vector<Probe> probes{Probe::BoundaryHard, Probe::CaseOne, Probe::RandomSmooth};
  std::uint64_t seed = 1;
  LambdaOptions lambda;
};

struct ScalingCell {
  double epsilon = 0.0;
  int M = 0;
  double sigma_min = 0.0;
  double sigma_bound = 0.0;
  std::vector<double> sup_ratios;     // |V|_C0 / |W|_Calpha per probe
  std::vector<double> holder_ratios;  // |V|_C0alpha / |W|_Calpha per probe
  bool subsampled = false;
};

struct ScalingReport {
  std::vector<double> epsilons;
  std::vector<int> Ms;
  std::vector<double> inverse_sup_norms;
  std::vector<double> inverse_holder_norms;
  std::vector<double> sigma_mins;
  std::vector<double> sigma_bounds;
  std::vector<ScalingCell> cells;
  std::vector<Probe> probes;
  double fitted_exponent = 0.0;
  double fitted_exponent_holder = 0.0;
  double target_exponent = 0.0;
  bool exponent_ok = false;
  bool sigma_ok = false;
  bool pass() const { return exponent_ok && sigma_ok; }
};

inline constexpr double kExponentSlack = 0.1;
inline constexpr double kSigmaSlack = 1e-3;

// Least-squares e in values ~ C eps^{-e}; needs at least 3 points.
double fit_exponent(const std::vector<double>& eps, const std::vector<double>& values);
// 3/p + 3 alpha <= 1/2 with p > 3, alpha in (0, 1).
void validate_holder_parameters(double p, double alpha);

ScalingReport inverse_scaling_experiment(const ScalingConfig& cfg, Exec exec = Exec::Parallel);

}  // namespace g2lab

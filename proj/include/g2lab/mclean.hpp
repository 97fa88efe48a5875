#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <vector>

#include "g2lab/calibration.hpp"
#include "g2lab/exec.hpp"
#include "g2lab/octonion.hpp"

namespace g2lab {

// V = V^4 e4 + ... + V^7 e7 over the unit cube of Im H. The field is an affine
// part sum_i linear(i,k) x_i plus a 1-periodic lattice part.
struct NormalField {
  int n = 0;  // lattice points per axis
  std::vector<std::array<double, 4>> periodic;  // index (i1*n + i2)*n + i3
  Eigen::Matrix<double, 3, 4> linear = Eigen::Matrix<double, 3, 4>::Zero();

  double spacing() const { return 1.0 / n; }
  std::size_t points() const { return periodic.size(); }
  std::size_t index(int i1, int i2, int i3) const {
    return (static_cast<std::size_t>(i1) * n + i2) * n + i3;
  }

  static NormalField zero(int n);
  static NormalField constant(int n, const std::array<double, 4>& value);
  static NormalField affine(int n, const Eigen::Matrix<double, 3, 4>& linear);
  // Random trigonometric polynomial with |frequency| <= max_mode per axis.
  static NormalField band_limited(int n, int max_mode, std::uint64_t seed, double amplitude = 1.0);
};

// V_i^k = dV^k(e_i); d[i-1][k-4].
struct JetSample {
  std::array<std::array<double, 4>, 3> d{};
  double operator()(int i, int k) const { return d[i - 1][k - 4]; }
  double& operator()(int i, int k) { return d[i - 1][k - 4]; }
};

// Spectral first derivatives at every lattice point.
std::vector<JetSample> jets(const NormalField& v);

// tau(d1 Phi, d2 Phi, d3 Phi) for Phi_t(x) = (x, t V(x)).
std::vector<ImOcton> pullback_tau_graph(const std::vector<JetSample>& jet, double t,
                                        Exec exec = Exec::Parallel);
std::vector<ImOcton> pullback_tau_graph(const NormalField& v, double t, Exec exec = Exec::Parallel);

struct FdLinearization {
  std::vector<ImOcton> values;  // Richardson limit per point
  std::array<double, 3> steps{};
  // Observed t-order from the three central differences; unresolved when the
  // differences are at rounding level (F cubic term vanishes).
  double observed_order = 0.0;
  bool order_resolved = false;
  double richardson_change = 0.0;  // max |R - D(h2)|
};

FdLinearization fd_linearization(const NormalField& v, std::array<double, 2> steps = {1e-2, 5e-3},
                                 Exec exec = Exec::Parallel);

ImOcton twisted_dirac(const JetSample& j);
ImOcton twisted_dirac_cross(const JetSample& j);  // sum_i e_i x (sum_k V_i^k e_k)

std::vector<ImOcton> twisted_dirac_flat(const NormalField& v, Exec exec = Exec::Parallel);
std::vector<ImOcton> twisted_dirac_cross_form(const NormalField& v, Exec exec = Exec::Parallel);

// Max residual among the cross-product, closed-form and Dolbeault evaluations.
double dolbeault_agreement(const Frame& seed, const JetSample& jet);

double max_deviation(const std::vector<ImOcton>& a, const std::vector<ImOcton>& b);

}  // namespace g2lab

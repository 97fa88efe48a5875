#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "g2lab/octonion.hpp"

namespace g2lab {

struct Frame {
  std::vector<ImOcton> vectors;
  double orthonormality_residual = 0.0;  // max |g(W_a,W_b) - delta_ab|

  Frame() = default;
  explicit Frame(std::vector<ImOcton> v);
  static Frame standard(std::initializer_list<int> indices);

  std::size_t size() const { return vectors.size(); }
  const ImOcton& operator[](std::size_t i) const { return vectors[i]; }
  bool orthonormal(double tol = 1e-12) const { return orthonormality_residual <= tol; }
};

struct AssociativeResidual {
  double norm;
  ImOcton tau;
};

AssociativeResidual associative_residual(const Frame& f);
double coassociative_residual(const Frame& f);

// {W1, W2, W1xW2, W4, W1xW4, W2xW4, (W1xW2)xW4}.
Frame cayley_dickson_frame(const ImOcton& w1, const ImOcton& w2, const ImOcton& w4);

// max |g(W_a x W_b, W_c) - g(e_a x e_b, e_c)| over all a,b,c.
double structure_constant_residual(const Frame& f);

// Signed permutations of e1..e7 preserving the Omega table (brute force).
struct SignedPermutation {
  std::array<int, 7> target;  // e_i -> sign[i] * e_{target[i]}
  std::array<int, 7> sign;
  ImOcton apply(const ImOcton& u) const;
};
const std::vector<SignedPermutation>& g2_signed_permutations();

// Normal part of tau on A = span{e1, e2, e3 + sum_a t_a e_a}, a = 4..7.
ImOcton almost_instanton_normal(const std::array<double, 4>& t);

struct AlmostInstanton {
  ImOcton normal;
  Eigen::Matrix4d jacobian;  // d(normal coords 4..7)/dt at t = 0
  double sigma_min;
};

AlmostInstanton almost_instanton_map(const std::array<double, 4>& t, double step = 1e-5);

ImOcton jn_apply(const ImOcton& n, const ImOcton& u);

// Two-form on a 4-plane, coefficients on frame pairs (01,02,03,12,13,23).
struct SelfDualForm {
  std::array<double, 6> coeff{};
  Frame basis_frame;
  int orientation = 1;  // relative to the frame order

  double operator()(int a, int b) const;  // frame indices 0..3
  double norm() const;
  double wedge_square() const;  // eta^eta on the ordered frame
  std::array<double, 6> hodge_star() const;
  double self_duality_residual() const;
};

SelfDualForm eta_from_normal(const ImOcton& n, const Frame& c);

// max over frame pairs of |eta0(W_a,W_b)/|n| - g(J_n W_a, W_b)|.
double hermitian_compat_residual(const ImOcton& n, const Frame& c);

// sqrt(|P(J_n T1)|^2 + |P(J_n T2)|^2), P the projection onto T's complement.
double j_holomorphic_residual(const Frame& t, const ImOcton& n);

}  // namespace g2lab

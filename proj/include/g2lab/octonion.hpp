#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace g2lab {

// Element of Im O = Im H (+) H. Coefficients are indexed 1..7 through
// operator(); c[0..2] is the Im H part, c[3..6] the H part (1, i, j, k).
template <class T>
struct BasicImOcton {
  std::array<T, 7> c{};

  static BasicImOcton basis(int i) {
    BasicImOcton e;
    e.c[i - 1] = T(1);
    return e;
  }
  T& operator()(int i) { return c[i - 1]; }
  const T& operator()(int i) const { return c[i - 1]; }

  BasicImOcton& operator+=(const BasicImOcton& o) {
    for (int i = 0; i < 7; ++i) c[i] += o.c[i];
    return *this;
  }
  BasicImOcton& operator-=(const BasicImOcton& o) {
    for (int i = 0; i < 7; ++i) c[i] -= o.c[i];
    return *this;
  }
  BasicImOcton& operator*=(T s) {
    for (auto& x : c) x *= s;
    return *this;
  }
  friend BasicImOcton operator+(BasicImOcton a, const BasicImOcton& b) { return a += b; }
  friend BasicImOcton operator-(BasicImOcton a, const BasicImOcton& b) { return a -= b; }
  friend BasicImOcton operator-(BasicImOcton a) { return a *= T(-1); }
  friend BasicImOcton operator*(T s, BasicImOcton a) { return a *= s; }
  friend BasicImOcton operator*(BasicImOcton a, T s) { return a *= s; }
  friend bool operator==(const BasicImOcton&, const BasicImOcton&) = default;
};

using ImOcton = BasicImOcton<double>;
using ImOctonZ = BasicImOcton<std::int64_t>;

template <class T>
T dot(const BasicImOcton<T>& a, const BasicImOcton<T>& b) {
  T s{};
  for (int i = 0; i < 7; ++i) s += a.c[i] * b.c[i];
  return s;
}

inline double norm(const ImOcton& a) { return std::sqrt(dot(a, a)); }

namespace detail {

template <class T>
using Quat = std::array<T, 4>;

template <class T>
Quat<T> qmul(const Quat<T>& p, const Quat<T>& q) {
  return {p[0] * q[0] - p[1] * q[1] - p[2] * q[2] - p[3] * q[3],
          p[0] * q[1] + p[1] * q[0] + p[2] * q[3] - p[3] * q[2],
          p[0] * q[2] - p[1] * q[3] + p[2] * q[0] + p[3] * q[1],
          p[0] * q[3] + p[1] * q[2] - p[2] * q[1] + p[3] * q[0]};
}

template <class T>
Quat<T> qconj(const Quat<T>& q) {
  return {q[0], -q[1], -q[2], -q[3]};
}

}  // namespace detail

// Imaginary part of the Cayley-Dickson product (a,b)(c,d) = (ac - d*b, da + bc*).
template <class T>
BasicImOcton<T> cross(const BasicImOcton<T>& x, const BasicImOcton<T>& y) {
  using Q = detail::Quat<T>;
  const Q a{T(0), x.c[0], x.c[1], x.c[2]};
  const Q b{x.c[3], x.c[4], x.c[5], x.c[6]};
  const Q c{T(0), y.c[0], y.c[1], y.c[2]};
  const Q d{y.c[3], y.c[4], y.c[5], y.c[6]};
  const Q ac = detail::qmul(a, c);
  const Q dsb = detail::qmul(detail::qconj(d), b);
  const Q da = detail::qmul(d, a);
  const Q bcs = detail::qmul(b, detail::qconj(c));
  BasicImOcton<T> r;
  for (int i = 1; i < 4; ++i) r.c[i - 1] = ac[i] - dsb[i];
  for (int i = 0; i < 4; ++i) r.c[3 + i] = da[i] + bcs[i];
  return r;
}

// Omega(u,v,w) = g(u x v, w).
template <class T>
T g2_form(const BasicImOcton<T>& u, const BasicImOcton<T>& v, const BasicImOcton<T>& w) {
  return dot(cross(u, v), w);
}

// The raw associator expression -u x (v x w) - g(u,v) w + g(u,w) v. Alternating
// only on orthonormal arguments.
template <class T>
BasicImOcton<T> tau_formula(const BasicImOcton<T>& u, const BasicImOcton<T>& v,
                            const BasicImOcton<T>& w) {
  BasicImOcton<T> r = -cross(u, cross(v, w));
  r -= dot(u, v) * w;
  r += dot(u, w) * v;
  return r;
}

struct Triple {
  int i, j, k;
};

// The 35 increasing basis triples in lexicographic order.
const std::array<Triple, 35>& basis_triples();
int triple_index(int i, int j, int k);  // requires i<j<k

// Sign of the permutation sorting (a...) and the sorted result; 0 on repeats.
int permutation_sign(std::vector<int>& idx);

// Coefficients of a vector-valued 3-form: coeff(i,j,k,alpha) with i<j<k.
class VectorValuedForm {
 public:
  int at(int i, int j, int k, int alpha) const;  // any order of i,j,k
  void set(int i, int j, int k, int alpha, int value);
  int nonzero_count() const;
  friend bool operator==(const VectorValuedForm&, const VectorValuedForm&) = default;

 private:
  std::array<std::array<int, 7>, 35> coeff_{};
};

// Coordinate table of Omega: w123 - w167 - w527 - w563 - w154 - w264 - w374.
struct OmegaTerm {
  int i, j, k, sign;
};
const std::array<OmegaTerm, 7>& omega_terms();
int omega_table(int i, int j, int k);

// Coordinate table of tau, with the sign corrections noted in the README.
const VectorValuedForm& tau_table();

// tau(e_i,e_j,e_k) evaluated by the Cayley-Dickson formula in integers.
ImOctonZ tau_basis_exact(int i, int j, int k);

// Trilinear alternating extension of a table to arbitrary vectors.
ImOcton tau(const ImOcton& u, const ImOcton& v, const ImOcton& w, const VectorValuedForm& table);
inline ImOcton tau(const ImOcton& u, const ImOcton& v, const ImOcton& w) {
  return tau(u, v, w, tau_table());
}

enum class Orientation : int { Positive = 1, Negative = -1 };

// Orientation under which *Omega(u,v,w,z) = g(tau(u,v,w), z); e1^...^e7 is
// Positive.
inline constexpr Orientation kTauOrientation = Orientation::Negative;

// 4-form coefficient of *Omega on the increasing quadruple (l<m<n<p).
int star_omega_coefficient(int l, int m, int n, int p, Orientation o = kTauOrientation);
double star_omega(const ImOcton& u, const ImOcton& v, const ImOcton& w, const ImOcton& z,
                  Orientation o = kTauOrientation);

struct TableMismatch {
  int i, j, k, alpha;
  int table_value;
  std::int64_t formula_value;
  std::string describe() const;
};

// Entries where the formula and the table disagree (exact integers).
std::vector<TableMismatch> tau_table_mismatches(const VectorValuedForm& table);
std::vector<TableMismatch> omega_table_mismatches();

}  // namespace g2lab

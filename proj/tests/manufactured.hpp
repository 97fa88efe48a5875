#pragma once

// Manufactured fields for the thin-cylinder system with exact right-hand sides.

#include <cmath>
#include <numbers>
#include <vector>

#include "g2lab/thin_dirac.hpp"

namespace mms {

using g2lab::cplx;

struct Term {
  int comp;      // 0: u, 1: v
  int m, k;      // torus frequencies of the periodic representative
  cplx c;
  double freq;   // x1 profile: u -> cos(freq*x/eps + phase), v -> sin(pi*freq*x/eps)
  double phase;
};

inline double profile(const Term& t, double x, double eps) {
  return t.comp == 0 ? std::cos(t.freq * x / eps + t.phase) : std::sin(std::numbers::pi * t.freq * x / eps);
}

inline double dprofile(const Term& t, double x, double eps) {
  return t.comp == 0 ? -t.freq / eps * std::sin(t.freq * x / eps + t.phase)
                     : std::numbers::pi * t.freq / eps * std::cos(std::numbers::pi * t.freq * x / eps);
}

inline std::vector<Term> default_terms() {
  return {{0, 0, 0, cplx(1.0, 0.2), 1.3, 0.4},
          {0, 1, -1, cplx(-0.3, 0.5), 2.1, -0.7},
          {1, 0, 1, cplx(0.6, -0.4), 1.0, 0.0},
          {1, -1, 0, cplx(0.2, 0.3), 2.0, 0.0}};
}

struct Problem {
  g2lab::SpinorGrid V;  // exact solution (Minus class)
  g2lab::SpinorGrid W;  // exact differential right-hand side at every node
};

inline Problem build(const g2lab::ThinCylinderGrid& g, const g2lab::TwistedBundle& tw,
                     const g2lab::WarpProfile& warp, const std::vector<Term>& terms = default_terms()) {
  Problem p{g2lab::SpinorGrid::zeros(g), g2lab::SpinorGrid::zeros(g)};
  for (const auto& t : terms) {
    const double k2 = t.m + tw.alpha, k3 = t.k + tw.beta;
    const cplx sm = -0.5 * cplx(k2, k3), sp = std::conj(sm);
    for (int j = 0; j <= g.M; ++j) {
      const double x = g.x1(j);
      const double f = profile(t, x, g.epsilon), df = dprofile(t, x, g.epsilon);
      for (int a = 0; a < g.N2; ++a)
        for (int b = 0; b < g.N3; ++b) {
          const std::size_t i = p.V.index(j, a, b);
          const cplx ph = t.c * std::polar(1.0, t.m * g.x2(a) + t.k * g.x3(b));
          const double r = 1.0 / std::sqrt(warp.h[a * g.N3 + b]);
          if (t.comp == 0) {
            p.V.u[i] += ph * f;
            p.W.u[i] += r * ph * df;
            p.W.v[i] += sm * ph * f;
          } else {
            p.V.v[i] += ph * f;
            p.W.v[i] += r * ph * df;
            p.W.u[i] += sp * ph * f;
          }
        }
    }
  }
  p.V.project(g2lab::BoundaryClass::Minus);  // sin profiles vanish; remove rounding
  return p;
}

inline double max_abs_diff(const g2lab::SpinorGrid& a, const g2lab::SpinorGrid& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.u.size(); ++i) {
    m = std::max(m, std::abs(a.u[i] - b.u[i]));
    m = std::max(m, std::abs(a.v[i] - b.v[i]));
  }
  return m;
}

// Single twisted mode (a, b) of the FFT grid with x1 profile values.
inline g2lab::SpinorGrid mode_field(const g2lab::ThinCylinderGrid& g, int ma, int mb,
                                    const std::vector<cplx>& u, const std::vector<cplx>& v) {
  auto s = g2lab::SpinorGrid::zeros(g);
  for (int j = 0; j <= g.M; ++j)
    for (int a = 0; a < g.N2; ++a)
      for (int b = 0; b < g.N3; ++b) {
        const cplx ph = std::polar(1.0, ma * g.x2(a) + mb * g.x3(b));
        s.u[s.index(j, a, b)] = u[j] * ph;
        s.v[s.index(j, a, b)] = v[j] * ph;
      }
  return s;
}

inline double order(double coarse, double fine) { return std::log2(coarse / fine); }

}  // namespace mms

#include "g2lab/mclean.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "fft.hpp"
#include "g2lab/error.hpp"

namespace g2lab {

using cplx = std::complex<double>;

NormalField NormalField::zero(int n) {
  require(n >= 4, "NormalField: need at least 4 points per axis");
  NormalField f;
  f.n = n;
  f.periodic.assign(static_cast<std::size_t>(n) * n * n, {0, 0, 0, 0});
  return f;
}

NormalField NormalField::constant(int n, const std::array<double, 4>& value) {
  NormalField f = zero(n);
  std::fill(f.periodic.begin(), f.periodic.end(), value);
  return f;
}

NormalField NormalField::affine(int n, const Eigen::Matrix<double, 3, 4>& linear) {
  NormalField f = zero(n);
  f.linear = linear;
  return f;
}

NormalField NormalField::band_limited(int n, int max_mode, std::uint64_t seed, double amplitude) {
  require(max_mode >= 0 && n > 2 * max_mode + 1, "NormalField::band_limited: grid too coarse for modes");
  NormalField f = zero(n);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double tau2 = 2.0 * std::numbers::pi;
  for (int k = 0; k < 4; ++k)
    for (int m1 = -max_mode; m1 <= max_mode; ++m1)
      for (int m2 = -max_mode; m2 <= max_mode; ++m2)
        for (int m3 = 0; m3 <= max_mode; ++m3) {
          const double damp = amplitude / (1.0 + m1 * m1 + m2 * m2 + m3 * m3);
          const double a = damp * gauss(rng), b = damp * gauss(rng);
          for (int i1 = 0; i1 < n; ++i1)
            for (int i2 = 0; i2 < n; ++i2)
              for (int i3 = 0; i3 < n; ++i3) {
                const double ph = tau2 * (m1 * i1 + m2 * i2 + m3 * i3) / n;
                f.periodic[f.index(i1, i2, i3)][k] += a * std::cos(ph) + b * std::sin(ph);
              }
        }
  return f;
}

std::vector<JetSample> jets(const NormalField& v) {
  const int n = v.n;
  const std::size_t np = v.points();
  require(n >= 4 && np == static_cast<std::size_t>(n) * n * n, "jets: malformed NormalField");
  detail::Fft fft({n, n, n});
  std::vector<JetSample> out(np);
  std::vector<cplx> hat(np), work(np);
  const double tau2 = 2.0 * std::numbers::pi;
  for (int k = 0; k < 4; ++k) {
    for (std::size_t p = 0; p < np; ++p) hat[p] = v.periodic[p][k];
    fft.forward(hat.data());
    for (int axis = 0; axis < 3; ++axis) {
      for (int i1 = 0; i1 < n; ++i1)
        for (int i2 = 0; i2 < n; ++i2)
          for (int i3 = 0; i3 < n; ++i3) {
            const int idx[3] = {i1, i2, i3};
            const int a = idx[axis];
            const int m = (2 * a == n) ? 0 : detail::signed_frequency(a, n);
            const std::size_t p = v.index(i1, i2, i3);
            work[p] = hat[p] * cplx(0.0, tau2 * m) / static_cast<double>(np);
          }
      fft.backward(work.data());
      for (std::size_t p = 0; p < np; ++p) out[p].d[axis][k] = work[p].real() + v.linear(axis, k);
    }
  }
  return out;
}

namespace {

ImOcton graph_tau(const JetSample& j, double t) {
  std::array<ImOcton, 3> dphi;
  for (int i = 1; i <= 3; ++i) {
    dphi[i - 1] = ImOcton::basis(i);
    for (int k = 4; k <= 7; ++k) dphi[i - 1](k) = t * j(i, k);
  }
  return tau(dphi[0], dphi[1], dphi[2]);
}

template <class F>
std::vector<ImOcton> per_point(std::size_t np, Exec exec, F&& f) {
  std::vector<ImOcton> out(np);
  const long long n = static_cast<long long>(np);
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel)
  for (long long p = 0; p < n; ++p) out[p] = f(static_cast<std::size_t>(p));
  return out;
}

}  // namespace

std::vector<ImOcton> pullback_tau_graph(const std::vector<JetSample>& jet, double t, Exec exec) {
  return per_point(jet.size(), exec, [&](std::size_t p) { return graph_tau(jet[p], t); });
}

std::vector<ImOcton> pullback_tau_graph(const NormalField& v, double t, Exec exec) {
  return pullback_tau_graph(jets(v), t, exec);
}

double max_deviation(const std::vector<ImOcton>& a, const std::vector<ImOcton>& b) {
  require(a.size() == b.size(), "max_deviation: size mismatch");
  double r = 0;
  for (std::size_t p = 0; p < a.size(); ++p)
    for (int i = 0; i < 7; ++i) r = std::max(r, std::abs(a[p].c[i] - b[p].c[i]));
  return r;
}

FdLinearization fd_linearization(const NormalField& v, std::array<double, 2> steps, Exec exec) {
  require(steps[0] > 0 && steps[1] > 0 && steps[1] < steps[0],
          "fd_linearization: steps must be positive and decreasing");
  const auto jet = jets(v);
  FdLinearization out;
  out.steps = {steps[0], steps[1], steps[1] * steps[1] / steps[0]};
  std::array<std::vector<ImOcton>, 3> d;
  for (int s = 0; s < 3; ++s) {
    const double h = out.steps[s];
    const auto fp = pullback_tau_graph(jet, h, exec);
    const auto fm = pullback_tau_graph(jet, -h, exec);
    d[s].resize(jet.size());
    for (std::size_t p = 0; p < jet.size(); ++p) d[s][p] = (fp[p] - fm[p]) * (0.5 / h);
  }
  const double q2 = std::pow(steps[0] / steps[1], 2);
  out.values.resize(jet.size());
  for (std::size_t p = 0; p < jet.size(); ++p)
    out.values[p] = (q2 * d[1][p] - d[0][p]) * (1.0 / (q2 - 1.0));
  out.richardson_change = max_deviation(out.values, d[1]);

  const double e12 = max_deviation(d[0], d[1]);
  const double e23 = max_deviation(d[1], d[2]);
  double scale = 1.0;
  for (const auto& x : d[2]) scale = std::max(scale, norm(x));
  out.order_resolved = e23 > 1e-12 * scale;
  out.observed_order = out.order_resolved ? std::log(e12 / e23) / std::log(steps[0] / steps[1]) : 0.0;
  return out;
}

ImOcton twisted_dirac(const JetSample& j) {
  ImOcton r;
  r(4) = -(j(1, 5) + j(2, 6) + j(3, 7));
  r(5) = j(1, 4) + j(3, 6) - j(2, 7);
  r(6) = j(2, 4) - j(3, 5) + j(1, 7);
  r(7) = j(3, 4) + j(2, 5) - j(1, 6);
  return r;
}

ImOcton twisted_dirac_cross(const JetSample& j) {
  ImOcton r;
  for (int i = 1; i <= 3; ++i) {
    ImOcton grad;
    for (int k = 4; k <= 7; ++k) grad(k) = j(i, k);
    r += cross(ImOcton::basis(i), grad);
  }
  return r;
}

std::vector<ImOcton> twisted_dirac_flat(const NormalField& v, Exec exec) {
  const auto jet = jets(v);
  return per_point(jet.size(), exec, [&](std::size_t p) { return twisted_dirac(jet[p]); });
}

std::vector<ImOcton> twisted_dirac_cross_form(const NormalField& v, Exec exec) {
  const auto jet = jets(v);
  return per_point(jet.size(), exec, [&](std::size_t p) { return twisted_dirac_cross(jet[p]); });
}

double dolbeault_agreement(const Frame& w, const JetSample& jet) {
  require(w.size() == 7, "dolbeault_agreement: need a 7-frame");
  const double sc = structure_constant_residual(w);
  if (!w.orthonormal(1e-10) || sc > 1e-10)
    throw PreconditionError("dolbeault_agreement: not a Cayley-Dickson frame (structure residual " +
                            std::to_string(sc) + ")");
  const auto W = [&](int a) -> const ImOcton& { return w[a - 1]; };

  // Cross-product side.
  ImOcton dv;
  for (int i = 2; i <= 3; ++i) {
    ImOcton grad;
    for (int k = 4; k <= 7; ++k) grad += jet(i, k) * W(k);
    dv += cross(W(i), grad);
  }

  // Closed-form coefficients.
  const double c4 = -(jet(2, 6) + jet(3, 7)), c5 = jet(3, 6) - jet(2, 7);
  const double c6 = jet(2, 4) - jet(3, 5), c7 = jet(3, 4) + jet(2, 5);
  const ImOcton closed = c4 * W(4) + c5 * W(5) + c6 * W(6) + c7 * W(7);

  // Dolbeault side: a = V4 + iV5, b = V6 + iV7, dbar U = (-(d2 - i d3) b, (d2 + i d3) a),
  // then mapped back through the conjugate-linear bundle map.
  const auto d = [&](int i, int re, int im) { return cplx(jet(i, re), jet(i, im)); };
  const cplx I(0.0, 1.0);
  const cplx alpha = -(d(2, 6, 7) - I * d(3, 6, 7));
  const cplx beta = d(2, 4, 5) + I * d(3, 4, 5);
  const ImOcton f4 = -0.5 * (cross(W(4), W(2)) - cross(cross(W(1), W(4)), W(3)));
  const ImOcton f5 = -0.5 * (cross(W(5), W(2)) - cross(cross(W(1), W(5)), W(3)));
  const ImOcton dolb = alpha.real() * W(4) + alpha.imag() * W(5) + beta.real() * f4 + beta.imag() * f5;

  return std::max(max_deviation({dv}, {closed}), max_deviation({dv}, {dolb}));
}

}  // namespace g2lab

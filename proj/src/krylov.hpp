#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <functional>
#include <vector>

namespace g2lab::detail {

using Vec = Eigen::VectorXcd;
using LinOp = std::function<Vec(const Vec&)>;

struct KrylovResult {
  Vec x;
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

// Restarted GMRES with right preconditioning: solves A x = b via A M^{-1} y = b.
inline KrylovResult gmres(const LinOp& A, const LinOp& Minv, const Vec& b, double tol, int restart,
                          int max_restarts) {
  KrylovResult res;
  const Eigen::Index n = b.size();
  res.x = Vec::Zero(n);
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    res.converged = true;
    return res;
  }
  Vec r = b;
  for (int cycle = 0; cycle < max_restarts; ++cycle) {
    const double beta = r.norm();
    res.relative_residual = beta / bnorm;
    if (res.relative_residual <= tol) {
      res.converged = true;
      return res;
    }
    std::vector<Vec> V{r / beta};
    std::vector<Vec> Z;
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(restart + 1, restart);
    std::vector<std::complex<double>> cs(restart), sn(restart);
    Vec g = Vec::Zero(restart + 1);
    g(0) = beta;
    int k = 0;
    for (; k < restart; ++k) {
      Z.push_back(Minv(V[k]));
      Vec w = A(Z[k]);
      for (int i = 0; i <= k; ++i) {
        H(i, k) = V[i].dot(w);
        w -= H(i, k) * V[i];
      }
      const double hn = w.norm();
      H(k + 1, k) = hn;
      for (int i = 0; i < k; ++i) {
        const auto t = cs[i] * H(i, k) + sn[i] * H(i + 1, k);
        H(i + 1, k) = -std::conj(sn[i]) * H(i, k) + std::conj(cs[i]) * H(i + 1, k);
        H(i, k) = t;
      }
      const double ak = std::abs(H(k, k));
      if (ak == 0.0) {
        cs[k] = 0.0;
        sn[k] = 1.0;
      } else {
        const double den = std::hypot(ak, hn);
        cs[k] = ak / den;
        sn[k] = (H(k, k) / ak) * (hn / den);
      }
      const auto t = cs[k] * H(k, k) + sn[k] * H(k + 1, k);
      H(k + 1, k) = 0.0;
      H(k, k) = t;
      g(k + 1) = -std::conj(sn[k]) * g(k);
      g(k) = cs[k] * g(k);
      ++res.iterations;
      if (std::abs(g(k + 1)) / bnorm <= tol || hn == 0.0) {
        ++k;
        break;
      }
      V.push_back(w / hn);
    }
    Vec y = H.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
    for (int i = 0; i < k; ++i) res.x += y(i) * Z[i];
    r = b - A(res.x);
  }
  res.relative_residual = r.norm() / bnorm;
  res.converged = res.relative_residual <= tol;
  return res;
}

// Preconditioned conjugate gradients for a Hermitian positive definite A.
inline KrylovResult pcg(const LinOp& A, const LinOp& Minv, const Vec& b, const Vec& x0, double tol,
                        int max_iter) {
  KrylovResult res;
  res.x = x0;
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    res.x.setZero();
    res.converged = true;
    return res;
  }
  Vec r = b - A(res.x);
  Vec z = Minv(r);
  Vec p = z;
  std::complex<double> rz = r.dot(z);
  for (int it = 0; it < max_iter; ++it) {
    res.relative_residual = r.norm() / bnorm;
    if (res.relative_residual <= tol) {
      res.converged = true;
      return res;
    }
    const Vec Ap = A(p);
    const std::complex<double> alpha = rz / p.dot(Ap);
    res.x += alpha * p;
    r -= alpha * Ap;
    z = Minv(r);
    const std::complex<double> rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
    ++res.iterations;
  }
  res.relative_residual = r.norm() / bnorm;
  res.converged = res.relative_residual <= tol;
  return res;
}

}  // namespace g2lab::detail

#include "g2lab/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "g2lab/error.hpp"

namespace g2lab {

Frame::Frame(std::vector<ImOcton> v) : vectors(std::move(v)) {
  double r = 0;
  for (std::size_t a = 0; a < vectors.size(); ++a)
    for (std::size_t b = a; b < vectors.size(); ++b)
      r = std::max(r, std::abs(dot(vectors[a], vectors[b]) - (a == b ? 1.0 : 0.0)));
  orthonormality_residual = r;
}

Frame Frame::standard(std::initializer_list<int> indices) {
  std::vector<ImOcton> v;
  for (int i : indices) v.push_back(ImOcton::basis(i));
  return Frame(std::move(v));
}

static void require_orthonormal(const Frame& f, std::size_t k, const char* who) {
  if (f.size() != k) {
    std::ostringstream s;
    s << who << ": expected " << k << " vectors, got " << f.size();
    throw PreconditionError(s.str());
  }
  if (!f.orthonormal(1e-10)) {
    std::ostringstream s;
    s << who << ": frame not orthonormal (residual " << f.orthonormality_residual << ")";
    throw PreconditionError(s.str());
  }
}

AssociativeResidual associative_residual(const Frame& f) {
  require_orthonormal(f, 3, "associative_residual");
  const ImOcton t = tau(f[0], f[1], f[2]);
  return {norm(t), t};
}

double coassociative_residual(const Frame& f) {
  require_orthonormal(f, 4, "coassociative_residual");
  double r = 0;
  for (int a = 0; a < 4; ++a)
    for (int b = a + 1; b < 4; ++b)
      for (int c = b + 1; c < 4; ++c) r = std::max(r, std::abs(g2_form(f[a], f[b], f[c])));
  return r;
}

Frame cayley_dickson_frame(const ImOcton& w1, const ImOcton& w2, const ImOcton& w4) {
  const ImOcton w3 = cross(w1, w2);
  const Frame seed({w1, w2});
  const double r4 = std::max({std::abs(dot(w4, w4) - 1.0), std::abs(dot(w4, w1)),
                              std::abs(dot(w4, w2)), std::abs(dot(w4, w3))});
  if (!seed.orthonormal(1e-10) || r4 > 1e-10) {
    std::ostringstream s;
    s << "cayley_dickson_frame: invalid seed (pair residual " << seed.orthonormality_residual
      << ", normal residual " << r4 << ")";
    throw PreconditionError(s.str());
  }
  return Frame({w1, w2, w3, w4, cross(w1, w4), cross(w2, w4), cross(w3, w4)});
}

double structure_constant_residual(const Frame& f) {
  require(f.size() == 7, "structure_constant_residual: need 7 vectors");
  double r = 0;
  for (int a = 1; a <= 7; ++a)
    for (int b = 1; b <= 7; ++b) {
      const ImOcton p = cross(f[a - 1], f[b - 1]);
      const ImOctonZ e = cross(ImOctonZ::basis(a), ImOctonZ::basis(b));
      for (int c = 1; c <= 7; ++c)
        r = std::max(r, std::abs(dot(p, f[c - 1]) - static_cast<double>(e(c))));
    }
  return r;
}

ImOcton SignedPermutation::apply(const ImOcton& u) const {
  ImOcton r;
  for (int i = 0; i < 7; ++i) r.c[target[i] - 1] += sign[i] * u.c[i];
  return r;
}

const std::vector<SignedPermutation>& g2_signed_permutations() {
  static const std::vector<SignedPermutation> group = [] {
    std::vector<SignedPermutation> out;
    std::array<int, 7> perm;
    std::iota(perm.begin(), perm.end(), 1);
    do {
      for (int mask = 0; mask < 128; ++mask) {
        SignedPermutation g;
        g.target = perm;
        for (int i = 0; i < 7; ++i) g.sign[i] = (mask >> i) & 1 ? -1 : 1;
        bool ok = true;
        for (const auto& t : basis_triples()) {
          const int lhs = omega_table(g.target[t.i - 1], g.target[t.j - 1], g.target[t.k - 1]) *
                          g.sign[t.i - 1] * g.sign[t.j - 1] * g.sign[t.k - 1];
          if (lhs != omega_table(t.i, t.j, t.k)) {
            ok = false;
            break;
          }
        }
        if (ok) out.push_back(g);
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return out;
  }();
  return group;
}

ImOcton almost_instanton_normal(const std::array<double, 4>& t) {
  ImOcton f3 = ImOcton::basis(3);
  for (int a = 0; a < 4; ++a) f3(4 + a) = t[a];
  // Gram-Schmidt against e1, e2 (f3 is already orthogonal to both).
  std::array<ImOcton, 3> f{ImOcton::basis(1), ImOcton::basis(2), f3};
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < a; ++b) f[a] -= dot(f[a], f[b]) * f[b];
    f[a] *= 1.0 / norm(f[a]);
  }
  ImOcton n = tau(f[0], f[1], f[2]);
  for (const auto& x : f) n -= dot(n, x) * x;
  return n;
}

AlmostInstanton almost_instanton_map(const std::array<double, 4>& t, double step) {
  require(step > 0, "almost_instanton_map: step must be positive");
  AlmostInstanton out;
  out.normal = almost_instanton_normal(t);
  for (int b = 0; b < 4; ++b) {
    std::array<double, 4> tp{}, tm{};
    tp[b] = step;
    tm[b] = -step;
    const ImOcton d = (almost_instanton_normal(tp) - almost_instanton_normal(tm)) * (0.5 / step);
    for (int a = 0; a < 4; ++a) out.jacobian(a, b) = d(4 + a);
  }
  Eigen::JacobiSVD<Eigen::Matrix4d> svd(out.jacobian);
  out.sigma_min = svd.singularValues()(3);
  return out;
}

ImOcton jn_apply(const ImOcton& n, const ImOcton& u) {
  const double nn = norm(n);
  if (nn == 0.0) throw PreconditionError("jn_apply: singular normal (n = 0)");
  return cross(n, u) * (1.0 / nn);
}

namespace {
constexpr int kPairs[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
}

double SelfDualForm::operator()(int a, int b) const {
  if (a == b) return 0.0;
  const int s = a < b ? 1 : -1;
  const int lo = std::min(a, b), hi = std::max(a, b);
  for (int p = 0; p < 6; ++p)
    if (kPairs[p][0] == lo && kPairs[p][1] == hi) return s * coeff[p];
  return 0.0;
}

double SelfDualForm::norm() const {
  double s = 0;
  for (double c : coeff) s += c * c;
  return std::sqrt(s);
}

double SelfDualForm::wedge_square() const {
  return 2.0 * (coeff[0] * coeff[5] - coeff[1] * coeff[4] + coeff[2] * coeff[3]);
}

std::array<double, 6> SelfDualForm::hodge_star() const {
  const double o = orientation;
  return {o * coeff[5], -o * coeff[4], o * coeff[3], o * coeff[2], -o * coeff[1], o * coeff[0]};
}

double SelfDualForm::self_duality_residual() const {
  const auto s = hodge_star();
  double r = 0;
  for (int p = 0; p < 6; ++p) r = std::max(r, std::abs(s[p] - coeff[p]));
  return r;
}

SelfDualForm eta_from_normal(const ImOcton& n, const Frame& c) {
  const double co = coassociative_residual(c);
  if (co > 1e-10) {
    std::ostringstream s;
    s << "eta_from_normal: plane not coassociative (residual " << co << ")";
    throw PreconditionError(s.str());
  }
  double off = std::abs(norm(n) - 1.0);
  for (const auto& w : c.vectors) off = std::max(off, std::abs(dot(n, w)));
  if (off > 1e-10) throw PreconditionError("eta_from_normal: n must be a unit normal to the plane");

  SelfDualForm eta;
  eta.basis_frame = c;
  for (int p = 0; p < 6; ++p) eta.coeff[p] = g2_form(n, c[kPairs[p][0]], c[kPairs[p][1]]);
  eta.orientation = eta.wedge_square() >= 0 ? 1 : -1;
  return eta;
}

double hermitian_compat_residual(const ImOcton& n, const Frame& c) {
  const SelfDualForm eta = eta_from_normal(n, c);
  const double nn = g2lab::norm(n);
  double r = 0;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      r = std::max(r, std::abs(eta(a, b) / nn - dot(jn_apply(n, c[a]), c[b])));
  return r;
}

double j_holomorphic_residual(const Frame& t, const ImOcton& n) {
  require(t.size() == 2, "j_holomorphic_residual: need a 2-frame");
  double s = 0;
  for (int a = 0; a < 2; ++a) {
    ImOcton j = jn_apply(n, t[a]);
    for (const auto& w : t.vectors) j -= dot(j, w) * w;
    s += dot(j, j);
  }
  return std::sqrt(s);
}

}  // namespace g2lab

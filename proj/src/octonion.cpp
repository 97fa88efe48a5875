#include "g2lab/octonion.hpp"

#include <algorithm>
#include <sstream>

#include "g2lab/error.hpp"

namespace g2lab {

const std::array<Triple, 35>& basis_triples() {
  static const std::array<Triple, 35> t = [] {
    std::array<Triple, 35> out{};
    int n = 0;
    for (int i = 1; i <= 7; ++i)
      for (int j = i + 1; j <= 7; ++j)
        for (int k = j + 1; k <= 7; ++k) out[n++] = {i, j, k};
    return out;
  }();
  return t;
}

int triple_index(int i, int j, int k) {
  const auto& t = basis_triples();
  for (int n = 0; n < 35; ++n)
    if (t[n].i == i && t[n].j == j && t[n].k == k) return n;
  throw PreconditionError("triple_index: indices must satisfy 1<=i<j<k<=7");
}

int permutation_sign(std::vector<int>& idx) {
  int s = 1;
  for (std::size_t a = 0; a < idx.size(); ++a)
    for (std::size_t b = a + 1; b < idx.size(); ++b) {
      if (idx[a] == idx[b]) return 0;
      if (idx[a] > idx[b]) s = -s;
    }
  std::sort(idx.begin(), idx.end());
  return s;
}

int VectorValuedForm::at(int i, int j, int k, int alpha) const {
  std::vector<int> t{i, j, k};
  const int s = permutation_sign(t);
  if (s == 0) return 0;
  return s * coeff_[triple_index(t[0], t[1], t[2])][alpha - 1];
}

void VectorValuedForm::set(int i, int j, int k, int alpha, int value) {
  std::vector<int> t{i, j, k};
  const int s = permutation_sign(t);
  require(s != 0, "VectorValuedForm::set: repeated index");
  coeff_[triple_index(t[0], t[1], t[2])][alpha - 1] = s * value;
}

int VectorValuedForm::nonzero_count() const {
  int n = 0;
  for (const auto& row : coeff_)
    for (int v : row) n += (v != 0);
  return n;
}

const std::array<OmegaTerm, 7>& omega_terms() {
  static const std::array<OmegaTerm, 7> t{{{1, 2, 3, 1},
                                           {1, 6, 7, -1},
                                           {5, 2, 7, -1},
                                           {5, 6, 3, -1},
                                           {1, 5, 4, -1},
                                           {2, 6, 4, -1},
                                           {3, 7, 4, -1}}};
  return t;
}

int omega_table(int i, int j, int k) {
  std::vector<int> q{i, j, k};
  const int s = permutation_sign(q);
  if (s == 0) return 0;
  for (const auto& t : omega_terms()) {
    std::vector<int> p{t.i, t.j, t.k};
    const int ps = permutation_sign(p);
    if (p == q) return s * ps * t.sign;
  }
  return 0;
}

namespace {

// Rows of d/dx_alpha. The entries (357;1), (156;2) and (147;2) are the
// alternation-consistent signs.
constexpr const char* kTauRows[7] = {
    "+256 -247 +346 +357", "-156 +147 -345 +367", "+245 -267 -146 -157",
    "+567 -127 +136 -235", "+126 -467 +137 +234", "+457 -125 -134 +237",
    "+124 -456 -135 -236"};

VectorValuedForm parse_tau_rows() {
  VectorValuedForm f;
  for (int a = 1; a <= 7; ++a) {
    std::istringstream in(kTauRows[a - 1]);
    std::string tok;
    while (in >> tok) {
      const int s = tok[0] == '+' ? 1 : -1;
      f.set(tok[1] - '0', tok[2] - '0', tok[3] - '0', a, s);
    }
  }
  return f;
}

double det3(const ImOcton& u, const ImOcton& v, const ImOcton& w, int i, int j, int k) {
  return u(i) * (v(j) * w(k) - v(k) * w(j)) - u(j) * (v(i) * w(k) - v(k) * w(i)) +
         u(k) * (v(i) * w(j) - v(j) * w(i));
}

double det4(const double m[4][4]) {
  double d = 0;
  for (int c = 0; c < 4; ++c) {
    double minor[3][3];
    for (int r = 1; r < 4; ++r) {
      int cc = 0;
      for (int q = 0; q < 4; ++q)
        if (q != c) minor[r - 1][cc++] = m[r][q];
    }
    const double d3 = minor[0][0] * (minor[1][1] * minor[2][2] - minor[1][2] * minor[2][1]) -
                      minor[0][1] * (minor[1][0] * minor[2][2] - minor[1][2] * minor[2][0]) +
                      minor[0][2] * (minor[1][0] * minor[2][1] - minor[1][1] * minor[2][0]);
    d += ((c % 2) ? -1.0 : 1.0) * m[0][c] * d3;
  }
  return d;
}

}  // namespace

const VectorValuedForm& tau_table() {
  static const VectorValuedForm t = parse_tau_rows();
  return t;
}

ImOctonZ tau_basis_exact(int i, int j, int k) {
  return tau_formula(ImOctonZ::basis(i), ImOctonZ::basis(j), ImOctonZ::basis(k));
}

ImOcton tau(const ImOcton& u, const ImOcton& v, const ImOcton& w, const VectorValuedForm& table) {
  ImOcton r;
  for (const auto& t : basis_triples()) {
    const double d = det3(u, v, w, t.i, t.j, t.k);
    if (d == 0.0) continue;
    for (int a = 1; a <= 7; ++a) {
      const int c = table.at(t.i, t.j, t.k, a);
      if (c) r(a) += c * d;
    }
  }
  return r;
}

int star_omega_coefficient(int l, int m, int n, int p, Orientation o) {
  // *(e^{ijk}) = sgn(i,j,k,l,m,n,p) e^{lmnp} for the complementary quadruple.
  std::vector<int> comp;
  for (int x = 1; x <= 7; ++x)
    if (x != l && x != m && x != n && x != p) comp.push_back(x);
  if (comp.size() != 3) return 0;
  const int w = omega_table(comp[0], comp[1], comp[2]);
  if (w == 0) return 0;
  std::vector<int> full{comp[0], comp[1], comp[2], l, m, n, p};
  return w * permutation_sign(full) * static_cast<int>(o);
}

double star_omega(const ImOcton& u, const ImOcton& v, const ImOcton& w, const ImOcton& z,
                  Orientation o) {
  double total = 0;
  for (int l = 1; l <= 7; ++l)
    for (int m = l + 1; m <= 7; ++m)
      for (int n = m + 1; n <= 7; ++n)
        for (int p = n + 1; p <= 7; ++p) {
          const int c = star_omega_coefficient(l, m, n, p, o);
          if (!c) continue;
          const int idx[4] = {l, m, n, p};
          double mat[4][4];
          for (int q = 0; q < 4; ++q) {
            mat[0][q] = u(idx[q]);
            mat[1][q] = v(idx[q]);
            mat[2][q] = w(idx[q]);
            mat[3][q] = z(idx[q]);
          }
          total += c * det4(mat);
        }
  return total;
}

std::string TableMismatch::describe() const {
  std::ostringstream s;
  s << "(" << i << "," << j << "," << k << "; alpha=" << alpha << ") table=" << table_value
    << " formula=" << formula_value;
  return s.str();
}

std::vector<TableMismatch> tau_table_mismatches(const VectorValuedForm& table) {
  std::vector<TableMismatch> out;
  for (const auto& t : basis_triples()) {
    const ImOctonZ f = tau_basis_exact(t.i, t.j, t.k);
    for (int a = 1; a <= 7; ++a) {
      const int tv = table.at(t.i, t.j, t.k, a);
      if (tv != f(a)) out.push_back({t.i, t.j, t.k, a, tv, f(a)});
    }
  }
  return out;
}

std::vector<TableMismatch> omega_table_mismatches() {
  std::vector<TableMismatch> out;
  for (const auto& t : basis_triples()) {
    const std::int64_t f =
        g2_form(ImOctonZ::basis(t.i), ImOctonZ::basis(t.j), ImOctonZ::basis(t.k));
    const int tv = omega_table(t.i, t.j, t.k);
    if (tv != f) out.push_back({t.i, t.j, t.k, 0, tv, f});
  }
  return out;
}

}  // namespace g2lab

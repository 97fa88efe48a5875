#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <ostream>
#include <random>
#include <sstream>

#include "g2lab/calibration.hpp"
#include "g2lab/cli.hpp"
#include "g2lab/error.hpp"
#include "g2lab/exec.hpp"
#include "g2lab/mclean.hpp"
#include "g2lab/newton.hpp"
#include "g2lab/octonion.hpp"
#include "g2lab/snapshot.hpp"
#include "g2lab/spectral.hpp"

namespace g2lab::cli {

namespace {

using json = nlohmann::ordered_json;

struct Output {
  bool json_stdout = false;
  std::string path;
  std::string format = "json";
  bool serial = false;

  void add(CLI::App* app) {
    app->add_flag("--json", json_stdout, "Print the JSON report instead of the summary");
    app->add_option("--out", path, "Write the report to this file");
    app->add_option("--format", format, "Report file format")->check(CLI::IsMember({"json", "csv"}));
    app->add_flag("--serial", serial, "Use the serial reference kernels");
  }
  Exec exec() const { return serial ? Exec::Serial : Exec::Parallel; }
};

struct GridArgs {
  double epsilon = 0.25;
  int M = 16;
  int N2 = 8;
  int N3 = 8;
  std::vector<double> twist{0.5, 0.5};
  std::string h = "const:1";
  std::uint64_t seed = 1;

  void add(CLI::App* app, bool with_epsilon = true) {
    if (with_epsilon) app->add_option("--epsilon", epsilon, "Cylinder width");
    app->add_option("--M", M, "x1 intervals");
    app->add_option("--N2", N2, "Torus points along x2");
    app->add_option("--N3", N3, "Torus points along x3");
    app->add_option("--twist", twist, "Bloch twist alpha beta")->expected(2);
    app->add_option("--h", h, "Warp: const:c or cos:c0,c1[,K]");
    app->add_option("--seed", seed, "Random seed");
  }
  ThinCylinderGrid grid() const {
    ThinCylinderGrid g{epsilon, M, N2, N3};
    g.validate();
    return g;
  }
  TwistedBundle bundle() const {
    TwistedBundle t{twist.at(0), twist.at(1)};
    t.validate();
    return t;
  }
  WarpSpec warp_spec() const { return WarpSpec::parse(h); }
  json to_json(bool with_epsilon = true) const {
    json j;
    if (with_epsilon) j["epsilon"] = epsilon;
    j["M"] = M;
    j["N2"] = N2;
    j["N3"] = N3;
    j["twist"] = {twist.at(0), twist.at(1)};
    j["h"] = warp_spec().str();
    j["seed"] = seed;
    return j;
  }
};

json versions() {
  json v;
  v["g2lab"] = kVersion;
  for (const char* m : {"octo_algebra", "calibration_planes", "mclean_linearization", "thin_dirac",
                        "spectral_analysis", "perturbation_solver", "cli"})
    v[m] = kVersion;
  return v;
}

json envelope(const std::string& command, json config) {
  json j;
  j["command"] = command;
  j["versions"] = versions();
  j["config"] = std::move(config);
  return j;
}

std::string fmt(double x, int prec = 6) {
  std::ostringstream s;
  s << std::setprecision(prec) << x;
  return s.str();
}

std::string csv_num(double x) {
  std::ostringstream s;
  s << std::setprecision(17) << x;
  return s.str();
}

void emit(const Output& o, const json& report, const std::string& csv, const std::string& summary,
          std::ostream& out) {
  if (o.json_stdout) out << report.dump(2) << "\n";
  else out << summary;
  if (!o.path.empty()) {
    std::ofstream f(o.path, std::ios::binary);
    if (!f) throw PreconditionError("cannot write " + o.path);
    if (o.format == "csv") f << csv;
    else f << report.dump(2) << "\n";
  }
}

// ------------------------------------------------------------ algebra-selfcheck

struct SelfcheckArgs {
  Output out;
  std::string corrupt;
};

int cmd_selfcheck(const SelfcheckArgs& a, std::ostream& os, std::ostream& es) {
  VectorValuedForm table = tau_table();
  if (!a.corrupt.empty()) {
    const auto v = parse_number_list(a.corrupt);
    if (v.size() != 4) throw PreconditionError("--corrupt-tau expects i,j,k,alpha");
    const int i = static_cast<int>(v[0]), j = static_cast<int>(v[1]), k = static_cast<int>(v[2]),
              al = static_cast<int>(v[3]);
    const int cur = table.at(i, j, k, al);
    table.set(i, j, k, al, cur == 0 ? 1 : -cur);
  }

  json rows = json::array();
  std::ostringstream csv;
  csv << "table,i,j,k,residual\n";
  int bad_rows = 0;
  for (const auto& t : basis_triples()) {
    const auto exact = tau_basis_exact(t.i, t.j, t.k);
    long long r = 0;
    for (int al = 1; al <= 7; ++al) r = std::max<long long>(r, std::llabs(table.at(t.i, t.j, t.k, al) - exact(al)));
    rows.push_back({{"table", "tau"}, {"i", t.i}, {"j", t.j}, {"k", t.k}, {"residual", r}});
    csv << "tau," << t.i << "," << t.j << "," << t.k << "," << r << "\n";
    bad_rows += r != 0;
  }
  for (const auto& t : basis_triples()) {
    const auto e = [](int n) { return ImOctonZ::basis(n); };
    const long long r = std::llabs(omega_table(t.i, t.j, t.k) - g2_form(e(t.i), e(t.j), e(t.k)));
    rows.push_back({{"table", "omega"}, {"i", t.i}, {"j", t.j}, {"k", t.k}, {"residual", r}});
    csv << "omega," << t.i << "," << t.j << "," << t.k << "," << r << "\n";
    bad_rows += r != 0;
  }

  json checks = json::array();
  bool ok = bad_rows == 0;
  auto check = [&](const std::string& name, double value, double limit, bool pass) {
    checks.push_back({{"name", name}, {"value", value}, {"limit", limit}, {"pass", pass}});
    ok = ok && pass;
  };
  const double group = static_cast<double>(g2_signed_permutations().size());
  check("g2_signed_permutations", group, 1344, group == 1344);
  const Frame std7 = cayley_dickson_frame(ImOcton::basis(1), ImOcton::basis(2), ImOcton::basis(4));
  const double sc = structure_constant_residual(std7);
  check("cayley_dickson_structure", sc, 0.0, sc == 0.0);
  const auto ai = almost_instanton_map({0, 0, 0, 0});
  check("almost_instanton_sigma_min", ai.sigma_min, 0.5, ai.sigma_min >= 0.5);
  std::mt19937_64 rng(20241015);
  std::normal_distribution<double> n01;
  double dolb = 0.0;
  for (int t = 0; t < 100; ++t) {
    JetSample jet;
    for (auto& row : jet.d)
      for (auto& x : row) x = n01(rng);
    dolb = std::max(dolb, dolbeault_agreement(std7, jet));
  }
  check("dolbeault_agreement", dolb, 1e-10, dolb <= 1e-10);

  json mism = json::array();
  for (const auto& m : tau_table_mismatches(table)) mism.push_back(m.describe());
  for (const auto& m : omega_table_mismatches()) mism.push_back(m.describe());

  json cfg;
  cfg["corrupt_tau"] = a.corrupt.empty() ? json(nullptr) : json(a.corrupt);
  json rep = envelope("algebra-selfcheck", cfg);
  rep["tables"] = rows;
  rep["checks"] = checks;
  rep["mismatches"] = mism;
  rep["pass"] = ok;

  std::ostringstream sum;
  sum << "algebra-selfcheck: " << (70 - bad_rows) << "/70 table rows verified (35 tau, 35 omega)\n";
  for (const auto& c : checks)
    sum << "  " << std::left << std::setw(28) << c["name"].get<std::string>() << fmt(c["value"].get<double>())
        << (c["pass"].get<bool>() ? "  ok" : "  FAIL") << "\n";
  sum << (ok ? "PASS\n" : "FAIL\n");
  emit(a.out, rep, csv.str(), sum.str(), os);
  for (const auto& m : mism) es << "mismatch: " << m.get<std::string>() << "\n";
  return ok ? 0 : static_cast<int>(Status::InvariantFailure);
}

// ------------------------------------------------------------ spectrum

struct SpectrumArgs {
  Output out;
  GridArgs grid;
  double tol = 1e-9;
  double threshold = 1e-10;
};

int cmd_spectrum(const SpectrumArgs& a, std::ostream& os) {
  const auto g = a.grid.grid();
  const auto tw = a.grid.bundle();
  const auto warp = WarpProfile::sample(a.grid.warp_spec(), g.N2, g.N3);
  LambdaOptions lo;
  lo.tol = a.tol;
  lo.seed = a.grid.seed;
  const auto r = verify_lambda_bound(g, tw, warp, lo);
  const DiscreteOperator D(g, tw, warp);
  json kdim = nullptr;
  const std::size_t class_unknowns = 2 * g.points() - 2 * static_cast<std::size_t>(g.slice());
  if (warp.is_constant() || class_unknowns <= 1024) kdim = kernel_dimension(D, a.threshold);

  json cfg = a.grid.to_json();
  cfg["tol"] = a.tol;
  cfg["kernel_threshold"] = a.threshold;
  json rep = envelope("spectrum", cfg);
  rep["scheme"] = D.scheme_tag();
  json s;
  s["lambda_surface_minus"] = r.lambda_surface_minus;
  s["lambda_surface_plus"] = r.lambda_surface_plus;
  s["lambda_D"] = r.lambda_D;
  s["lambda_D_refined"] = r.lambda_D_refined;
  s["M_refined"] = r.M_refined;
  s["bound"] = r.bound;
  s["margin"] = r.margin;
  s["refinement_change"] = r.refinement_change;
  s["stable"] = r.stable;
  s["K"] = warp.K;
  s["c1_hinv_sqrt"] = warp.c1_hinv_sqrt;
  s["kernel_dimension"] = kdim;
  s["margin_tol"] = kLambdaTol;
  s["pass"] = r.pass;
  rep["report"] = s;

  std::ostringstream csv;
  csv << "epsilon,M,alpha,beta,h,lambda_surface,lambda_D,lambda_D_refined,bound,margin,kernel_dimension,pass\n";
  csv << csv_num(g.epsilon) << "," << g.M << "," << csv_num(tw.alpha) << "," << csv_num(tw.beta) << ",\""
      << a.grid.warp_spec().str() << "\"," << csv_num(r.lambda_surface_minus) << "," << csv_num(r.lambda_D) << ","
      << csv_num(r.lambda_D_refined) << "," << csv_num(r.bound) << "," << csv_num(r.margin) << ","
      << (kdim.is_null() ? std::string("") : std::to_string(kdim.get<int>())) << "," << (r.pass ? 1 : 0) << "\n";

  std::ostringstream sum;
  sum << "spectrum: eps=" << g.epsilon << " M=" << g.M << " twist=(" << tw.alpha << "," << tw.beta
      << ") h=" << warp.spec.str() << "\n"
      << "  lambda_surface " << fmt(r.lambda_surface_minus, 10) << "\n"
      << "  lambda_D       " << fmt(r.lambda_D, 10) << " (M=" << r.M_refined << ": " << fmt(r.lambda_D_refined, 10)
      << ")\n"
      << "  bound          " << fmt(r.bound, 10) << "\n"
      << "  margin         " << fmt(r.margin, 10) << "\n"
      << "  kernel dim     " << (kdim.is_null() ? std::string("skipped") : std::to_string(kdim.get<int>())) << "\n"
      << (r.pass ? "PASS\n" : "FAIL\n");
  emit(a.out, rep, csv.str(), sum.str(), os);
  return r.pass ? 0 : static_cast<int>(Status::InvariantFailure);
}

// ------------------------------------------------------------ scaling

struct ScalingArgs {
  Output out;
  GridArgs grid;
  std::string eps_list = "0.4,0.2,0.1,0.05,0.025";
  double dx = 0.0;
  double p = 12.0;
  double alpha_holder = 1.0 / 12.0;
  std::vector<std::string> probes;
};

int cmd_scaling(const ScalingArgs& a, std::ostream& os) {
  ScalingConfig c;
  c.epsilons = parse_number_list(a.eps_list);
  c.grid.M = a.grid.M;
  c.grid.N2 = a.grid.N2;
  c.grid.N3 = a.grid.N3;
  if (a.dx > 0.0) {
    c.grid.kind = GridPolicy::Kind::FixedDx;
    c.grid.dx = a.dx;
  }
  c.twist = a.grid.bundle();
  c.warp = a.grid.warp_spec();
  c.p = a.p;
  c.alpha = a.alpha_holder;
  c.seed = a.grid.seed;
  c.lambda.seed = a.grid.seed;
  if (!a.probes.empty()) {
    c.probes.clear();
    for (const auto& s : a.probes) c.probes.push_back(parse_probe(s));
  }
  const auto r = inverse_scaling_experiment(c, a.out.exec());

  json cfg = a.grid.to_json(false);
  cfg["epsilons"] = c.epsilons;
  cfg["grid_policy"] = c.grid.kind == GridPolicy::Kind::FixedM ? "fixed-M" : "fixed-dx";
  if (c.grid.kind == GridPolicy::Kind::FixedDx) cfg["dx"] = c.grid.dx;
  cfg["p"] = c.p;
  cfg["alpha_holder"] = c.alpha;
  json pr = json::array();
  for (Probe p : c.probes) pr.push_back(probe_name(p));
  cfg["probes"] = pr;
  json rep = envelope("scaling", cfg);
  json rows = json::array();
  std::ostringstream csv;
  csv << "epsilon,M,sigma_min,sigma_bound,inverse_sup_norm,inverse_holder_norm,fitted_exponent,target_exponent\n";
  for (std::size_t i = 0; i < r.epsilons.size(); ++i) {
    json row;
    row["epsilon"] = r.epsilons[i];
    row["M"] = r.Ms[i];
    row["sigma_min"] = r.sigma_mins[i];
    row["sigma_bound"] = r.sigma_bounds[i];
    row["inverse_sup_norm"] = r.inverse_sup_norms[i];
    row["inverse_holder_norm"] = r.inverse_holder_norms[i];
    json per;
    for (std::size_t k = 0; k < r.probes.size(); ++k)
      per[probe_name(r.probes[k])] = {{"sup_ratio", r.cells[i].sup_ratios[k]},
                                      {"holder_ratio", r.cells[i].holder_ratios[k]}};
    row["probes"] = per;
    row["pairs_subsampled"] = r.cells[i].subsampled;
    rows.push_back(row);
    csv << csv_num(r.epsilons[i]) << "," << r.Ms[i] << "," << csv_num(r.sigma_mins[i]) << ","
        << csv_num(r.sigma_bounds[i]) << "," << csv_num(r.inverse_sup_norms[i]) << ","
        << csv_num(r.inverse_holder_norms[i]) << "," << csv_num(r.fitted_exponent) << ","
        << csv_num(r.target_exponent) << "\n";
  }
  rep["rows"] = rows;
  rep["fitted_exponent"] = r.fitted_exponent;
  rep["fitted_exponent_holder"] = r.fitted_exponent_holder;
  rep["target_exponent"] = r.target_exponent;
  rep["exponent_slack"] = kExponentSlack;
  rep["exponent_ok"] = r.exponent_ok;
  rep["sigma_ok"] = r.sigma_ok;
  rep["pass"] = r.pass();

  std::ostringstream sum;
  sum << "scaling: " << r.epsilons.size() << " widths, probes";
  for (Probe p : r.probes) sum << " " << probe_name(p);
  sum << "\n  " << std::left << std::setw(10) << "epsilon" << std::setw(6) << "M" << std::setw(14) << "sigma_min"
      << std::setw(14) << "|Q|_sup" << "|Q|_holder\n";
  for (std::size_t i = 0; i < r.epsilons.size(); ++i)
    sum << "  " << std::setw(10) << r.epsilons[i] << std::setw(6) << r.Ms[i] << std::setw(14) << fmt(r.sigma_mins[i])
        << std::setw(14) << fmt(r.inverse_sup_norms[i]) << fmt(r.inverse_holder_norms[i]) << "\n";
  sum << "  fitted exponent " << fmt(r.fitted_exponent) << " (target " << fmt(r.target_exponent) << " + "
      << kExponentSlack << ")\n"
      << (r.pass() ? "PASS\n" : "FAIL\n");
  emit(a.out, rep, csv.str(), sum.str(), os);
  return r.pass() ? 0 : static_cast<int>(Status::InvariantFailure);
}

// ------------------------------------------------------------ linearize

struct LinearizeArgs {
  Output out;
  int n = 8;
  int modes = 3;
  double amplitude = 0.5;
  double tol = 1e-6;
  std::uint64_t seed = 1;
};

int cmd_linearize(const LinearizeArgs& a, std::ostream& os) {
  const auto v = NormalField::band_limited(a.n, a.modes, a.seed, a.amplitude);
  const auto fd = fd_linearization(v, {1e-2, 5e-3}, a.out.exec());
  const auto dv = twisted_dirac_flat(v, a.out.exec());
  const double dev = max_deviation(fd.values, dv);
  const double forms = max_deviation(dv, twisted_dirac_cross_form(v, a.out.exec()));
  const bool order_ok = !fd.order_resolved || std::abs(fd.observed_order - 2.0) <= 0.2;
  const bool ok = dev <= a.tol && order_ok;

  json cfg;
  cfg["n"] = a.n;
  cfg["modes"] = a.modes;
  cfg["amplitude"] = a.amplitude;
  cfg["tol"] = a.tol;
  cfg["seed"] = a.seed;
  json rep = envelope("linearize", cfg);
  rep["steps"] = fd.steps;
  rep["max_deviation"] = dev;
  rep["cross_form_deviation"] = forms;
  rep["observed_order"] = fd.observed_order;
  rep["order_resolved"] = fd.order_resolved;
  rep["richardson_change"] = fd.richardson_change;
  rep["pass"] = ok;

  std::ostringstream csv;
  csv << "n,modes,seed,max_deviation,observed_order,order_resolved\n"
      << a.n << "," << a.modes << "," << a.seed << "," << csv_num(dev) << "," << csv_num(fd.observed_order) << ","
      << (fd.order_resolved ? 1 : 0) << "\n";
  std::ostringstream sum;
  sum << "linearize: n=" << a.n << " modes=" << a.modes << "\n"
      << "  max deviation   " << fmt(dev) << " (tol " << a.tol << ")\n"
      << "  observed order  " << fmt(fd.observed_order, 4) << (fd.order_resolved ? "" : " (unresolved)") << "\n"
      << (ok ? "PASS\n" : "FAIL\n");
  emit(a.out, rep, csv.str(), sum.str(), os);
  return ok ? 0 : static_cast<int>(Status::InvariantFailure);
}

// ------------------------------------------------------------ newton

struct NewtonArgs {
  Output out;
  GridArgs grid;
  double gamma = 0.1;
  double w0 = 0.01;
  double tol = 1e-12;
  int max_iter = 100;
  bool full = false;
  std::string snapshot;
};

int cmd_newton(const NewtonArgs& a, std::ostream& os) {
  const auto g = a.grid.grid();
  const auto tw = a.grid.bundle();
  const auto warp = WarpProfile::sample(a.grid.warp_spec(), g.N2, g.N3);
  require(a.w0 >= 0.0, "--w0 must be nonnegative");
  const DiscreteOperator D(g, tw, warp);
  SpinorGrid W0 = probe_rhs(Probe::RandomSmooth, g, a.grid.seed);
  W0 = cplx(a.w0 / W0.max_abs()) * W0;
  ToyOptions opt;
  opt.full_newton = a.full;
  opt.tol = a.tol;
  opt.max_iter = a.max_iter;
  opt.seed = a.grid.seed;
  const auto rep = toy_instanton(D, a.gamma, W0, opt);
  const auto& c = rep.config;
  const bool in_ball = rep.V.max_abs() <= 2.0 * c.A * (1.0 + 1e-12);
  const bool contraction_ok = a.full || rep.trace.observed_contraction <= 2.0 * c.predicted_contraction();
  const bool ok = in_ball && contraction_ok;
  if (!a.snapshot.empty()) write_snapshot(a.snapshot, rep.V, tw, warp);

  json cfg = a.grid.to_json();
  cfg["gamma"] = a.gamma;
  cfg["w0_sup"] = a.w0;
  cfg["tol"] = a.tol;
  cfg["max_iter"] = a.max_iter;
  cfg["full_newton"] = a.full;
  json j = envelope("newton", cfg);
  j["scheme"] = D.scheme_tag();
  j["constants"] = {{"A", c.A}, {"B", c.B}, {"kappa", c.kappa}, {"r", c.r}, {"two_kappa_A_B", c.kab()}};
  j["probe_ratios"] = rep.probe_ratios;
  j["trace"] = {{"residuals", rep.trace.residuals}, {"iterate_norms", rep.trace.iterate_norms}};
  j["iterations"] = rep.trace.iterations;
  j["root_sup"] = rep.V.max_abs();
  j["ball_radius"] = 2.0 * c.A;
  j["observed_contraction"] = rep.trace.observed_contraction;
  j["predicted_contraction"] = c.predicted_contraction();
  j["pass"] = ok;

  std::ostringstream csv;
  csv << "iteration,residual,iterate_norm\n";
  for (std::size_t k = 0; k < rep.trace.residuals.size(); ++k)
    csv << k << "," << csv_num(rep.trace.residuals[k]) << "," << csv_num(rep.trace.iterate_norms[k]) << "\n";
  std::ostringstream sum;
  sum << "newton: gamma=" << a.gamma << " |W0|=" << a.w0 << (a.full ? " (full Newton)" : "") << "\n"
      << "  A=" << fmt(c.A) << " B=" << fmt(c.B) << " kappa=" << fmt(c.kappa) << " r=" << fmt(c.r)
      << " 2kAB=" << fmt(c.kab()) << "\n";
  for (std::size_t k = 0; k < rep.trace.residuals.size(); ++k)
    sum << "  it " << k << "  |F| " << fmt(rep.trace.residuals[k]) << "\n";
  sum << "  |V| " << fmt(rep.V.max_abs()) << " <= 2A " << fmt(2.0 * c.A) << "\n" << (ok ? "PASS\n" : "FAIL\n");
  emit(a.out, j, csv.str(), sum.str(), os);
  return ok ? 0 : static_cast<int>(Status::InvariantFailure);
}

}  // namespace

int run(const std::vector<std::string>& args_in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Numerical experiments for instantons with coassociative boundary in the thin-cylinder model",
               "g2lab"};
  app.set_help_flag("--help", "Print this help message and exit");
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  SelfcheckArgs sa;
  auto* s_self = app.add_subcommand("algebra-selfcheck", "Exact octonion and calibration table checks");
  sa.out.add(s_self);
  s_self->add_option("--corrupt-tau", sa.corrupt)->group("");

  SpectrumArgs pa;
  auto* s_spec = app.add_subcommand("spectrum", "First eigenvalue of the thin-cylinder operator against its bound");
  pa.out.add(s_spec);
  pa.grid.add(s_spec);
  s_spec->add_option("--tol", pa.tol, "Eigenvalue tolerance (relative)");
  s_spec->add_option("--kernel-threshold", pa.threshold, "Relative singular value cut");

  ScalingArgs ca;
  ca.grid.M = 32;
  auto* s_scal = app.add_subcommand("scaling", "Growth of the inverse as the cylinder thins");
  ca.out.add(s_scal);
  ca.grid.add(s_scal, false);
  s_scal->add_option("--eps-list", ca.eps_list, "Decreasing widths, comma separated");
  s_scal->add_option("--dx", ca.dx, "Fixed x1 spacing (M follows epsilon)");
  s_scal->add_option("--p", ca.p, "Integrability exponent");
  s_scal->add_option("--alpha-holder", ca.alpha_holder, "Hoelder exponent");
  s_scal->add_option("--probe", ca.probes, "boundary-hard, case-i or random-smooth")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);

  LinearizeArgs la;
  auto* s_lin = app.add_subcommand("linearize", "Finite-difference linearization against the twisted Dirac operator");
  la.out.add(s_lin);
  s_lin->add_option("--n", la.n, "Lattice points per axis");
  s_lin->add_option("--modes", la.modes, "Highest frequency");
  s_lin->add_option("--amplitude", la.amplitude, "Field amplitude");
  s_lin->add_option("--tol", la.tol, "Agreement tolerance");
  s_lin->add_option("--seed", la.seed, "Random seed");

  NewtonArgs na;
  auto* s_new = app.add_subcommand("newton", "Simplified Newton on the toy instanton equation");
  na.out.add(s_new);
  na.grid.add(s_new);
  s_new->add_option("--gamma", na.gamma, "Nonlinearity strength");
  s_new->add_option("--w0", na.w0, "Sup norm of the right-hand side");
  s_new->add_option("--tol", na.tol, "Residual tolerance");
  s_new->add_option("--max-iter", na.max_iter, "Iteration cap");
  s_new->add_flag("--full-newton", na.full, "Re-solve the Jacobian at every step (unverified)");
  s_new->add_option("--snapshot", na.snapshot, "Write the root as a binary snapshot");

  try {
    const auto args = expand_config(args_in);
    std::vector<const char*> argv{"g2lab"};
    for (const auto& s : args) argv.push_back(s.c_str());
    try {
      app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
      return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
      return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
      return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
      app.exit(e, out, err);
      return static_cast<int>(Status::Usage);
    }
    if (*s_self) return cmd_selfcheck(sa, out, err);
    if (*s_spec) return cmd_spectrum(pa, out);
    if (*s_scal) return cmd_scaling(ca, out);
    if (*s_lin) return cmd_linearize(la, out);
    if (*s_new) return cmd_newton(na, out);
    return static_cast<int>(Status::Usage);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(e.status());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(Status::InvariantFailure);
  }
}

}  // namespace g2lab::cli

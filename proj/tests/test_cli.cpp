#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <sys/wait.h>

#include "doctest.h"
#include "g2lab/cli.hpp"
#include "g2lab/error.hpp"
#include "g2lab/snapshot.hpp"

using namespace g2lab;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
};

Run shell(const std::string& args) {
  const std::string cmd = std::string(G2LAB_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::string out;
  std::array<char, 4096> buf;
  for (std::size_t n; (n = fread(buf.data(), 1, buf.size(), p)) > 0;) out.append(buf.data(), n);
  const int st = pclose(p);
  return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, out};
}

Run inproc(const std::vector<std::string>& args, std::string* err_out = nullptr) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  if (err_out) *err_out = err.str();
  return {code, out.str()};
}

fs::path tmpdir() {
  const auto d = fs::temp_directory_path() / ("g2lab_cli_test_" + std::to_string(::getpid()));
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  for (std::string l; std::getline(is, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("config text parsing") {
  const auto kv = cli::parse_config_text("# comment\n epsilon = 0.1 \n--M=32 # trailing\n\ntwist = 0.5 0.25\n");
  REQUIRE(kv.size() == 3);
  CHECK(kv[0] == std::pair<std::string, std::string>{"epsilon", "0.1"});
  CHECK(kv[1] == std::pair<std::string, std::string>{"M", "32"});
  CHECK(kv[2].second == "0.5 0.25");
  CHECK_THROWS_AS(cli::parse_config_text("epsilon 0.1\n"), PreconditionError);
  CHECK_THROWS_AS(cli::parse_config_text("= 3\n"), PreconditionError);
}

TEST_CASE("number lists") {
  CHECK(cli::parse_number_list("0.4,0.2, 0.1") == std::vector<double>{0.4, 0.2, 0.1});
  CHECK(cli::parse_number_list("1 2  3") == std::vector<double>{1, 2, 3});
  CHECK(cli::parse_number_list("").empty());
  CHECK_THROWS_AS(cli::parse_number_list("0.4,x"), PreconditionError);
  CHECK_THROWS_AS(cli::parse_number_list("0.4e"), PreconditionError);
}

TEST_CASE("config splicing puts file values before command-line flags") {
  const auto d = tmpdir();
  const auto cfg = d / "c.cfg";
  std::ofstream(cfg) << "epsilon = 0.1\ntwist = 0.25 0.5\n";
  const auto a = cli::expand_config({"spectrum", "--config", cfg.string(), "--epsilon", "0.2"});
  const std::vector<std::string> want{"spectrum", "--epsilon=0.1", "--twist", "0.25", "0.5", "--epsilon", "0.2"};
  CHECK(a == want);
  const auto b = cli::expand_config({"--config=" + cfg.string(), "spectrum"});
  CHECK(b.front() == "spectrum");
  CHECK(b.size() == 5);
  CHECK_THROWS_AS(cli::expand_config({"spectrum", "--config"}), PreconditionError);
  CHECK_THROWS_AS(cli::expand_config({"spectrum", "--config", (d / "missing").string()}), PreconditionError);
}

TEST_CASE("algebra-selfcheck") {
  const auto r = shell("algebra-selfcheck");
  CHECK(r.code == 0);
  CHECK(r.out.find("70/70") != std::string::npos);

  const auto j = json::parse(shell("algebra-selfcheck --json").out);
  CHECK(j["tables"].size() == 70);
  CHECK(j["pass"] == true);
  CHECK(j["mismatches"].empty());

  std::string err;
  const auto bad = inproc({"algebra-selfcheck", "--corrupt-tau", "1,2,4,3"}, &err);
  CHECK(bad.code == 1);
  CHECK(err.find("(1,2,4; alpha=3)") != std::string::npos);
  CHECK(bad.out.find("FAIL") != std::string::npos);
}

TEST_CASE("spectrum reports and exit codes") {
  const auto j = json::parse(shell("spectrum --epsilon 0.25 --twist 0.5 0.5 --h const:1 --json").out);
  CHECK(j["command"] == "spectrum");
  CHECK(j["report"]["bound"].get<double>() == doctest::Approx(0.125).epsilon(1e-12));
  CHECK(j["report"]["margin"].get<double>() >= -1e-3);
  CHECK(j["report"]["kernel_dimension"] == 0);
  CHECK(j["config"]["h"] == "const:1");
  CHECK(j["versions"].contains("spectral_analysis"));

  const auto z = json::parse(shell("spectrum --twist 0 0 --json").out);
  CHECK(z["report"]["lambda_D"].get<double>() < 1e-12);
  CHECK(z["report"]["kernel_dimension"] == 2);

  const auto d = tmpdir();
  REQUIRE(shell("spectrum --h cos:1,0.3 --format csv --out " + (d / "s.csv").string()).code == 0);
  const auto rows = lines(slurp(d / "s.csv"));
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == "epsilon,M,alpha,beta,h,lambda_surface,lambda_D,lambda_D_refined,bound,margin,kernel_dimension,pass");
  CHECK(rows[1].find(",\"cos:1,0.3\",") != std::string::npos);
  CHECK(rows[1].back() == '1');

  CHECK(shell("spectrum --h bogus").code == 64);
  CHECK(shell("spectrum --h cos:1,2").code == 64);
  CHECK(shell("spectrum --twist 1.5 0").code == 64);
  CHECK(shell("spectrum --nope").code == 64);
  CHECK(shell("").code == 64);
  CHECK(shell("--help").code == 0);
}

TEST_CASE("flags override the config file") {
  const auto d = tmpdir();
  const auto cfg = d / "spec.cfg";
  std::ofstream(cfg) << "# spectrum settings\nepsilon = 0.1\nh = const:4\ntwist = 0.5 0.25\n";
  const auto a = json::parse(shell("spectrum --config " + cfg.string() + " --json").out);
  CHECK(a["config"]["epsilon"] == 0.1);
  CHECK(a["config"]["h"] == "const:4");
  CHECK(a["config"]["twist"][1] == 0.25);
  const auto b = json::parse(shell("spectrum --config " + cfg.string() + " --epsilon 0.2 --json").out);
  CHECK(b["config"]["epsilon"] == 0.2);
  CHECK(b["config"]["h"] == "const:4");

  std::ofstream(d / "bad.cfg") << "epsilon\n";
  CHECK(shell("spectrum --config " + (d / "bad.cfg").string()).code == 64);
}

TEST_CASE("scaling CSV and exit codes") {
  const auto d = tmpdir();
  const auto csv = d / "scaling.csv";
  const auto r = shell("scaling --format csv --out " + csv.string());
  CHECK(r.code == 0);
  const auto rows = lines(slurp(csv));
  REQUIRE(rows.size() == 6);
  CHECK(rows[0] ==
        "epsilon,M,sigma_min,sigma_bound,inverse_sup_norm,inverse_holder_norm,fitted_exponent,target_exponent");
  CHECK(rows[1].rfind("0.40000000000000002,32,", 0) == 0);
  CHECK(rows[5].rfind("0.025000000000000001,32,", 0) == 0);

  const auto one = json::parse(shell("scaling --probe boundary-hard --eps-list 0.4,0.2,0.1 --json").out);
  CHECK(one["config"]["probes"] == json::array({"boundary-hard"}));
  CHECK(one["rows"][0]["probes"].contains("boundary-hard"));
  CHECK(one["rows"].size() == 3);

  CHECK(shell("scaling --eps-list 0.4,0.2").code == 64);
  CHECK(shell("scaling --dx 0.05").code == 2);
  CHECK(shell("scaling --probe nonsense").code == 64);
  CHECK(shell("scaling --p 4").code == 64);
}

TEST_CASE("linearize") {
  const auto j = json::parse(shell("linearize --json").out);
  CHECK(j["max_deviation"].get<double>() <= 1e-6);
  CHECK(j["pass"] == true);
  CHECK(shell("linearize").code == 0);
}

TEST_CASE("newton") {
  const auto zero = json::parse(shell("newton --gamma 0 --json").out);
  CHECK(zero["iterations"] == 1);

  const auto d = tmpdir();
  const auto snap = d / "root.bin";
  const auto csv = d / "trace.csv";
  const auto r = shell("newton --snapshot " + snap.string() + " --format csv --out " + csv.string());
  CHECK(r.code == 0);
  const auto rows = lines(slurp(csv));
  CHECK(rows[0] == "iteration,residual,iterate_norm");
  CHECK(rows.size() >= 3);

  const auto s = read_snapshot(snap.string());
  CHECK(s.field.grid.M == 16);
  CHECK(s.field.grid.epsilon == 0.25);
  CHECK(s.twist.alpha == 0.5);
  CHECK(s.h.size() == 64);
  const auto j = json::parse(shell("newton --json").out);
  CHECK(s.field.max_abs() == j["root_sup"].get<double>());
  CHECK(fs::file_size(snap) == 4 + 4 + 12 + 24 + 64 * 8 + 2 * 17 * 64 * 16);

  std::string err;
  const auto bad = inproc({"newton", "--gamma", "50"}, &err);
  CHECK(bad.code == 3);
  CHECK(err.find("2*kappa*A*B") != std::string::npos);
  CHECK(shell("newton --twist 0 0").code == 64);
}

TEST_CASE("snapshot rejects foreign files") {
  const auto d = tmpdir();
  std::ofstream(d / "junk.bin") << "JUNKJUNK";
  CHECK_THROWS_AS(read_snapshot((d / "junk.bin").string()), PreconditionError);
  const auto full = d / "full.bin";
  REQUIRE(shell("newton --snapshot " + full.string()).code == 0);
  const auto bytes = slurp(full);
  std::ofstream(d / "cut.bin", std::ios::binary) << bytes.substr(0, bytes.size() - 8);
  CHECK_THROWS_AS(read_snapshot((d / "cut.bin").string()), PreconditionError);
}

TEST_CASE("identical config gives byte-identical reports") {
  const auto d = tmpdir();
  for (const std::string cmd : {"algebra-selfcheck", "spectrum --h cos:1,0.3,2", "scaling --eps-list 0.4,0.2,0.1",
                                "linearize", "newton"}) {
    CAPTURE(cmd);
    const auto a = d / "a.json", b = d / "b.json", c = d / "c.json";
    REQUIRE(shell(cmd + " --out " + a.string()).code == 0);
    REQUIRE(shell(cmd + " --out " + b.string()).code == 0);
    REQUIRE(shell(cmd + " --serial --out " + c.string()).code == 0);
    CHECK(slurp(a) == slurp(b));
    CHECK(slurp(a) == slurp(c));
    CHECK(!slurp(a).empty());
  }
  fs::remove_all(d);
}

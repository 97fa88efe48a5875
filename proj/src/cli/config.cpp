#include <cctype>
#include <fstream>
#include <sstream>

#include "g2lab/cli.hpp"
#include "g2lab/error.hpp"

namespace g2lab::cli {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  for (std::string w; is >> w;) out.push_back(w);
  return out;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> parse_config_text(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream is(text);
  int lineno = 0;
  for (std::string line; std::getline(is, line);) {
    ++lineno;
    if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw PreconditionError("config line " + std::to_string(lineno) + ": expected key=value");
    std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key.empty()) throw PreconditionError("config line " + std::to_string(lineno) + ": empty key");
    if (key.rfind("--", 0) == 0) key.erase(0, 2);
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::vector<std::string> rest;
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw PreconditionError("--config needs a file name");
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (path.empty()) return rest;
  std::ifstream is(path);
  if (!is) throw PreconditionError("cannot read config file " + path);
  std::stringstream buf;
  buf << is.rdbuf();
  std::vector<std::string> injected;
  for (const auto& [k, v] : parse_config_text(buf.str())) {
    const auto parts = split_ws(v);
    if (parts.size() <= 1) {
      injected.push_back("--" + k + "=" + v);
    } else {
      injected.push_back("--" + k);
      injected.insert(injected.end(), parts.begin(), parts.end());
    }
  }
  // Splice after the subcommand name (first positional token).
  std::size_t at = 0;
  while (at < rest.size() && rest[at].rfind("-", 0) == 0) ++at;
  if (at < rest.size()) ++at;
  rest.insert(rest.begin() + static_cast<std::ptrdiff_t>(at), injected.begin(), injected.end());
  return rest;
}

std::vector<double> parse_number_list(const std::string& s) {
  std::string t = s;
  for (char& c : t)
    if (c == ',') c = ' ';
  std::vector<double> out;
  for (const auto& w : split_ws(t)) {
    std::size_t used = 0;
    double x = 0;
    try {
      x = std::stod(w, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != w.size()) throw PreconditionError("not a number: '" + w + "'");
    out.push_back(x);
  }
  return out;
}

}  // namespace g2lab::cli

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "cli.hpp"
#include "json.hpp"

namespace intent_lab::cli {

using json = nlohmann::json;

namespace {

int line_at(const std::string& text, std::size_t pos) {
  pos = std::min(pos, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
}

// Line of the deepest key of `key_path` ("a.b.c") found in order in the raw text.
int locate(const std::string& text, const std::string& key_path) {
  std::size_t pos = 0, found = std::string::npos;
  std::stringstream ss(key_path);
  std::string seg;
  while (std::getline(ss, seg, '.')) {
    const std::size_t at = text.find('"' + seg + '"', pos);
    if (at == std::string::npos) continue;
    found = at;
    pos = at + seg.size() + 2;
  }
  return found == std::string::npos ? 1 : line_at(text, found);
}

class Reader {
 public:
  Reader(const std::string& text, const std::string& path) : text_(text), path_(path) {}

  [[noreturn]] void fail(const std::string& key_path, const std::string& msg) const {
    throw ConfigError(path_ + ":" + std::to_string(locate(text_, key_path)) + ": " + key_path + ": " + msg);
  }

  void only_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) const {
    if (!obj.is_object()) fail(where, "must be an object");
    for (auto it = obj.begin(); it != obj.end(); ++it)
      if (!allowed.count(it.key())) fail(where + "." + it.key(), "unknown key");
  }

  double number(const json& obj, const std::string& where, const std::string& key) const {
    const std::string kp = where + "." + key;
    if (!obj.contains(key)) fail(where, "missing required key \"" + key + "\"");
    const json& v = obj.at(key);
    if (!v.is_number()) fail(kp, "must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(kp, "must be finite");
    return d;
  }

  std::optional<double> opt_number(const json& obj, const std::string& where, const std::string& key) const {
    if (!obj.contains(key)) return std::nullopt;
    return number(obj, where, key);
  }

  std::optional<long long> opt_integer(const json& obj, const std::string& where, const std::string& key) const {
    if (!obj.contains(key)) return std::nullopt;
    const json& v = obj.at(key);
    if (!v.is_number_integer()) fail(where + "." + key, "must be an integer");
    return v.get<long long>();
  }

  std::optional<std::string> opt_string(const json& obj, const std::string& where, const std::string& key) const {
    if (!obj.contains(key)) return std::nullopt;
    const json& v = obj.at(key);
    if (!v.is_string()) fail(where + "." + key, "must be a string");
    return v.get<std::string>();
  }

 private:
  const std::string& text_;
  const std::string& path_;
};

std::string market_key(const std::string& field) {
  if (field == "k" || field == "tau") return "extension." + field;
  if (field == "extension" || field == "market") return field;
  if (field.find('.') != std::string::npos) return field;
  return "market." + field;
}

TypeDistribution read_dist(const Reader& r, const json& root, const std::string& name, double lo, double hi) {
  const std::string where = "distributions." + name;
  if (!root.contains("distributions") || !root["distributions"].contains(name)) return TypeDistribution::uniform(lo, hi);
  const json& d = root["distributions"][name];
  r.only_keys(d, where, {"kind", "truncation"});
  const std::string kind = r.opt_string(d, where, "kind").value_or("uniform");
  if (kind == "uniform") {
    if (d.contains("truncation")) r.fail(where + ".truncation", "only allowed with kind \"truncated_uniform\"");
    return TypeDistribution::uniform(lo, hi);
  }
  if (kind == "truncated_uniform") {
    const double cap = r.number(d, where, "truncation");
    if (!(cap > lo && cap <= hi)) r.fail(where + ".truncation", "must lie in (lo, hi] of the market bounds");
    return TypeDistribution::truncated(lo, hi, cap);
  }
  r.fail(where + ".kind", "must be \"uniform\" or \"truncated_uniform\"");
}

}  // namespace

Config parse_config(const std::string& text, const std::string& path) {
  Config c;
  c.path = path;
  c.text = text;
  const Reader r(c.text, c.path);
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ":" + std::to_string(line_at(text, e.byte == 0 ? 0 : e.byte - 1)) +
                      ": invalid JSON: " + e.what());
  }
  r.only_keys(root, "config", {"market", "distributions", "simulation", "extension"});
  if (!root.contains("market")) r.fail("config", "missing required block \"market\"");

  const json& m = root["market"];
  r.only_keys(m, "market", {"beta_lo", "beta_hi", "delta_lo", "delta_hi", "g", "p_db"});
  MarketParams& p = c.sim.params;
  p.beta_lo = r.number(m, "market", "beta_lo");
  p.beta_hi = r.number(m, "market", "beta_hi");
  p.delta_lo = r.number(m, "market", "delta_lo");
  p.delta_hi = r.number(m, "market", "delta_hi");
  p.g = r.number(m, "market", "g");
  p.p_db = r.number(m, "market", "p_db");
  if (root.contains("extension") && !root["extension"].is_null()) {
    const json& e = root["extension"];
    r.only_keys(e, "extension", {"k", "tau"});
    p.ext = ExecutionExt{r.number(e, "extension", "k"), r.number(e, "extension", "tau")};
  }
  try {
    p.validate();
  } catch (const ParamError& e) {
    r.fail(market_key(e.field()), e.what());
  }

  if (root.contains("distributions")) r.only_keys(root["distributions"], "distributions", {"beta", "delta"});
  c.sim.dists.beta = read_dist(r, root, "beta", p.beta_lo, p.beta_hi);
  c.sim.dists.delta = read_dist(r, root, "delta", p.delta_lo, p.delta_hi);

  if (root.contains("simulation")) {
    const json& s = root["simulation"];
    const std::string w = "simulation";
    r.only_keys(s, w,
                {"mechanisms", "n_draws", "seed", "grid_resolution", "rebalance_share", "sim_tie",
                 "max_failure_fraction", "fpa_max_iterations", "verify"});
    if (s.contains("mechanisms")) {
      const json& ms = s["mechanisms"];
      if (!ms.is_array() || ms.empty()) r.fail(w + ".mechanisms", "must be a non-empty array of mechanism names");
      c.sim.mechanisms.clear();
      for (const json& n : ms) {
        if (!n.is_string()) r.fail(w + ".mechanisms", "entries must be strings");
        const auto k = parse_mechanism(n.get<std::string>());
        if (!k) r.fail(w + ".mechanisms", "unknown mechanism \"" + n.get<std::string>() + "\"");
        c.sim.mechanisms.push_back(*k);
      }
    }
    if (auto v = r.opt_integer(s, w, "n_draws")) {
      if (*v < 1 || *v > 100000000) r.fail(w + ".n_draws", "must be in [1, 1e8]");
      c.sim.n_draws = static_cast<int>(*v);
    }
    if (s.contains("seed")) {
      const json& v = s["seed"];
      if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
        r.fail(w + ".seed", "must be a non-negative integer");
      c.sim.seed = v.get<std::uint64_t>();
    }
    if (auto v = r.opt_integer(s, w, "grid_resolution")) {
      if (*v < 64 || *v > 1000000) r.fail(w + ".grid_resolution", "must be in [64, 1e6]");
      c.sim.grid_resolution = static_cast<int>(*v);
    }
    if (auto v = r.opt_integer(s, w, "fpa_max_iterations")) {
      if (*v < 1 || *v > 100000000) r.fail(w + ".fpa_max_iterations", "must be in [1, 1e8]");
      c.sim.fpa_max_iterations = static_cast<int>(*v);
    }
    if (auto v = r.opt_number(s, w, "rebalance_share")) {
      if (!(*v >= 0.0 && *v <= 1.0)) r.fail(w + ".rebalance_share", "must lie in [0, 1]");
      c.sim.rebalance_share = *v;
    }
    if (auto v = r.opt_string(s, w, "sim_tie")) {
      if (*v == "strong_solver")
        c.sim.mechanism_options.sim_tie = SimTieRule::StrongSolver;
      else if (*v == "lower_id")
        c.sim.mechanism_options.sim_tie = SimTieRule::LowerId;
      else
        r.fail(w + ".sim_tie", "must be \"strong_solver\" or \"lower_id\"");
    }
    if (auto v = r.opt_number(s, w, "max_failure_fraction")) {
      if (!(*v >= 0.0 && *v <= 1.0)) r.fail(w + ".max_failure_fraction", "must lie in [0, 1]");
      c.max_failure_fraction = *v;
    }
    if (s.contains("verify")) {
      const json& v = s["verify"];
      const std::string wv = w + ".verify";
      r.only_keys(v, wv, {"bid_resolution", "type_points", "quadrature_nodes", "epsilon"});
      if (auto x = r.opt_integer(v, wv, "bid_resolution")) {
        if (*x < 50 || *x > 2000) r.fail(wv + ".bid_resolution", "must be in [50, 2000]");
        c.verify.bid_resolution = static_cast<int>(*x);
      }
      if (auto x = r.opt_integer(v, wv, "type_points")) {
        if (*x < 1 || *x > 10000) r.fail(wv + ".type_points", "must be in [1, 10000]");
        c.verify.type_points = static_cast<int>(*x);
      }
      if (auto x = r.opt_integer(v, wv, "quadrature_nodes")) {
        if (*x < 4 || *x % 4 != 0 || *x > 65536) r.fail(wv + ".quadrature_nodes", "must be a multiple of 4 in [4, 65536]");
        c.verify.quadrature_nodes = static_cast<int>(*x);
      }
      if (auto x = r.opt_number(v, wv, "epsilon")) {
        if (!(*x >= 0.0)) r.fail(wv + ".epsilon", "must be >= 0");
        c.verify.epsilon = *x;
      }
    }
  }
  return c;
}

Config load_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError(path + ":0: cannot read config file");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), path);
}

void revalidate(const Config& c, const std::string& key_path) {
  try {
    c.sim.params.validate();
  } catch (const ParamError& e) {
    throw ConfigError(c.path + ":" + std::to_string(locate(c.text, key_path)) + ": " + market_key(e.field()) + ": " +
                      e.what());
  }
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace intent_lab::cli

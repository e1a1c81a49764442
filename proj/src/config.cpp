#include "momap/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace momap {

namespace {

using nlohmann::json;

std::vector<double> get_vec(const json& j) {
  return j.get<std::vector<double>>();
}

FactorConfig factor_from_json(const json& j) {
  FactorConfig f;
  f.center = get_vec(j.at("center"));
  f.radius = j.at("radius").get<double>();
  if (f.radius <= 0.0)
    throw std::invalid_argument("config: factor radius must be positive");
  return f;
}

json factor_to_json(const FactorConfig& f) {
  return json{{"center", f.center}, {"radius", f.radius}};
}

}  // namespace

std::vector<double> make_mu_grid(const MuGridConfig& g) {
  if (g.count < 2 || g.min <= 0.0 || g.max <= g.min)
    throw std::invalid_argument("config: mu_grid needs 0 < min < max, count >= 2");
  std::vector<double> mu(g.count);
  const double ratio = std::pow(g.max / g.min, 1.0 / (g.count - 1));
  for (int k = 0; k < g.count; ++k) mu[k] = g.min * std::pow(ratio, k);
  mu.back() = g.max;
  return mu;
}

RunConfig config_from_json(const nlohmann::json& j) {
  RunConfig c;
  const auto& ja = j.at("action");
  c.action.n = ja.at("n").get<int>();
  c.action.name = ja.value("name", std::string("unnamed"));
  const auto& gens = ja.at("generators");
  const int d = static_cast<int>(gens.size());
  if (d < 1) throw std::invalid_argument("config: action needs generators");
  for (int i = 0; i < d; ++i) {
    const auto rows = gens[i];
    if (static_cast<int>(rows.size()) != c.action.n)
      throw std::invalid_argument("config: generator row count != n");
    Eigen::MatrixXd X(c.action.n, c.action.n);
    for (int r = 0; r < c.action.n; ++r) {
      const auto row = get_vec(rows[r]);
      if (static_cast<int>(row.size()) != c.action.n)
        throw std::invalid_argument("config: generator column count != n");
      for (int s = 0; s < c.action.n; ++s) X(r, s) = row[s];
    }
    c.action.generators.push_back(X);
  }

  const auto& jm = j.at("amplitude");
  c.amplitude.kind = jm.value("kind", std::string("bump"));
  if (c.amplitude.kind != "bump" && c.amplitude.kind != "gaussian")
    throw std::invalid_argument("config: amplitude kind must be bump or gaussian");
  c.amplitude.scale = jm.value("scale", 1.0);
  c.amplitude.x = factor_from_json(jm.at("x"));
  c.amplitude.xi = factor_from_json(jm.at("xi"));
  c.amplitude.t = factor_from_json(jm.at("t"));
  if (static_cast<int>(c.amplitude.x.center.size()) != c.action.n ||
      static_cast<int>(c.amplitude.xi.center.size()) != c.action.n)
    throw std::invalid_argument("config: amplitude x/xi centers must have dimension n");
  if (static_cast<int>(c.amplitude.t.center.size()) != d)
    throw std::invalid_argument("config: amplitude t center must have dimension d");

  if (j.contains("mu_grid")) {
    const auto& jg = j.at("mu_grid");
    c.mu_grid.min = jg.value("min", c.mu_grid.min);
    c.mu_grid.max = jg.value("max", c.mu_grid.max);
    c.mu_grid.count = jg.value("count", c.mu_grid.count);
  }
  if (j.contains("oracle")) {
    const auto& jo = j.at("oracle");
    c.oracle.method = jo.value("method", c.oracle.method);
    c.oracle.base_nodes = jo.value("base_nodes", c.oracle.base_nodes);
    c.oracle.nodes_per_wave = jo.value("nodes_per_wave", c.oracle.nodes_per_wave);
    c.oracle.max_nodes = jo.value("max_nodes", c.oracle.max_nodes);
    c.oracle.refine_factor = jo.value("refine_factor", c.oracle.refine_factor);
  }
  if (j.contains("surface")) {
    const auto& js = j.at("surface");
    c.surface.method = js.value("method", c.surface.method);
    c.surface.nodes = js.value("nodes", c.surface.nodes);
    c.surface.samples = js.value("samples", c.surface.samples);
    if (js.contains("eps_sweep")) c.surface.eps_sweep = get_vec(js.at("eps_sweep"));
  }
  if (j.contains("tolerances")) {
    const auto& jt = j.at("tolerances");
    c.tolerances.fit_exponent_tol = jt.value("fit_exponent_tol", c.tolerances.fit_exponent_tol);
    c.tolerances.l0_rel_tol = jt.value("l0_rel_tol", c.tolerances.l0_rel_tol);
  }
  if (j.contains("exec")) {
    const auto& je = j.at("exec");
    c.exec.mode = je.value("mode", c.exec.mode);
    c.exec.n_shards = je.value("n_shards", c.exec.n_shards);
  }
  c.seed = j.value("seed", c.seed);
  return c;
}

nlohmann::json config_to_json(const RunConfig& c) {
  json gens = json::array();
  for (const auto& X : c.action.generators) {
    json rows = json::array();
    for (int r = 0; r < X.rows(); ++r) {
      json row = json::array();
      for (int s = 0; s < X.cols(); ++s) row.push_back(X(r, s));
      rows.push_back(row);
    }
    gens.push_back(rows);
  }
  return json{
      {"action", {{"n", c.action.n}, {"name", c.action.name}, {"generators", gens}}},
      {"amplitude",
       {{"kind", c.amplitude.kind},
        {"scale", c.amplitude.scale},
        {"x", factor_to_json(c.amplitude.x)},
        {"xi", factor_to_json(c.amplitude.xi)},
        {"t", factor_to_json(c.amplitude.t)}}},
      {"mu_grid",
       {{"min", c.mu_grid.min}, {"max", c.mu_grid.max}, {"count", c.mu_grid.count}}},
      {"oracle",
       {{"method", c.oracle.method},
        {"base_nodes", c.oracle.base_nodes},
        {"nodes_per_wave", c.oracle.nodes_per_wave},
        {"max_nodes", c.oracle.max_nodes},
        {"refine_factor", c.oracle.refine_factor}}},
      {"surface",
       {{"method", c.surface.method},
        {"nodes", c.surface.nodes},
        {"samples", c.surface.samples},
        {"eps_sweep", c.surface.eps_sweep}}},
      {"tolerances",
       {{"fit_exponent_tol", c.tolerances.fit_exponent_tol},
        {"l0_rel_tol", c.tolerances.l0_rel_tol}}},
      {"exec", {{"mode", c.exec.mode}, {"n_shards", c.exec.n_shards}}},
      {"seed", c.seed}};
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  json j;
  in >> j;
  return config_from_json(j);
}

std::uint64_t config_hash(const RunConfig& c) {
  const std::string s = config_to_json(c).dump();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string config_hash_hex(const RunConfig& c) {
  std::ostringstream os;
  os << std::hex << config_hash(c);
  return os.str();
}

}  // namespace momap

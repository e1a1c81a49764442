#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace momap {

inline constexpr const char* kVersion = "1.0.0";

struct ActionConfig {
  int n = 2;
  std::string name = "so2";
  std::vector<Eigen::MatrixXd> generators;
};

struct FactorConfig {
  std::vector<double> center;
  double radius = 1.0;  // bump support radius, or Gaussian width
};

struct AmplitudeConfig {
  std::string kind = "bump";  // bump | gaussian
  double scale = 1.0;
  FactorConfig x, xi, t;
};

struct MuGridConfig {
  double min = 0.02;
  double max = 0.3;
  int count = 12;
};

struct OracleConfig {
  std::string method = "fourier";  // fourier | full
  int base_nodes = 32;
  double nodes_per_wave = 8.0;
  int max_nodes = 256;
  double refine_factor = 1.5;
};

struct SurfaceConfig {
  std::string method = "chart_grid";  // chart_grid | slab_monte_carlo
  int nodes = 96;                     // chart grid, per axis
  std::uint64_t samples = 400000;     // slab MC, per epsilon sweep
  std::vector<double> eps_sweep = {0.04, 0.02, 0.01};
};

struct ToleranceConfig {
  double fit_exponent_tol = 0.05;
  double l0_rel_tol = 0.02;
};

struct ExecConfig {
  std::string mode = "parallel";  // serial | parallel
  int n_shards = 64;
};

struct RunConfig {
  ActionConfig action;
  AmplitudeConfig amplitude;
  MuGridConfig mu_grid;
  OracleConfig oracle;
  SurfaceConfig surface;
  ToleranceConfig tolerances;
  ExecConfig exec;
  std::uint64_t seed = 1u;
};

// Geometric grid from min to max inclusive.
std::vector<double> make_mu_grid(const MuGridConfig& g);

RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& c);
RunConfig load_config(const std::string& path);

// FNV-1a over the canonical serialization; stable across reruns.
std::uint64_t config_hash(const RunConfig& c);
std::string config_hash_hex(const RunConfig& c);

}  // namespace momap

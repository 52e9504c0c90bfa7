#pragma once

// Run configuration: nested JSON document, CLI overrides, manifest echo.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace kwind {

inline constexpr const char* kToolkitVersion = "1.0.0";

struct ModelConfig {
  int n_sites = 8;
  double beta = 1.0;
  std::uint64_t seed_base = 1;
  int realizations = 100;
  std::string op = "S1x";  // S<site><axis>, site 1-based
  double variance_scale = 0.0;  // <= 0 selects 1/(9N)
};

struct KrylovConfig {
  int n_max = 0;  // 0 selects min(512, budget / vector size)
  double tol = 1e-8;
  std::string reorth = "full";
};

struct AnalysisConfig {
  int mu_points = 1024;
  double t_max = 7.0;  // in units of 1/(2 alpha) of the pilot fit
  int t_count = 71;
  double size_floor = 1e-12;
  int fit_lo = 2;
  int fit_hi = 0;  // 0 selects max(N - 1, fit_lo + 2)
  bool per_realization = false;
};

struct AnalyticConfig {
  double nu = 0.5;
  double beta = 1.0;
  double delta = 0.25;
  std::vector<double> t_list{0.0, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0};  // units of 1/(2 alpha)
  int n_max = 400;
  int n_out = 100;
  int largeq_q = 4;
  std::vector<int> ramp_sizes{8, 12, 16, 20};
  double ramp_alpha = 1.0;
  double ramp_beta = 1.0;
  int ramp_n_max = 3000;
  double ramp_t_max = 5.0;  // in units of log N
  int ramp_t_count = 51;
  int mu_points = 1024;
};

struct ScramblonConfig {
  int q = 6;
  double nu = 0.5;
  double beta = 1.0;
  double n_majorana = 3000.0;
  std::vector<double> h_list{1.0, 0.75, 0.5};
  double t_scaled = 0.9;  // t in units of 1/(2 alpha)
  int s_points = 200;
  double s_max = 0.45;
  int mu_points = 256;
  std::optional<double> delta;
  std::optional<double> ladder_c;
  std::vector<double> peak_offsets{0.01, 0.02, 0.05, 0.1};  // s - s0 for peak-in-n
};

struct RunConfig {
  ModelConfig model;
  KrylovConfig krylov;
  AnalysisConfig analysis;
  AnalyticConfig analytic;
  ScramblonConfig scramblon;
  std::string output_dir = "kwind_out";
  int threads = 0;  // 0 selects hardware concurrency

  int resolved_threads() const;
};

nlohmann::json to_json(const RunConfig& c);
/// Unknown keys and type mismatches raise ArgumentError.
RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::string& path);
void save_config(const RunConfig& c, const std::string& path);

/// manifest.json: resolved config, toolkit version, command, extra records.
void write_manifest(const std::string& dir, const std::string& command, const RunConfig& c,
                    const nlohmann::json& extra = nlohmann::json::object());

}  // namespace kwind

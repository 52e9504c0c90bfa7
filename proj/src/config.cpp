#include "kwind/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <thread>

#include "kwind/errors.hpp"

namespace kwind {

namespace {

using nlohmann::json;

class BlockReader {
 public:
  BlockReader(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw ArgumentError("config block '" + name_ + "' must be an object");
  }

  template <class T>
  BlockReader& operator()(const char* key, T& field) {
    seen_.insert(key);
    if (auto it = j_.find(key); it != j_.end()) {
      try {
        if constexpr (requires { typename T::value_type; field.has_value(); }) {
          if (it->is_null()) {
            field.reset();
          } else {
            field = it->template get<typename T::value_type>();
          }
        } else {
          field = it->template get<T>();
        }
      } catch (const json::exception& e) {
        throw ArgumentError("config key '" + name_ + "." + key + "': " + e.what());
      }
    }
    return *this;
  }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.contains(k)) throw ArgumentError("unknown config key '" + name_ + "." + k + "'");
    }
  }

 private:
  const json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

int RunConfig::resolved_threads() const {
  if (threads > 0) return threads;
  return std::max(1u, std::thread::hardware_concurrency());
}

json to_json(const RunConfig& c) {
  const auto& m = c.model;
  const auto& k = c.krylov;
  const auto& a = c.analysis;
  const auto& an = c.analytic;
  const auto& s = c.scramblon;
  return {
      {"model",
       {{"n_sites", m.n_sites},
        {"beta", m.beta},
        {"seed_base", m.seed_base},
        {"realizations", m.realizations},
        {"operator", m.op},
        {"variance_scale", m.variance_scale}}},
      {"krylov", {{"n_max", k.n_max}, {"tol", k.tol}, {"reorth", k.reorth}}},
      {"analysis",
       {{"mu_points", a.mu_points},
        {"t_max", a.t_max},
        {"t_count", a.t_count},
        {"size_floor", a.size_floor},
        {"fit_lo", a.fit_lo},
        {"fit_hi", a.fit_hi},
        {"per_realization", a.per_realization}}},
      {"analytic",
       {{"nu", an.nu},
        {"beta", an.beta},
        {"delta", an.delta},
        {"t_list", an.t_list},
        {"n_max", an.n_max},
        {"n_out", an.n_out},
        {"largeq_q", an.largeq_q},
        {"ramp_sizes", an.ramp_sizes},
        {"ramp_alpha", an.ramp_alpha},
        {"ramp_beta", an.ramp_beta},
        {"ramp_n_max", an.ramp_n_max},
        {"ramp_t_max", an.ramp_t_max},
        {"ramp_t_count", an.ramp_t_count},
        {"mu_points", an.mu_points}}},
      {"scramblon",
       {{"q", s.q},
        {"nu", s.nu},
        {"beta", s.beta},
        {"n_majorana", s.n_majorana},
        {"h_list", s.h_list},
        {"t_scaled", s.t_scaled},
        {"s_points", s.s_points},
        {"s_max", s.s_max},
        {"mu_points", s.mu_points},
        {"delta", opt(s.delta)},
        {"ladder_c", opt(s.ladder_c)},
        {"peak_offsets", s.peak_offsets}}},
      {"output_dir", c.output_dir},
      {"threads", c.threads},
  };
}

RunConfig config_from_json(const json& j) {
  RunConfig c;
  if (!j.is_object()) throw ArgumentError("config must be a JSON object");
  for (const auto& [key, v] : j.items()) {
    if (key == "model") {
      auto& m = c.model;
      BlockReader(v, key)("n_sites", m.n_sites)("beta", m.beta)("seed_base", m.seed_base)(
          "realizations", m.realizations)("operator", m.op)("variance_scale", m.variance_scale)
          .finish();
    } else if (key == "krylov") {
      BlockReader(v, key)("n_max", c.krylov.n_max)("tol", c.krylov.tol)("reorth", c.krylov.reorth).finish();
    } else if (key == "analysis") {
      auto& a = c.analysis;
      BlockReader(v, key)("mu_points", a.mu_points)("t_max", a.t_max)("t_count", a.t_count)(
          "size_floor", a.size_floor)("fit_lo", a.fit_lo)("fit_hi", a.fit_hi)("per_realization",
                                                                              a.per_realization)
          .finish();
    } else if (key == "analytic") {
      auto& a = c.analytic;
      BlockReader(v, key)("nu", a.nu)("beta", a.beta)("delta", a.delta)("t_list", a.t_list)(
          "n_max", a.n_max)("n_out", a.n_out)("largeq_q", a.largeq_q)("ramp_sizes", a.ramp_sizes)(
          "ramp_alpha", a.ramp_alpha)("ramp_beta", a.ramp_beta)("ramp_n_max", a.ramp_n_max)(
          "ramp_t_max", a.ramp_t_max)("ramp_t_count", a.ramp_t_count)("mu_points", a.mu_points)
          .finish();
    } else if (key == "scramblon") {
      auto& s = c.scramblon;
      BlockReader(v, key)("q", s.q)("nu", s.nu)("beta", s.beta)("n_majorana", s.n_majorana)(
          "h_list", s.h_list)("t_scaled", s.t_scaled)("s_points", s.s_points)("s_max", s.s_max)(
          "mu_points", s.mu_points)("delta", s.delta)("ladder_c", s.ladder_c)("peak_offsets",
                                                                              s.peak_offsets)
          .finish();
    } else if (key == "output_dir") {
      c.output_dir = v.get<std::string>();
    } else if (key == "threads") {
      c.threads = v.get<int>();
    } else {
      throw ArgumentError("unknown config section '" + key + "'");
    }
  }
  if (c.model.n_sites < 2 || c.model.n_sites > 10) throw ArgumentError("model.n_sites must lie in [2, 10]");
  if (c.model.realizations < 1) throw ArgumentError("model.realizations must be >= 1");
  if (c.analysis.mu_points < 8) throw ArgumentError("analysis.mu_points must be >= 8");
  if (c.analysis.t_count < 1) throw ArgumentError("analysis.t_count must be >= 1");
  if (c.threads < 0) throw ArgumentError("threads must be >= 0");
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open config " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ArgumentError("config " + path + ": " + e.what());
  }
  return config_from_json(j);
}

void save_config(const RunConfig& c, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ArgumentError("cannot write " + path);
  out << to_json(c).dump(2) << "\n";
}

void write_manifest(const std::string& dir, const std::string& command, const RunConfig& c,
                    const json& extra) {
  std::filesystem::create_directories(dir);
  json m = {{"toolkit", "kwind"}, {"version", kToolkitVersion}, {"command", command}, {"config", to_json(c)}};
  for (const auto& [k, v] : extra.items()) m[k] = v;
  std::ofstream out(std::filesystem::path(dir) / "manifest.json");
  out << m.dump(2) << "\n";
}

}  // namespace kwind

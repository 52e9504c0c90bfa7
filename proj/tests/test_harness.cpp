#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "kwind/commands.hpp"
#include "kwind/config.hpp"
#include "kwind/csv.hpp"
#include "kwind/ensemble.hpp"
#include "kwind/errors.hpp"
#include "test_util.hpp"

using namespace kwind;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("kwind_test_" + std::to_string(::getpid()) + "_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

RunConfig small_spin_config(const fs::path& out) {
  RunConfig c;
  c.model.n_sites = 4;
  c.model.realizations = 3;
  c.model.seed_base = 11;
  c.krylov.n_max = 64;
  c.analysis.t_count = 6;
  c.analysis.mu_points = 64;
  c.output_dir = out.string();
  return c;
}

}  // namespace

TEST_CASE("config round trip, validation and unknown keys") {
  RunConfig c;
  c.model.n_sites = 6;
  c.scramblon.delta = 0.2;
  c.analytic.t_list = {0.0, 1.5};
  c.threads = 3;
  const auto j = to_json(c);
  CHECK(to_json(config_from_json(j)) == j);

  const auto dir = scratch_dir("config");
  save_config(c, (dir / "c.json").string());
  CHECK(to_json(load_config((dir / "c.json").string())) == j);

  auto bad = j;
  bad["model"]["colour"] = 1;
  CHECK_THROWS_AS(config_from_json(bad), ArgumentError);
  auto section = j;
  section["extra"] = nlohmann::json::object();
  CHECK_THROWS_AS(config_from_json(section), ArgumentError);
  auto type = j;
  type["model"]["n_sites"] = "eight";
  CHECK_THROWS_AS(config_from_json(type), ArgumentError);
  auto range = j;
  range["model"]["n_sites"] = 11;
  CHECK_THROWS_AS(config_from_json(range), ArgumentError);
  CHECK_THROWS_AS(load_config((dir / "missing.json").string()), ArgumentError);

  // partial documents keep defaults
  const auto partial = config_from_json(nlohmann::json{{"model", {{"beta", 0.5}}}});
  CHECK(partial.model.beta == 0.5);
  CHECK(partial.model.n_sites == 8);
  CHECK(partial.resolved_threads() >= 1);
  fs::remove_all(dir);
}

TEST_CASE("manifest echoes the resolved config and version") {
  const auto dir = scratch_dir("manifest");
  RunConfig c;
  c.output_dir = dir.string();
  write_manifest(dir.string(), "analytic", c, {{"note", 1}});
  const auto m = nlohmann::json::parse(slurp(dir / "manifest.json"));
  CHECK(m["version"] == kToolkitVersion);
  CHECK(m["command"] == "analytic");
  CHECK(m["config"] == to_json(c));
  CHECK(m["note"] == 1);
  CHECK(to_json(config_from_json(m["config"])) == to_json(c));
  fs::remove_all(dir);
}

TEST_CASE("CSV writer and reader") {
  const auto dir = scratch_dir("csv");
  const auto path = (dir / "x.csv").string();
  {
    CsvWriter w(path, {"a", "b", "c"}, "a in units of 1/(2 alpha)");
    w << 0.1 << 7 << std::string("x");
    w.end_row();
    w.row({1.0 / 3.0, -2.5e-300, 1e300});
    w << 1.0;
    CHECK_THROWS_AS(w.end_row(), StateError);
    w << 2.0 << 3.0;
    CHECK_THROWS_AS(w << 4.0, StateError);
  }
  const auto t = read_csv(path);
  CHECK(t.columns == std::vector<std::string>{"a", "b", "c"});
  CHECK(t.units == "a in units of 1/(2 alpha)");
  REQUIRE(t.rows.size() >= 2);
  CHECK(t.rows[0][0] == 0.1);
  CHECK(t.rows[0][1] == 7.0);
  CHECK(std::isnan(t.rows[0][2]));
  CHECK(t.rows[1][0] == 1.0 / 3.0);
  CHECK(t.rows[1][1] == -2.5e-300);
  CHECK(t.rows[1][2] == 1e300);
  const auto lines = slurp(path);
  CHECK(lines.rfind("a,b,c\n# a in units of 1/(2 alpha)\n", 0) == 0);
  fs::remove_all(dir);
}

TEST_CASE("run_indexed runs every index once and records errors") {
  for (int threads : {1, 3, 8}) {
    std::vector<std::atomic<int>> hits(50);
    const auto errs = run_indexed(50, threads, [&](int i) {
      hits[i]++;
      if (i % 17 == 3) throw NumericError("boom", 0.0, 0.0);
    });
    REQUIRE(errs.size() == 50);
    for (int i = 0; i < 50; ++i) {
      CHECK(hits[i] == 1);
      CHECK(errs[i].empty() == (i % 17 != 3));
    }
  }
  CHECK(run_indexed(0, 4, [](int) {}).empty());
}

TEST_CASE("operator specs") {
  CHECK(max_abs(parse_operator("S1x", 3).matrix() - spin_operator(3, 0, Axis::X).matrix()) == 0.0);
  CHECK(max_abs(parse_operator("S3z", 3).matrix() - spin_operator(3, 2, Axis::Z).matrix()) == 0.0);
  CHECK(max_abs(parse_operator("S10y", 10).matrix() - spin_operator(10, 9, Axis::Y).matrix()) == 0.0);
  CHECK_THROWS_AS(parse_operator("S4x", 3), ArgumentError);
  CHECK_THROWS_AS(parse_operator("S0x", 3), ArgumentError);
  CHECK_THROWS_AS(parse_operator("S1w", 3), ArgumentError);
  CHECK_THROWS_AS(parse_operator("X1", 3), ArgumentError);
}

TEST_CASE("ensemble aggregates are realization means and independent of thread count") {
  auto c = small_spin_config(fs::temp_directory_path());
  c.threads = 1;
  const auto one = run_spin_ensemble(c);
  c.threads = 3;
  const auto three = run_spin_ensemble(c);
  REQUIRE(one.realizations.size() == 3);
  CHECK(one.failures.empty());
  CHECK(one.pilot_alpha > 0.0);
  CHECK(one.ck_mean == three.ck_mean);
  CHECK(one.cs_mean == three.cs_mean);
  CHECK(one.b_mean == three.b_mean);
  CHECK(one.t.size() == 6);
  CHECK(std::abs(one.t[5] * 2 * one.pilot_alpha - c.analysis.t_max) < 1e-12);

  for (std::size_t ti = 0; ti < one.t.size(); ++ti) {
    for (std::size_t m = 0; m < one.mu.size(); m += 9) {
      cplx s{};
      for (const auto& r : one.realizations) s += r.ck[ti][m];
      CHECK(std::abs(s / 3.0 - one.ck_mean[ti][m]) < 1e-12);
    }
    for (std::size_t l = 0; l <= 4; ++l) {
      double s = 0;
      for (const auto& r : one.realizations) s += r.p[ti][l];
      CHECK(std::abs(s / 3.0 - one.p_mean[ti][l]) < 1e-12);
    }
  }
  const auto& r0 = one.realizations[0];
  CHECK(r0.seed == 11);
  for (std::size_t ti = 0; ti < one.t.size(); ++ti) {
    CHECK(std::abs(r0.evolved_norm_sq[ti] - r0.evolved_norm_sq[0]) < 1e-12 * r0.evolved_norm_sq[0]);
  }
}

TEST_CASE("spin-run refuses work beyond the memory budget") {
  const auto dir = scratch_dir("budget");
  auto c = small_spin_config(dir);
  c.model.n_sites = 10;
  c.krylov.n_max = 512;
  ::setenv("KWIND_MEMORY_MB", "16", 1);
  std::ostringstream log;
  const int rc = guarded(log, [&] { return cmd_spin_run(c, log); });
  ::unsetenv("KWIND_MEMORY_MB");
  CHECK(rc == kExitArgument);
  CHECK(log.str().find("MB") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("guarded maps exceptions to exit codes") {
  std::ostringstream log;
  CHECK(guarded(log, [] { return 0; }) == kExitOk);
  CHECK(guarded(log, []() -> int { throw ArgumentError("a"); }) == kExitArgument);
  CHECK(guarded(log, []() -> int { throw RangeError("r"); }) == kExitArgument);
  CHECK(guarded(log, []() -> int { throw ResourceError("m", 10.0, 1.0); }) == kExitArgument);
  CHECK(guarded(log, []() -> int { throw NumericError("n", 1.0, 2.0); }) == kExitNumeric);
  CHECK(guarded(log, []() -> int { throw std::runtime_error("x"); }) == kExitNumeric);
}

TEST_SUITE("cli") {
  namespace {

  std::string cli() {
    const char* p = std::getenv("KWIND_CLI");
    return p ? p : "";
  }

  int run(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + " \"" + cli() + "\" " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string run_capture(const std::string& args, int& code) {
    const auto out = fs::temp_directory_path() / ("kwind_cli_out_" + std::to_string(::getpid()));
    const std::string cmd = "\"" + cli() + "\" " + args + " >\"" + out.string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    auto s = slurp(out);
    fs::remove(out);
    return s;
  }

  void write_json(const fs::path& p, const nlohmann::json& j) { std::ofstream(p) << j.dump(2); }

  }  // namespace

  TEST_CASE("argument errors exit with 1") {
    REQUIRE_MESSAGE(!cli().empty(), "KWIND_CLI must point at the kwind binary");
    CHECK(run("") == 1);
    CHECK(run("spin-run --bogus") == 1);
    CHECK(run("spin-run --config /nonexistent/file.json") == 1);
    const auto dir = scratch_dir("cli_args");
    write_json(dir / "bad.json", {{"model", {{"n_sites", 12}}}});
    CHECK(run("spin-run --config " + (dir / "bad.json").string()) == 1);
    write_json(dir / "unknown.json", {{"modle", nlohmann::json::object()}});
    CHECK(run("analytic --config " + (dir / "unknown.json").string()) == 1);
    fs::remove_all(dir);
  }

  TEST_CASE("dump-config writes the resolved configuration") {
    REQUIRE(!cli().empty());
    const auto dir = scratch_dir("cli_dump");
    const auto f = dir / "resolved.json";
    CHECK(run("spin-run --seed 42 --realizations 7 --threads 2 --out " + dir.string() + " --dump-config " + f.string()) == 0);
    const auto c = load_config(f.string());
    CHECK(c.model.seed_base == 42);
    CHECK(c.model.realizations == 7);
    CHECK(c.threads == 2);
    CHECK(c.output_dir == dir.string());
    fs::remove_all(dir);
  }

  TEST_CASE("spin-run output is identical across thread counts and matches its parts") {
    REQUIRE(!cli().empty());
    const auto dir = scratch_dir("cli_spin");
    auto cfg = small_spin_config(dir / "unused");
    cfg.analysis.per_realization = true;
    save_config(cfg, (dir / "cfg.json").string());
    const auto a = dir / "a", b = dir / "b";
    CHECK(run("spin-run --config " + (dir / "cfg.json").string() + " --threads 1 --out " + a.string()) == 0);
    CHECK(run("spin-run --config " + (dir / "cfg.json").string() + " --threads 3 --out " + b.string()) == 0);
    for (const char* f : {"b_n.csv", "mu_K.csv", "C_K_avg.csv", "C_S_avg.csv", "size_dists_avg.csv",
                          "r00000/C_K.csv", "r00002/size_dists.csv", "r00001/couplings.json"}) {
      REQUIRE(fs::exists(a / f));
      CHECK_MESSAGE(slurp(a / f) == slurp(b / f), f);
    }
    auto ma = nlohmann::json::parse(slurp(a / "manifest.json"));
    auto mb = nlohmann::json::parse(slurp(b / "manifest.json"));
    CHECK(ma["config"]["threads"] == 1);
    ma["config"].erase("threads");
    ma["config"].erase("output_dir");
    mb["config"].erase("threads");
    mb["config"].erase("output_dir");
    CHECK(ma == mb);

    // offline average of the per-realization files reproduces the aggregate
    const auto avg = read_csv((a / "C_K_avg.csv").string());
    std::vector<CsvTable> parts;
    for (const char* r : {"r00000", "r00001", "r00002"}) parts.push_back(read_csv((a / r / "C_K.csv").string()));
    REQUIRE(avg.rows.size() == parts[0].rows.size());
    for (std::size_t i = 0; i < avg.rows.size(); ++i) {
      for (std::size_t col : {3u, 4u}) {
        double s = 0;
        for (const auto& p : parts) s += p.rows[i][col];
        CHECK(std::abs(s / 3.0 - avg.rows[i][col]) < 1e-12);
      }
    }
    fs::remove_all(dir);
  }

  TEST_CASE("spin-run over budget exits with 1 before computing") {
    REQUIRE(!cli().empty());
    const auto dir = scratch_dir("cli_budget");
    CHECK(run("spin-run --out " + dir.string(), "KWIND_MEMORY_MB=8") == 1);
    CHECK_FALSE(fs::exists(dir / "C_K_avg.csv"));
    fs::remove_all(dir);
  }

  TEST_CASE("analytic and scramblon emit their files") {
    REQUIRE(!cli().empty());
    const auto dir = scratch_dir("cli_curves");
    RunConfig c;
    c.analytic.ramp_sizes = {8, 12};
    c.analytic.ramp_n_max = 600;
    c.analytic.ramp_t_count = 11;
    c.analytic.mu_points = 256;
    c.scramblon.h_list = {1.0, 0.5};
    c.scramblon.s_points = 20;
    c.scramblon.mu_points = 32;
    c.scramblon.peak_offsets = {0.01, 0.1};
    save_config(c, (dir / "cfg.json").string());
    CHECK(run("analytic --config " + (dir / "cfg.json").string() + " --out " + (dir / "an").string()) == 0);
    for (const char* f : {"solvable_phi.csv", "solvable_C_K.csv", "solvable_mu_K.csv", "largeq_phi.csv",
                          "largeq_C_K.csv", "ramp_N8.csv", "ramp_N12.csv", "ramp_collapse.csv", "manifest.json"}) {
      CHECK_MESSAGE(fs::exists(dir / "an" / f), f);
    }
    const auto mk = read_csv((dir / "an" / "solvable_mu_K.csv").string());
    for (const auto& row : mk.rows) {
      if (row[0] > 0.0) CHECK(std::abs(std::remainder(row[1] - row[2], 2 * M_PI)) < 2 * M_PI / 1024 + 1e-12);
    }

    CHECK(run("scramblon --config " + (dir / "cfg.json").string() + " --out " + (dir / "sc").string()) == 0);
    for (const char* f : {"scramblon_dists_h1.csv", "scramblon_dists_h0.5.csv", "scramblon_C_S_h1.csv",
                          "scramblon_C_S_h0.5.csv", "peak_in_n_h1.csv", "peak_in_n_h0.5.csv", "manifest.json"}) {
      CHECK_MESSAGE(fs::exists(dir / "sc" / f), f);
    }
    const auto m = nlohmann::json::parse(slurp(dir / "sc" / "manifest.json"));
    CHECK(m["command"] == "scramblon");
    fs::remove_all(dir);
  }

  TEST_CASE("analytic rejects alpha beta above pi") {
    REQUIRE(!cli().empty());
    const auto dir = scratch_dir("cli_bound");
    write_json(dir / "cfg.json", {{"analytic", {{"nu", 1.2}}}});
    CHECK(run("analytic --config " + (dir / "cfg.json").string() + " --out " + dir.string()) == 1);
    fs::remove_all(dir);
  }

  TEST_CASE("selftest reports per-check results and catches tightened tolerances") {
    REQUIRE(!cli().empty());
    int code = -1;
    const auto out = run_capture("selftest --only 1,3,4", code);
    CHECK(code == 0);
    CHECK(out.find("[PASS]  1 ") != std::string::npos);
    CHECK(out.find("[PASS]  3 ") != std::string::npos);
    CHECK(out.find("[PASS]  4 ") != std::string::npos);
    CHECK(out.find(" s)") != std::string::npos);
    const auto bad = run_capture("selftest --only 1 --tolerance-scale 1e-12", code);
    CHECK(code != 0);
    CHECK(bad.find("[FAIL]  1 ") != std::string::npos);
  }
}

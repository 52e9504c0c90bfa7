// kwind: command-line front end.
//
//   kwind spin-run  [--config F] [--out DIR] [--threads N] [--seed S] [--realizations R]
//   kwind analytic  [--config F] [--out DIR]
//   kwind scramblon [--config F] [--out DIR] [--threads N]
//   kwind selftest  [--realizations R] [--threads N] [--only 1,5] [--tolerance-scale X]
//
// KWIND_MEMORY_MB sets the memory budget in MB (default 2048).

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "kwind/commands.hpp"
#include "kwind/config.hpp"

int main(int argc, char** argv) {
  using namespace kwind;
  CLI::App app{"Krylov and size winding toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<int> threads;
  std::optional<std::uint64_t> seed;
  std::optional<int> realizations;
  std::string dump_path;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--threads", threads, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
    sub->add_option("--dump-config", dump_path, "write the resolved configuration and exit");
  };
  auto* spin = app.add_subcommand("spin-run", "disordered spin-model ensemble");
  add_common(spin);
  spin->add_option("--seed", seed, "seed of realization 0");
  spin->add_option("--realizations", realizations, "number of disorder realizations")->check(CLI::PositiveNumber);
  auto* analytic = app.add_subcommand("analytic", "solvable, large-q and ramp-plateau curves");
  add_common(analytic);
  auto* scr = app.add_subcommand("scramblon", "scramblon size and winding distributions");
  add_common(scr);

  AcceptanceOptions acc;
  auto* self = app.add_subcommand("selftest", "acceptance checks with measured tolerances");
  self->add_option("--realizations", acc.realizations, "ensemble size for the spin-model check")
      ->check(CLI::PositiveNumber);
  self->add_option("--threads", acc.threads, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
  self->add_option("--only", acc.only, "run only these check ids")->delimiter(',');
  self->add_option("--tolerance-scale", acc.tolerance_scale, "multiply every tolerance (mutation testing)")
      ->check(CLI::PositiveNumber);
  self->add_option("--krylov-depth", acc.krylov_depth, "Lanczos depth for the spin-model check")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitArgument;
  }

  if (self->parsed()) return guarded(std::cerr, [&] { return cmd_selftest(acc, std::cout); });

  RunConfig cfg;
  const int rc = guarded(std::cerr, [&] {
    if (!config_path.empty()) cfg = load_config(config_path);
    if (out_dir) cfg.output_dir = *out_dir;
    if (threads) cfg.threads = *threads;
    if (seed) cfg.model.seed_base = *seed;
    if (realizations) cfg.model.realizations = *realizations;
    cfg = config_from_json(to_json(cfg));  // revalidate after overrides
    return kExitOk;
  });
  if (rc != kExitOk) return rc;
  if (!dump_path.empty()) {
    return guarded(std::cerr, [&] {
      save_config(cfg, dump_path);
      return kExitOk;
    });
  }
  return guarded(std::cerr, [&] {
    if (spin->parsed()) return cmd_spin_run(cfg, std::cout);
    if (analytic->parsed()) return cmd_analytic(cfg, std::cout);
    return cmd_scramblon(cfg, std::cout);
  });
}

// iga-contact: runs a Hertz contact convergence study from a config file.
//
//   iga-contact run --config FILE [--scenario S] [--p 2|3] [--levels N]
//                   [--r0 X] [--out DIR] [--threads N] [--vtk]
//
// Exit codes: 0 success, 1 invalid configuration or I/O failure,
// 2 solver failure (partial results are still written).

#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "igac/cli.hpp"

namespace {

std::string fmt(double x, const char* f = "%.4e") {
  char buf[32];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

void report(const igac::BenchResult& res, int reported) {
  std::cout << "level      h        dofs   mult  iters  active   time[s]\n";
  for (std::size_t i = 0; i < res.levels.size(); ++i) {
    const auto& l = res.levels[i];
    char line[128];
    std::snprintf(line, sizeof line, "%5d  %9.4e %7d %6d %6d %7d %9.2f%s\n", l.level, l.h, l.num_dofs,
                  l.num_multipliers, l.newton_iterations, l.active_count, l.wall_time,
                  static_cast<int>(i) >= reported ? "  (reference)" : "");
    std::cout << line;
  }
  if (res.table.rows.empty()) return;
  std::cout << "\n      h        l2_disp     h1_disp     l2_mult_ana l2_mult_ref\n";
  for (const auto& r : res.table.rows) {
    std::cout << fmt(r.h) << "  " << fmt(r.l2_disp) << "  " << fmt(r.h1_disp) << "  " << fmt(r.l2_mult_analytical)
              << "  " << fmt(r.l2_mult_refined) << "\n";
  }
  if (res.table.rows.size() >= 2) {
    const auto k = res.table.rates();
    std::cout << "rate        " << fmt(k.l2_disp, "%10.3f") << "  " << fmt(k.h1_disp, "%10.3f") << "  "
              << fmt(k.l2_mult_analytical, "%10.3f") << "  " << fmt(k.l2_mult_refined, "%10.3f") << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Isogeometric frictionless contact: Hertz convergence studies"};
  app.require_subcommand(1);
  auto* run = app.add_subcommand("run", "Run a scenario and write CSV results");

  std::string config;
  igac::Overrides flags;
  std::string scenario, out;
  int p = 0, levels = 0, threads = 0;
  double r0 = 0.0;
  bool vtk = false;

  std::string scenarios;
  for (const auto& n : igac::scenario_names()) scenarios += (scenarios.empty() ? "" : ", ") + n;
  run->add_option("--config", config, "key = value config file (keys: see README)")->required();
  run->add_option("--scenario", scenario, "Scenario: " + scenarios);
  run->add_option("--p", p, "Spline degree, 2 or 3 (default 2)");
  run->add_option("--levels", levels, "Reported refinement levels (default: scenario dependent)");
  run->add_option("--r0", r0, "Augmentation constant, scaled by E (default 100)");
  run->add_option("--out", out, "Output directory (default out)");
  run->add_option("--threads", threads, "Levels solved concurrently (default 1)");
  run->add_flag("--vtk", vtk, "Also write solution.vtk for the finest level");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  if (!scenario.empty()) flags.emplace_back("scenario", scenario);
  if (run->count("--p")) flags.emplace_back("degree", std::to_string(p));
  if (run->count("--levels")) flags.emplace_back("levels", std::to_string(levels));
  if (run->count("--r0")) flags.emplace_back("r0", fmt(r0, "%.17g"));
  if (!out.empty()) flags.emplace_back("out", out);
  if (run->count("--threads")) flags.emplace_back("threads", std::to_string(threads));
  if (vtk) flags.emplace_back("vtk", "true");

  igac::RunConfig cfg;
  try {
    cfg = igac::parse_config(config, flags);
  } catch (const igac::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  std::cout << igac::config_text(cfg) << "\n";
  igac::BenchResult res;
  try {
    res = igac::run_benchmark(cfg.bench);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  report(res, cfg.bench.levels);
  try {
    for (const auto& f : igac::emit_outputs(res, cfg)) std::cout << "wrote " << f.string() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  if (!res.complete) {
    std::cerr << "error: " << res.message << "\n";
    return 2;
  }
  return 0;
}

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>

#include "telc/errors.hpp"
#include "telc/harness.hpp"
#include "telc/scenario.hpp"

namespace {

struct CommonOpts {
  std::string scenario_path;
  std::optional<std::int64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::string> controller;
  bool emit_plot_data = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_controller) {
  cmd->add_option("--scenario", opts.scenario_path, "Scenario file")->required();
  cmd->add_option("--seed", opts.seed, "Override the scenario seed");
  cmd->add_option("--out", opts.out_dir, "Override the output directory");
  if (with_controller) {
    cmd->add_option("--controller", opts.controller, "Override the controller mode")
        ->check(CLI::IsMember({"traditional", "telc"}));
  }
  cmd->add_flag("--emit-plot-data", opts.emit_plot_data,
                "Also write long-format plot data files");
}

telc::ScenarioConfig load_with_overrides(const CommonOpts& opts) {
  telc::ScenarioConfig cfg = telc::load_scenario(opts.scenario_path);
  if (opts.seed) {
    cfg.seed = static_cast<std::uint64_t>(*opts.seed);
    cfg.plant.seed = cfg.seed;
  }
  if (opts.out_dir) cfg.output_dir = *opts.out_dir;
  if (opts.controller) {
    cfg.controller = *opts.controller == "telc" ? telc::ControllerMode::kTelc
                                                : telc::ControllerMode::kTraditional;
  }
  return cfg;
}

void print_summary(const char* label, const telc::RunSummary& s) {
  std::printf("%s: mean_euclid=%.4f m  max_euclid=%.4f m  rms_heading=%.4f rad  "
              "mean|nu_b|=%.4f  mean|omega_b|=%.4f  violations=%d\n",
              label, s.mean_euclidean_error, s.max_euclidean_error, s.rms_heading_error,
              s.mean_abs_feedback_nu, s.mean_abs_feedback_omega, s.constraint_violations);
  std::printf("%s: final gains k_nu=(%.4f, %.4f)  k_omega=(%.4f, %.4f)\n", label,
              s.final_gains.k_nu_1, s.final_gains.k_nu_0, s.final_gains.k_omega_1,
              s.final_gains.k_omega_0);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"TELC path-tracking simulation laboratory"};
  app.require_subcommand(1);

  CommonOpts run_opts, cmp_opts, sweep_opts;
  int n_seeds = 10;

  CLI::App* run_cmd = app.add_subcommand("run", "Run one scenario and write trace/summary");
  add_common(run_cmd, run_opts, true);
  CLI::App* cmp_cmd =
      app.add_subcommand("compare", "Run traditional and telc on the same seed");
  add_common(cmp_cmd, cmp_opts, false);
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Comparison across consecutive seeds");
  add_common(sweep_cmd, sweep_opts, false);
  sweep_cmd->add_option("--seeds", n_seeds, "Number of seeds")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    namespace fs = std::filesystem;
    if (run_cmd->parsed()) {
      const telc::ScenarioConfig cfg = load_with_overrides(run_opts);
      const std::string prefix = cfg.name + "_" + telc::to_string(cfg.controller);
      const telc::RunResult result =
          telc::run_scenario_to_dir(cfg, prefix, run_opts.emit_plot_data);
      print_summary(telc::to_string(cfg.controller), result.summary);
      std::printf("wrote %s/%s_{trace.csv,diagnostics.csv,summary.json}\n",
                  cfg.output_dir.c_str(), prefix.c_str());
    } else if (cmp_cmd->parsed()) {
      telc::ScenarioConfig cfg = load_with_overrides(cmp_opts);
      fs::create_directories(cfg.output_dir);
      const telc::ComparisonReport report = telc::compare(cfg);
      print_summary("traditional", report.traditional);
      print_summary("telc", report.telc);
      std::printf("error ratio (telc/traditional) = %.4f\n", report.error_ratio);
      telc::write_comparison_json((fs::path(cfg.output_dir) / (cfg.name + "_comparison.json")).string(),
                                  report, cfg);
    } else if (sweep_cmd->parsed()) {
      telc::ScenarioConfig cfg = load_with_overrides(sweep_opts);
      fs::create_directories(cfg.output_dir);
      const telc::SweepReport report = telc::sweep(cfg, n_seeds);
      for (const auto& e : report.entries) {
        std::printf("seed %llu: traditional=%.4f m  telc=%.4f m  ratio=%.4f\n",
                    static_cast<unsigned long long>(e.seed), e.traditional_mean_error,
                    e.telc_mean_error, e.ratio);
      }
      std::printf("ratio mean=%.4f std=%.4f over %zu seeds\n", report.mean_ratio,
                  report.std_ratio, report.entries.size());
      telc::write_sweep_json((fs::path(cfg.output_dir) / (cfg.name + "_sweep.json")).string(),
                             report, cfg);
    }
  } catch (const telc::ConfigError& err) {
    std::fprintf(stderr, "config error: %s\n", err.what());
    return 2;
  } catch (const std::exception& err) {
    std::fprintf(stderr, "runtime error: %s\n", err.what());
    return 3;
  }
  return 0;
}

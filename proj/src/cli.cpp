#include "lulc/cli.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <iomanip>
#include <optional>

#include "lulc/checkpoint.hpp"
#include "lulc/config.hpp"
#include "lulc/error.hpp"
#include "lulc/evaluation.hpp"
#include "lulc/io.hpp"
#include "lulc/manifest.hpp"
#include "lulc/scenario.hpp"
#include "lulc/seed_grid.hpp"

namespace lulc {
namespace {

namespace fs = std::filesystem;

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<int> workers;
  std::optional<int> updates;
  std::optional<int> steps;
  std::string checkpoint;
  std::string scenario;
  bool print_config = false;
};

std::shared_ptr<spdlog::logger> logger() {
  static auto log = [] {
    auto l = spdlog::stderr_color_mt("lulc_ppo");
    l->set_pattern("[%H:%M:%S] [%l] %v");
    spdlog::level::level_enum level = spdlog::level::info;
    if (const char* env = std::getenv("LULC_PPO_LOG")) {
      level = spdlog::level::from_str(env);
    }
    l->set_level(level);
    return l;
  }();
  return log;
}

struct Loaded {
  RunConfig cfg;
  LulcGrid grid;
  CoefficientTable table;
  std::vector<fs::path> inputs;
};

// Config, grid and coefficients; every failure here maps to exit 1.
Loaded load_inputs_unchecked(const Options& opt) {
  RunConfig cfg = opt.config.empty() ? RunConfig{} : load_run_config(opt.config);
  if (opt.seed) cfg.ppo.seed = *opt.seed;
  if (!opt.out.empty()) cfg.out_dir = opt.out;
  if (opt.workers) cfg.ppo.workers = *opt.workers;
  if (opt.updates) cfg.ppo.total_updates = *opt.updates;
  if (opt.steps) cfg.evaluate_steps = *opt.steps;
  try {
    cfg.ppo.validate();
    if (cfg.evaluate_steps < 0) fail(ErrorKind::kConfig, "--steps must be >= 0");
  } catch (const Error& e) {
    fail(ErrorKind::kConfig, e.what());
  }
  auto grid = load_grid(cfg);
  auto table = load_coefficients(cfg);
  std::vector<fs::path> inputs;
  for (const auto& p : {fs::path(opt.config), cfg.grid_path, cfg.frozen_mask_path,
                        cfg.coefficients_path}) {
    if (!p.empty()) inputs.push_back(p);
  }
  return {std::move(cfg), std::move(grid), table, std::move(inputs)};
}

Loaded load_inputs(const Options& opt) {
  try {
    return load_inputs_unchecked(opt);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kConfig) throw;
    fail(ErrorKind::kConfig, e.what());
  }
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorKind::kIo, "cannot create directory " + dir.string());
}

std::string histogram_line(const ClassHistogram& h) {
  std::string s;
  for (const auto c : kAllClasses) {
    s += (s.empty() ? "" : " ") + std::string(class_name(c)) + "=" + std::to_string(h[c]);
  }
  return s;
}

int cmd_train(const Options& opt, std::ostream& out) {
  const auto started = utc_timestamp();
  const auto in = load_inputs(opt);
  const auto& cfg = in.cfg;
  ensure_dir(cfg.out_dir);
  const auto ckpt_path = cfg.out_dir / "checkpoint.txt";
  const auto stats_path = cfg.out_dir / "stats.csv";

  std::vector<TrainStats> running;
  TrainHooks hooks;
  hooks.on_update = [&](const TrainerState& state, const TrainStats& s) {
    running.push_back(s);
    logger()->debug("update {} mean_reward {:.5f} entropy {:.4f} clip {:.3f} runoff {:.6f}",
                    s.update, s.mean_reward, s.entropy, s.clip_fraction,
                    s.final_episode_runoff);
    if (s.update % 10 == 0) {
      logger()->info("update {}/{} mean_reward {:.4f} episode runoff {:.6f} m3/s", s.update,
                     cfg.ppo.total_updates, s.mean_reward, s.final_episode_runoff);
    }
    if (cfg.checkpoint_every > 0 && s.update % cfg.checkpoint_every == 0) {
      write_checkpoint(ckpt_path, state);
      write_file_atomic(stats_path, format_stats_csv(running));
    }
  };
  logger()->info("training {} updates, horizon {}, seed {}", cfg.ppo.total_updates,
                 cfg.ppo.rollout_horizon, cfg.ppo.seed);
  const auto result = train(in.grid, cfg.env, in.table, cfg.ppo, hooks);
  write_checkpoint(ckpt_path, result.state);
  write_file_atomic(stats_path, format_stats_csv(result.stats));

  RunManifest manifest;
  manifest.command = "train";
  manifest.config_snapshot = format_run_config(cfg);
  manifest.seed = cfg.ppo.seed;
  manifest.started_at = started;
  write_manifest(cfg.out_dir / "manifest.json", manifest, in.inputs,
                 {"checkpoint.txt", "stats.csv"});
  out << "checkpoint: " << ckpt_path.string() << "\nstats: " << stats_path.string() << "\n";
  if (!result.stats.empty()) {
    out << "final episode runoff: " << format_double(result.stats.back().final_episode_runoff)
        << " m3/s\n";
  }
  return kExitOk;
}

int cmd_evaluate(const Options& opt, std::ostream& out, std::ostream& err) {
  const auto started = utc_timestamp();
  const auto in = load_inputs(opt);
  const auto& cfg = in.cfg;
  const fs::path ckpt_path = opt.checkpoint.empty() ? cfg.out_dir / "checkpoint.txt"
                                                    : fs::path(opt.checkpoint);
  TrainerState state;
  try {
    state = read_checkpoint(ckpt_path);
  } catch (const Error& e) {
    err << "error: " << ckpt_path.string() << ": " << e.what() << "\n";
    return kExitRuntimeError;
  }

  const auto report =
      compare_all(in.grid, builtin_scenarios(), state.model.policy, cfg.env, in.table);
  const int steps = cfg.evaluate_steps > 0 || opt.steps ? cfg.evaluate_steps
                                                         : static_cast<int>(in.grid.size());
  const auto greedy = run_greedy(in.grid, cfg.env, in.table, state.model.policy, steps);

  ensure_dir(cfg.out_dir);
  emit_reports(report, greedy.transitions, cfg.out_dir);
  write_file_atomic(cfg.out_dir / "final_grid.csv", format_grid_csv(greedy.final_grid));
  auto inputs = in.inputs;
  inputs.push_back(ckpt_path);
  RunManifest manifest;
  manifest.command = "evaluate";
  manifest.config_snapshot = format_run_config(cfg);
  manifest.seed = cfg.ppo.seed;
  manifest.started_at = started;
  write_manifest(cfg.out_dir / "evaluate_manifest.json", manifest, inputs, {"comparison.csv", "transition.csv", "comparison.svg", "final_grid.csv"});

  out << "runoff comparison (m3/s)\n";
  for (const auto& e : report.entries) {
    out << "  " << std::left << std::setw(10) << e.label << format_double(e.runoff_m3_per_s)
        << "\n";
  }
  out << "optimized is strict minimum: " << (report.optimized_is_strict_minimum ? "yes" : "no")
      << "\n\n" << format_transition_csv(greedy.transitions);
  return kExitOk;
}

int cmd_scenario(const Options& opt, std::ostream& out) {
  const auto in = load_inputs(opt);
  std::optional<Scenario> s = builtin_scenario(opt.scenario);
  if (!s) {
    if (!fs::exists(opt.scenario)) {
      fail(ErrorKind::kConfig, "unknown scenario '" + opt.scenario +
                                   "' (expected s1..s5 or an existing CSV file)");
    }
    try {
      s = read_scenario_csv(opt.scenario);
    } catch (const Error& e) {
      fail(ErrorKind::kConfig, e.what());
    }
  }
  const auto before = class_histogram(in.grid);
  const auto report = apply_scenario(before, *s);
  const auto q_before = runoff_from_histogram(before, in.grid.cell_area_m2(), in.table);
  const auto q_after = runoff_from_histogram(report.after, in.grid.cell_area_m2(), in.table);

  out << "scenario " << s->name() << "\n"
      << "before:   " << histogram_line(report.before) << "\n"
      << "targets:  " << histogram_line(report.targets) << "\n"
      << "after:    " << histogram_line(report.after) << "\n"
      << "residual: " << report.residual << " -> "
      << (report.residual_assigned_to ? class_name(*report.residual_assigned_to) : "none")
      << "\n"
      << "runoff:   " << format_double(q_before.total_m3_per_s) << " -> "
      << format_double(q_after.total_m3_per_s) << " m3/s\n";

  std::string csv = "quantity,before,after\n";
  for (const auto c : kAllClasses) {
    csv += std::string(class_name(c)) + "," + std::to_string(report.before[c]) + "," +
           std::to_string(report.after[c]) + "\n";
  }
  csv += "runoff_m3_per_s," + format_double(q_before.total_m3_per_s) + "," +
         format_double(q_after.total_m3_per_s) + "\n";
  ensure_dir(in.cfg.out_dir);
  const auto path = in.cfg.out_dir / ("scenario_" + s->name() + ".csv");
  write_file_atomic(path, csv);
  out << "written: " << path.string() << "\n";
  return kExitOk;
}

int cmd_make_seed_grid(const Options& opt, std::ostream& out) {
  const fs::path dir = opt.out.empty() ? fs::path(".") : fs::path(opt.out);
  ensure_dir(dir);
  const auto grid = make_seed_grid();
  write_file_atomic(dir / "seed_grid.csv", format_grid_csv(grid));
  write_file_atomic(dir / "seed_frozen.csv", format_frozen_csv(grid));
  out << "histogram: " << histogram_line(class_histogram(grid)) << "\n"
      << "frozen pixels: " << grid.frozen_count() << "\n"
      << "written: " << (dir / "seed_grid.csv").string() << ", "
      << (dir / "seed_frozen.csv").string() << "\n";
  return kExitOk;
}

int cmd_print_config(const Options& opt, std::ostream& out) {
  RunConfig cfg = opt.config.empty() ? RunConfig{} : load_run_config(opt.config);
  if (opt.seed) cfg.ppo.seed = *opt.seed;
  if (!opt.out.empty()) cfg.out_dir = opt.out;
  if (opt.workers) cfg.ppo.workers = *opt.workers;
  if (opt.updates) cfg.ppo.total_updates = *opt.updates;
  if (opt.steps) cfg.evaluate_steps = *opt.steps;
  out << format_run_config(cfg);
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Learn land-use change policies that minimize rational-method runoff", "lulc_ppo"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", opt.config, "Run configuration file");
    cmd->add_option("--seed", opt.seed, "Override the 64-bit seed");
    cmd->add_option("--out", opt.out, "Output directory");
    cmd->add_flag("--print-config", opt.print_config, "Print the effective configuration and exit");
  };
  auto* train_cmd = app.add_subcommand("train", "Train the actor-critic policy");
  add_common(train_cmd);
  train_cmd->add_option("--workers", opt.workers, "Rollout workers (1 = deterministic)");
  train_cmd->add_option("--updates", opt.updates, "Override total PPO updates");

  auto* eval_cmd = app.add_subcommand("evaluate", "Compare runoff and emit reports");
  add_common(eval_cmd);
  eval_cmd->add_option("--checkpoint", opt.checkpoint, "Checkpoint (default <out>/checkpoint.txt)");
  eval_cmd->add_option("--steps", opt.steps, "Greedy sweep steps for the transition matrix");

  auto* scen_cmd = app.add_subcommand("scenario", "Apply a management scenario");
  add_common(scen_cmd);
  scen_cmd->add_option("scenario", opt.scenario, "s1..s5 or a scenario CSV")->required();

  auto* print_cmd = app.add_subcommand("print-config", "Print the effective configuration");
  add_common(print_cmd);
  print_cmd->add_option("--workers", opt.workers);
  print_cmd->add_option("--updates", opt.updates);
  print_cmd->add_option("--steps", opt.steps);

  auto* seed_cmd = app.add_subcommand("make-seed-grid", "Write the bundled seed grid");
  seed_cmd->add_option("--out", opt.out, "Output directory");

  std::vector<std::string> argv_store{"lulc_ppo"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfigError;
  }

  try {
    if (opt.print_config) return cmd_print_config(opt, out);
    if (*train_cmd) return cmd_train(opt, out);
    if (*eval_cmd) return cmd_evaluate(opt, out, err);
    if (*scen_cmd) return cmd_scenario(opt, out);
    if (*print_cmd) return cmd_print_config(opt, out);
    if (*seed_cmd) return cmd_make_seed_grid(opt, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    switch (e.kind()) {
      case ErrorKind::kConfig:
        return kExitConfigError;
      case ErrorKind::kInfeasibleScenario:
        return kExitInfeasibleScenario;
      default:
        return kExitRuntimeError;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntimeError;
  }
  return kExitConfigError;
}

}  // namespace lulc

#include "lloss_cli/commands.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "lloss_cli/config.hpp"
#include "lloss_cli/report.hpp"

#ifndef LLOSS_VERSION
#define LLOSS_VERSION "unknown"
#endif

namespace lloss::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_manifest(const fs::path& run_dir, const json& manifest) {
  const fs::path tmp = run_dir / "manifest.json.tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    out << manifest.dump(2) << '\n';
    if (!out) throw FormatError("cannot write " + tmp.string());
  }
  fs::rename(tmp, run_dir / "manifest.json");
}

json planned_files(const ExperimentConfig& cfg) {
  json strategies = json::array();
  for (const auto& s : cfg.strategies) {
    json trials = json::array();
    for (std::size_t t = 0; t < cfg.active.trials; ++t) {
      const std::string stem = s.name() + "/trial" + std::to_string(t);
      trials.push_back({{"csv", stem + ".csv"},
                        {"losses", stem + "_losses.csv"},
                        {"epochs", stem + "_epochs.csv"},
                        {"checkpoint", stem + ".ckpt"}});
    }
    strategies.push_back({{"name", s.name()}, {"trials", trials}});
  }
  return strategies;
}

}  // namespace

int cmd_validate(const fs::path& config, std::ostream& out, std::ostream& err) {
  ExperimentConfig cfg;
  try {
    cfg = load_config(config);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalidConfig;
  }
  const auto problems = cfg.violations();
  for (const auto& p : problems) out << p << '\n';
  return problems.empty() ? kExitOk : kExitInvalidConfig;
}

int cmd_run(const fs::path& config, std::size_t jobs, const std::optional<fs::path>& out_dir, std::ostream& log,
            std::ostream& err) {
  ExperimentConfig cfg;
  try {
    cfg = load_config(config);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalidConfig;
  }
  if (out_dir) cfg.output_dir = *out_dir;
  const auto problems = cfg.violations();
  if (!problems.empty()) {
    err << "invalid config " << config.string() << ":\n";
    for (const auto& p : problems) err << "  " << p << '\n';
    return kExitInvalidConfig;
  }

  const fs::path run_dir = cfg.output_dir / cfg.run_id;
  json manifest;
  try {
    fs::create_directories(run_dir);
    manifest = {{"version", LLOSS_VERSION},
                {"status", "running"},
                {"start_time", utc_now()},
                {"end_time", nullptr},
                {"task", task_name(cfg.dataset.task())},
                {"config", config_to_json(cfg)},
                {"summary", "summary.csv"},
                {"strategies", planned_files(cfg)}};
    write_manifest(run_dir, manifest);

    log << "running " << cfg.strategies.size() << " strategies x " << cfg.active.trials << " trials into "
        << run_dir.string() << '\n';
    const ExperimentResult result = run_experiment(cfg, jobs);
    write_run_outputs(run_dir, result);

    for (std::size_t s = 0; s < result.strategies.size(); ++s) {
      const auto& sr = result.strategies[s];
      for (std::size_t t = 0; t < sr.trials.size(); ++t) {
        json& entry = manifest["strategies"][s]["trials"][t];
        entry["wall_seconds"] = sr.trials[t].wall_seconds;
        entry["labels_revealed"] = sr.trials[t].labels_revealed;
      }
      if (!sr.summary.empty()) {
        log << "  " << sr.strategy.name() << ": final test metric " << format_real(sr.summary.back().mean) << '\n';
      }
    }
    manifest["status"] = "complete";
    manifest["end_time"] = utc_now();
    write_manifest(run_dir, manifest);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    if (!manifest.is_null()) {
      try {
        manifest["status"] = "failed";
        manifest["error"] = e.what();
        manifest["end_time"] = utc_now();
        write_manifest(run_dir, manifest);
      } catch (const std::exception&) {
      }
    }
    return kExitFailure;
  }
  return kExitOk;
}

int cmd_report(const fs::path& run_dir, std::ostream& out, std::ostream& err) {
  try {
    const ReportFiles files = write_report(run_dir);
    for (const auto& group : {files.curves, files.summaries, files.scatters}) {
      for (const auto& p : group) out << p.string() << '\n';
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Active learning with learned loss prediction"};
  app.set_version_flag("--version", std::string(LLOSS_VERSION));
  app.require_subcommand(1);

  fs::path config;
  std::size_t jobs = 1;
  std::optional<fs::path> out_dir;
  auto* run = app.add_subcommand("run", "Run an experiment");
  run->add_option("--config", config, "JSON experiment config")->required();
  run->add_option("--jobs", jobs, "Trials to run concurrently")->check(CLI::PositiveNumber);
  run->add_option("--out", out_dir, "Output root, overriding output_dir");

  fs::path run_dir;
  auto* report = app.add_subcommand("report", "Render SVG plots and summaries for a run");
  report->add_option("run_dir", run_dir, "Run directory")->required();

  fs::path validate_config;
  auto* validate = app.add_subcommand("validate", "List every violated config constraint");
  validate->add_option("--config", validate_config, "JSON experiment config")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalidConfig;
  }

  if (run->parsed()) return cmd_run(config, jobs, out_dir, std::cout, std::cerr);
  if (report->parsed()) return cmd_report(run_dir, std::cout, std::cerr);
  return cmd_validate(validate_config, std::cout, std::cerr);
}

}  // namespace lloss::cli

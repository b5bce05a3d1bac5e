#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "lloss/experiment.hpp"

namespace lloss::cli {

/// Missing or partial run data.
class ReportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<CycleRecord> read_trial_csv(const std::filesystem::path& path);
LossSnapshot read_losses_csv(const std::filesystem::path& path);

struct ReportFiles {
  std::vector<std::filesystem::path> curves;     // one per metric
  std::vector<std::filesystem::path> summaries;  // one per metric
  std::vector<std::filesystem::path> scatters;   // one per strategy
};

/// Reads `<run_dir>/manifest.json` and the trial CSVs it lists, then writes
/// everything under `<run_dir>/report/`.
ReportFiles write_report(const std::filesystem::path& run_dir);

}  // namespace lloss::cli

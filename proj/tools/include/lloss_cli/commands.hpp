#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>

namespace lloss::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitInvalidConfig = 2;

/// Runs the experiment into `<out or output_dir>/<run_id>`.
int cmd_run(const std::filesystem::path& config, std::size_t jobs, const std::optional<std::filesystem::path>& out,
            std::ostream& log, std::ostream& err);
int cmd_validate(const std::filesystem::path& config, std::ostream& out, std::ostream& err);
int cmd_report(const std::filesystem::path& run_dir, std::ostream& out, std::ostream& err);

/// Parses argv and dispatches to a subcommand.
int run_cli(int argc, char** argv);

}  // namespace lloss::cli

// Subcommands of the command-line tool. Each returns the process exit code.
#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>

namespace starshape {

enum ExitCode : int {
  kExitSuccess = 0,
  kExitFailure = 1,       // hypothesis or verification failure
  kExitInputError = 2,
  kExitContinuation = 3,
};

enum class ExportFormat { Obj, Csv };

struct CommandOptions {
  std::optional<std::filesystem::path> output_dir;  // overrides [output] dir
  int threads = 1;
};

int cmd_check(const std::filesystem::path& config, const CommandOptions& options, std::ostream& out,
              std::ostream& err);

int cmd_solve(const std::filesystem::path& config, const CommandOptions& options, std::ostream& out,
              std::ostream& err);

int cmd_verify(const std::filesystem::path& solution, const std::filesystem::path& config,
               const CommandOptions& options, std::ostream& out, std::ostream& err);

int cmd_export(const std::filesystem::path& solution, const std::filesystem::path& config,
               ExportFormat format, const std::filesystem::path& destination,
               const CommandOptions& options, std::ostream& out, std::ostream& err);

}  // namespace starshape

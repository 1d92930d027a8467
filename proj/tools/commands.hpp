#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace edgemarket::cli {

enum ExitCode : int {
  exit_ok = 0,
  exit_usage = 2,
  exit_validation = 3,
  exit_convergence = 4,
  exit_io = 5,
};

/// Bad command-line input that CLI11 cannot catch (missing config, ...).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Environment variable naming the directory searched for config files.
inline constexpr const char* config_dir_variable = "EDGEMARKET_CONFIG_DIR";

/// Command-line values that override the config file.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::vector<std::string> mechanisms;
  std::optional<std::size_t> workers;
  std::optional<double> kkt_tolerance;
  std::optional<bool> certificates;
};

/// `name` as given if it exists, else looked up in $EDGEMARKET_CONFIG_DIR
/// (with ".json" appended when it has no extension). An empty name
/// selects `fallback` from that directory; nullopt when there is no
/// such file and no directory is set.
[[nodiscard]] std::optional<std::filesystem::path> resolve_config(const std::string& name,
                                                                  const std::string& fallback);

// Each command prints a human-readable report to `out`, diagnostics to
// `err`, and returns an ExitCode. Exceptions are mapped to exit codes.
int cmd_generate(const std::string& config, const Overrides& overrides,
                 const std::filesystem::path& out_file, std::ostream& out, std::ostream& err);
int cmd_solve(const std::filesystem::path& instance_file, const std::string& mechanism,
              const Overrides& overrides, const std::filesystem::path& out_file, std::ostream& out,
              std::ostream& err);
/// Writes metrics.csv and summary.csv into `out_dir`.
int cmd_experiment(const std::string& config, const Overrides& overrides,
                   const std::filesystem::path& out_dir, std::ostream& out, std::ostream& err);
/// `kind` may be empty when the config names it.
int cmd_sweep(const std::string& config, const std::string& kind, const Overrides& overrides,
              const std::filesystem::path& out_file, std::ostream& out, std::ostream& err);

}  // namespace edgemarket::cli

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hfevd/decomposition.hpp"
#include "hfevd/report_io.hpp"

namespace hfevd {

inline constexpr int kConfigVersion = 1;

/// Command-line values; flags override the corresponding config entries.
struct CliOptions {
  std::string command;  // decompose | ofevd | irf | fit-tvar | simulate
  std::filesystem::path config;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
  std::optional<int> threads;
};

/// Partition list of a config (components and horizons 1-based there).
/// Throws cli.schema on an unknown type or a malformed entry.
std::vector<PartitionSpec> partitions_from_json(const Json& partitions);

/// Runs `command` on a parsed config. Relative paths inside the config
/// resolve against `base_dir`; artifacts go to `out_dir`. Throws Error.
void run_config(const std::string& command, const Json& config, const std::filesystem::path& base_dir,
                const std::filesystem::path& out_dir);

/// Loads the config, applies the flag overrides and runs. Returns the
/// output directory used.
std::filesystem::path run_command(const CliOptions& options);

/// Full entry point: argument parsing, execution, error.json on failure.
/// Returns the process exit code.
int cli_main(int argc, char** argv);

}  // namespace hfevd

#ifndef ZENO_IO_HPP
#define ZENO_IO_HPP

#include "zeno/experiments.hpp"

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace zeno::io {

/// Malformed or invalid configuration. line is 1-based, 0 when unknown.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line(line) {}
  int line;
};

class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using ParsedConfig = std::variant<ScenarioConfig, SweepSpec>;

/// Parses a YAML (or JSON) scenario description. A top-level `sweep` block
/// makes it a SweepSpec. Missing optional fields take the defaults of
/// ScenarioConfig; unknown keys are rejected.
ParsedConfig parse_config(const std::string& text);
ParsedConfig load_config(const std::filesystem::path& path);

/// Block-style YAML with every field spelled out; parse_config reads it back
/// to an identical config.
std::string emit_config(const ScenarioConfig& config);
std::string emit_config(const SweepSpec& spec);
/// The same content on a single line (flow style), for table headers.
std::string emit_config_line(const ScenarioConfig& config);
std::string emit_config_line(const SweepSpec& spec);

struct ManifestEntry {
  std::string file;
  std::string sha256;
  std::uintmax_t bytes{};
};

struct Manifest {
  std::filesystem::path directory;
  std::vector<ManifestEntry> entries;
};

/// Writes config.yaml, summary.yaml, surviving.csv, com.csv, heatmap.csv,
/// profiles.csv (when a closest encounter exists) and manifest.txt.
Manifest write_outputs(const ScenarioResult& result, const std::filesystem::path& directory);

/// Writes config.yaml, sweep.csv and manifest.txt.
Manifest write_sweep_outputs(const SweepSpec& spec, const SweepTable& table, const std::filesystem::path& directory);

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/// Reads a flat `key: value` summary file back into a map of strings.
std::vector<std::pair<std::string, std::string>> read_summary(const std::filesystem::path& path);

}  // namespace zeno::io

#endif  // ZENO_IO_HPP

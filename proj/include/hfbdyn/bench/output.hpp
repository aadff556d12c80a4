#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "hfbdyn/quasifree.hpp"

namespace hfbdyn::bench {

// Shortest round-trip decimal form (at most 17 significant digits); non-finite values print as nan / inf.
std::string format_double(double x);

using Cell = std::variant<double, long long, std::string>;

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns);

  void add_row(std::vector<Cell> row);
  const std::vector<std::string>& columns() const noexcept { return columns_; }
  std::size_t rows() const noexcept { return rows_.size(); }
  std::string str() const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<Cell>> rows_;
};

// {"rows": L, "cols": L, "omega": [[re, im], ...], "alpha": [[re, im], ...]}, entries row-major.
nlohmann::json state_to_json(const GeneralizedDensityMatrix& g);
GeneralizedDensityMatrix state_from_json(const nlohmann::json& doc);

std::string sha256_hex(const std::string& bytes);
std::string code_version();
// UTC, ISO 8601 with seconds.
std::string utc_timestamp(std::chrono::system_clock::time_point t);

struct FileRecord {
  std::string path;  // relative to the run directory
  std::string sha256;
  std::uintmax_t bytes = 0;
};

// One run's output directory. Refuses a directory that already holds a manifest.
class RunDirectory {
 public:
  explicit RunDirectory(std::filesystem::path root);

  const std::filesystem::path& path() const noexcept { return root_; }
  // Writes (creating parent directories) and records the checksum.
  void write(const std::string& relative, const std::string& content);
  const std::vector<FileRecord>& files() const noexcept { return files_; }
  // Writes config.resolved.json and manifest.json.
  nlohmann::json finish(const nlohmann::json& resolved_config, const std::string& command);

 private:
  std::filesystem::path root_;
  std::chrono::system_clock::time_point start_;
  std::vector<FileRecord> files_;
};

// --out, then the config directory, then $HFBDYN_OUT/<command>-<hash prefix>, then runs/<command>-<hash prefix>.
std::filesystem::path resolve_output_dir(const std::string& cli_out, const std::string& config_dir,
                                         const std::string& command, const std::string& hash);

}  // namespace hfbdyn::bench

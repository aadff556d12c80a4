#include "hfbdyn/bench/output.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

#include "hfbdyn/bench/config.hpp"

#ifndef HFBDYN_VERSION
#define HFBDYN_VERSION "unknown"
#endif

namespace hfbdyn::bench {

namespace fs = std::filesystem;

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

CsvTable::CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

void CsvTable::add_row(std::vector<Cell> row) {
  if (row.size() != columns_.size()) throw DimensionError("CSV row width does not match the header");
  rows_.push_back(std::move(row));
}

std::string CsvTable::str() const {
  std::string out;
  auto line = [&](const auto& cells, auto&& fmt) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out.push_back(',');
      out += fmt(cells[i]);
    }
    out.push_back('\n');
  };
  line(columns_, [](const std::string& s) { return s; });
  for (const auto& r : rows_)
    line(r, [](const Cell& c) {
      if (const auto* d = std::get_if<double>(&c)) return format_double(*d);
      if (const auto* n = std::get_if<long long>(&c)) return std::to_string(*n);
      return std::get<std::string>(c);
    });
  return out;
}

namespace {

nlohmann::json entries(const MatC& m) {
  auto arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) arr.push_back({m(i, j).real(), m(i, j).imag()});
  return arr;
}

MatC read_entries(const nlohmann::json& arr, int rows, int cols, const std::string& name) {
  if (!arr.is_array() || arr.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols))
    throw ConfigError("state JSON: '" + name + "' has the wrong number of entries");
  MatC m(rows, cols);
  std::size_t n = 0;
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j, ++n) {
      const auto& e = arr[n];
      if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
        throw ConfigError("state JSON: '" + name + "' entries must be [re, im] pairs");
      m(i, j) = cxd(e[0].get<double>(), e[1].get<double>());
    }
  return m;
}

}  // namespace

nlohmann::json state_to_json(const GeneralizedDensityMatrix& g) {
  check_dimensions(g);
  return {{"rows", g.size()}, {"cols", g.size()}, {"omega", entries(g.omega)}, {"alpha", entries(g.alpha)}};
}

GeneralizedDensityMatrix state_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("rows") || !doc.contains("cols") || !doc.contains("omega") ||
      !doc.contains("alpha"))
    throw ConfigError("state JSON needs rows, cols, omega and alpha");
  const int r = doc["rows"].get<int>();
  const int c = doc["cols"].get<int>();
  if (r != c || r < 0) throw ConfigError("state JSON: matrices must be square");
  return {read_entries(doc["omega"], r, c, "omega"), read_entries(doc["alpha"], r, c, "alpha")};
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 digest failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return os.str();
}

std::string code_version() { return HFBDYN_VERSION; }

std::string utc_timestamp(std::chrono::system_clock::time_point t) {
  const std::time_t tt = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

RunDirectory::RunDirectory(fs::path root) : root_(std::move(root)), start_(std::chrono::system_clock::now()) {
  if (fs::exists(root_ / "manifest.json"))
    throw ConfigError("output directory '" + root_.string() + "' already holds a run");
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (ec) throw ConfigError("cannot create output directory '" + root_.string() + "': " + ec.message());
}

void RunDirectory::write(const std::string& relative, const std::string& content) {
  const fs::path p = root_ / relative;
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << content;
  out.close();
  if (!out) throw Error("cannot write '" + p.string() + "'");
  files_.push_back({relative, sha256_hex(content), content.size()});
}

nlohmann::json RunDirectory::finish(const nlohmann::json& resolved_config, const std::string& command) {
  write("config.resolved.json", resolved_config.dump(2) + "\n");
  nlohmann::json m;
  m["command"] = command;
  m["config_hash"] = sha256_hex(canonical_dump(resolved_config));
  m["code_version"] = code_version();
  m["start_time"] = utc_timestamp(start_);
  m["end_time"] = utc_timestamp(std::chrono::system_clock::now());
  auto inv = nlohmann::json::array();
  for (const auto& f : files_) inv.push_back({{"path", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}});
  m["files"] = std::move(inv);
  std::ofstream out(root_ / "manifest.json", std::ios::binary);
  out << m.dump(2) << "\n";
  if (!out) throw Error("cannot write the manifest");
  return m;
}

fs::path resolve_output_dir(const std::string& cli_out, const std::string& config_dir, const std::string& command,
                            const std::string& hash) {
  if (!cli_out.empty()) return cli_out;
  if (!config_dir.empty()) return config_dir;
  const char* env = std::getenv("HFBDYN_OUT");
  const fs::path root = env && *env ? fs::path(env) : fs::path("runs");
  return root / (command + "-" + hash.substr(0, 12));
}

}  // namespace hfbdyn::bench

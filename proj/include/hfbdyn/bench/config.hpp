#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "hfbdyn/fock.hpp"
#include "hfbdyn/hfb.hpp"
#include "hfbdyn/lattice.hpp"

namespace hfbdyn::bench {

using Json = nlohmann::json;

constexpr int kSchemaVersion = 1;

// Config error tied to a location in the document.
class SchemaError : public ConfigError {
 public:
  SchemaError(std::string pointer, const std::string& what)
      : ConfigError("schema error at " + (pointer.empty() ? std::string("/") : pointer) + ": " + what),
        pointer_(std::move(pointer)) {}
  const std::string& pointer() const noexcept { return pointer_; }

 private:
  std::string pointer_;
};

enum class InitialKind { ffg, fermi_sea, lambda_state, random_pure };

InitialKind parse_initial_kind(const std::string& name);
std::string to_string(InitialKind kind);

struct InitialStateBlock {
  InitialKind kind = InitialKind::ffg;
  std::vector<double> profile;  // lambda-state; empty means smooth step of the given width
  double width = 1.0;
  std::uint64_t seed = 1;
};

struct DynamicsBlock {
  Variant variant = Variant::hfb;
  Integrator integrator = Integrator::midpoint;
  double T = 1.0;
  double dt = 0.0;  // <= 0: eps / 20
  int snapshot_stride = 1;
};

struct OracleBlock {
  bool enabled = false;
  int l_guard = kFockGuard;
  std::vector<int> n_values;  // empty: single run at the lattice counts
  std::vector<std::string> signatures{"ca", "ccaa"};
};

struct AppendixBlock {
  int trials = 1000;
  std::uint64_t seed = 1;
  std::vector<int> n_grid{2, 6, 10, 14, 18};
  double width = 1.0;
  int margin = 2;
};

struct OutputsBlock {
  std::string directory;  // empty: --out, then HFBDYN_OUT, then "runs"
  std::vector<std::string> formats{"csv"};  // csv, snapshots

  bool wants(const std::string& format) const;
};

struct ExperimentConfig {
  LatticeSpec lattice;
  PotentialKind potential = PotentialKind::gaussian;
  PotentialParams potential_params;
  InitialStateBlock initial;
  DynamicsBlock dynamics;
  OracleBlock oracle;
  AppendixBlock appendix;
  OutputsBlock outputs;
  Json resolved;  // defaults filled in, overrides applied

  Lattice make_lattice() const { return Lattice(lattice); }
  PotentialSpec make_potential(const Lattice& lat) const;
};

// Schema tree; each leaf is [type] (required) or [type, default].
const Json& config_schema();
// Every optional key with its default.
Json config_defaults();
// JSON pointers that must be present in user input.
const std::vector<std::string>& required_keys();

// "a.b.c=value"; value is parsed as JSON and falls back to a plain string.
void apply_override(Json& doc, const std::string& assignment);

// Validates against the schema (unknown and missing keys reported by JSON pointer), fills defaults and
// decodes the blocks. Throws ConfigError.
ExperimentConfig parse_config(const Json& doc);
ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {},
                             std::optional<std::uint64_t> seed = std::nullopt);
// Parses text, applies overrides and the seed, then parse_config.
ExperimentConfig config_from_text(const std::string& text, const std::vector<std::string>& overrides = {},
                                  std::optional<std::uint64_t> seed = std::nullopt);

// Canonical compact dump (sorted keys) and its SHA-256.
std::string canonical_dump(const Json& doc);
std::string config_hash(const ExperimentConfig& config);

// Particle counts for a total N split over the spins, larger counts first.
std::vector<int> split_particles(int total, int spins);

}  // namespace hfbdyn::bench

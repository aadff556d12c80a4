#include "hfbdyn/bench/config.hpp"

#include <fstream>
#include <sstream>

#include "hfbdyn/bench/output.hpp"
#include "hfbdyn/diagnostics.hpp"

namespace hfbdyn::bench {

InitialKind parse_initial_kind(const std::string& name) {
  if (name == "ffg") return InitialKind::ffg;
  if (name == "fermi-sea") return InitialKind::fermi_sea;
  if (name == "lambda-state") return InitialKind::lambda_state;
  if (name == "random-pure") return InitialKind::random_pure;
  throw ConfigError("unknown initial state kind '" + name + "' (expected ffg, fermi-sea, lambda-state or random-pure)");
}

std::string to_string(InitialKind kind) {
  switch (kind) {
    case InitialKind::ffg: return "ffg";
    case InitialKind::fermi_sea: return "fermi-sea";
    case InitialKind::lambda_state: return "lambda-state";
    case InitialKind::random_pure: return "random-pure";
  }
  return "ffg";
}

bool OutputsBlock::wants(const std::string& format) const {
  for (const auto& f : formats)
    if (f == format) return true;
  return false;
}

PotentialSpec ExperimentConfig::make_potential(const Lattice& lat) const {
  return named_potential(potential, potential_params, lat);
}

const Json& config_schema() {
  static const Json schema = Json::parse(R"({
    "schema_version": ["int"],
    "lattice": {
      "dimension": ["int"],
      "cutoff": ["int"],
      "spin_count": ["int", 2],
      "particle_counts": ["int[]"],
      "epsilon": ["number?", null]
    },
    "potential": {
      "kind": ["string", "gaussian"],
      "strength": ["number", 1.0],
      "width": ["number", 1.0]
    },
    "initial_state": {
      "kind": ["string", "ffg"],
      "profile": ["number[]", []],
      "width": ["number", 1.0],
      "seed": ["uint", 1]
    },
    "dynamics": {
      "variant": ["string", "HFB"],
      "T": ["number", 1.0],
      "dt": ["number?", null],
      "snapshot_stride": ["int", 1],
      "integrator": ["string", "midpoint"]
    },
    "oracle": {
      "enabled": ["bool", false],
      "l_guard": ["int", 16],
      "n_values": ["int[]", []],
      "signatures": ["string[]", ["ca", "ccaa"]]
    },
    "appendix_a": {
      "trials": ["int", 1000],
      "seed": ["uint", 1],
      "n_grid": ["int[]", [2, 6, 10, 14, 18]],
      "width": ["number", 1.0],
      "margin": ["int", 2]
    },
    "outputs": {
      "directory": ["string", ""],
      "formats": ["string[]", ["csv"]]
    }
  })");
  return schema;
}

namespace {

bool is_leaf(const Json& node) { return node.is_array(); }

void collect_defaults(const Json& schema, Json& out) {
  for (auto it = schema.begin(); it != schema.end(); ++it) {
    if (is_leaf(*it)) {
      if (it->size() > 1) out[it.key()] = (*it)[1];
    } else {
      Json sub = Json::object();
      collect_defaults(*it, sub);
      out[it.key()] = std::move(sub);
    }
  }
}

void collect_required(const Json& schema, const std::string& prefix, std::vector<std::string>& out) {
  for (auto it = schema.begin(); it != schema.end(); ++it) {
    const std::string ptr = prefix + "/" + it.key();
    if (is_leaf(*it)) {
      if (it->size() == 1) out.push_back(ptr);
    } else {
      collect_required(*it, ptr, out);
    }
  }
}

bool matches(const std::string& type, const Json& v) {
  auto each = [&](auto pred) {
    if (!v.is_array()) return false;
    for (const auto& e : v)
      if (!pred(e)) return false;
    return true;
  };
  auto is_int = [](const Json& e) { return e.is_number_integer(); };
  auto is_num = [](const Json& e) { return e.is_number(); };
  auto is_str = [](const Json& e) { return e.is_string(); };
  if (type == "int") return is_int(v);
  if (type == "uint") return v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0);
  if (type == "number") return is_num(v);
  if (type == "number?") return v.is_null() || is_num(v);
  if (type == "string") return is_str(v);
  if (type == "bool") return v.is_boolean();
  if (type == "int[]") return each(is_int);
  if (type == "number[]") return each(is_num);
  if (type == "string[]") return each(is_str);
  return false;
}

std::string describe(const std::string& type) {
  if (type == "int") return "an integer";
  if (type == "uint") return "a non-negative integer";
  if (type == "number") return "a number";
  if (type == "number?") return "a number or null";
  if (type == "string") return "a string";
  if (type == "bool") return "a boolean";
  if (type == "int[]") return "an array of integers";
  if (type == "number[]") return "an array of numbers";
  return "an array of strings";
}

std::string escape_token(const std::string& key) {
  std::string out;
  for (char c : key) {
    if (c == '~') out += "~0";
    else if (c == '/') out += "~1";
    else out.push_back(c);
  }
  return out;
}

void validate(const Json& doc, const Json& schema, const std::string& prefix) {
  if (!doc.is_object()) throw SchemaError(prefix, "expected an object");
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    const std::string ptr = prefix + "/" + escape_token(it.key());
    if (!schema.contains(it.key())) throw SchemaError(ptr, "unknown key");
    const Json& node = schema.at(it.key());
    if (is_leaf(node)) {
      const std::string type = node[0].get<std::string>();
      if (!matches(type, *it)) throw SchemaError(ptr, "expected " + describe(type));
    } else {
      validate(*it, node, ptr);
    }
  }
}

template <class F>
auto decode(const std::string& ptr, F&& f) {
  try {
    return f();
  } catch (const SchemaError&) {
    throw;
  } catch (const Error& e) {
    throw SchemaError(ptr, e.what());
  }
}

}  // namespace

Json config_defaults() {
  Json out = Json::object();
  collect_defaults(config_schema(), out);
  return out;
}

const std::vector<std::string>& required_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> out;
    collect_required(config_schema(), "", out);
    return out;
  }();
  return keys;
}

void apply_override(Json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  std::string ptr;
  std::stringstream ss(key);
  for (std::string part; std::getline(ss, part, '.');) {
    if (part.empty()) throw ConfigError("override key '" + key + "' has an empty component");
    ptr += "/" + escape_token(part);
  }
  Json value = Json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  doc[Json::json_pointer(ptr)] = std::move(value);
}

ExperimentConfig parse_config(const Json& doc) {
  const Json& schema = config_schema();
  validate(doc, schema, "");
  for (const auto& ptr : required_keys())
    if (!doc.contains(Json::json_pointer(ptr))) throw SchemaError(ptr, "missing required key");
  if (doc.at("schema_version").get<int>() != kSchemaVersion)
    throw SchemaError("/schema_version", "unsupported version (expected " + std::to_string(kSchemaVersion) + ")");

  Json r = config_defaults();
  r.merge_patch(doc);
  // merge_patch deletes keys set to null; restore nullable defaults.
  if (!r["lattice"].contains("epsilon")) r["lattice"]["epsilon"] = nullptr;
  if (!r["dynamics"].contains("dt")) r["dynamics"]["dt"] = nullptr;

  ExperimentConfig c;
  c.resolved = r;
  const Json& L = r["lattice"];
  c.lattice.dimension = L["dimension"].get<int>();
  c.lattice.cutoff = L["cutoff"].get<int>();
  c.lattice.spin_count = L["spin_count"].get<int>();
  c.lattice.particle_counts = L["particle_counts"].get<std::vector<int>>();
  if (!L["epsilon"].is_null()) c.lattice.epsilon = L["epsilon"].get<double>();
  decode("/lattice", [&] { return Lattice(c.lattice).size(); });

  const Json& P = r["potential"];
  c.potential = decode("/potential/kind", [&] { return parse_potential_kind(P["kind"].get<std::string>()); });
  c.potential_params = {P["strength"].get<double>(), P["width"].get<double>()};
  if (!(c.potential_params.width > 0.0)) throw SchemaError("/potential/width", "must be positive");

  const Json& I = r["initial_state"];
  c.initial.kind = decode("/initial_state/kind", [&] { return parse_initial_kind(I["kind"].get<std::string>()); });
  c.initial.profile = I["profile"].get<std::vector<double>>();
  c.initial.width = I["width"].get<double>();
  c.initial.seed = I["seed"].get<std::uint64_t>();

  const Json& D = r["dynamics"];
  c.dynamics.variant = decode("/dynamics/variant", [&] { return parse_variant(D["variant"].get<std::string>()); });
  c.dynamics.integrator =
      decode("/dynamics/integrator", [&] { return parse_integrator(D["integrator"].get<std::string>()); });
  c.dynamics.T = D["T"].get<double>();
  if (!(c.dynamics.T >= 0.0)) throw SchemaError("/dynamics/T", "must be non-negative");
  c.dynamics.dt = D["dt"].is_null() ? 0.0 : D["dt"].get<double>();
  c.dynamics.snapshot_stride = D["snapshot_stride"].get<int>();
  if (c.dynamics.snapshot_stride < 1) throw SchemaError("/dynamics/snapshot_stride", "must be positive");

  const Json& O = r["oracle"];
  c.oracle.enabled = O["enabled"].get<bool>();
  c.oracle.l_guard = O["l_guard"].get<int>();
  if (c.oracle.l_guard < 1 || c.oracle.l_guard > kSectorGuard)
    throw SchemaError("/oracle/l_guard", "must lie in 1.." + std::to_string(kSectorGuard));
  c.oracle.n_values = O["n_values"].get<std::vector<int>>();
  for (int n : c.oracle.n_values)
    if (n < 1) throw SchemaError("/oracle/n_values", "particle numbers must be positive");
  c.oracle.signatures = O["signatures"].get<std::vector<std::string>>();
  for (const auto& s : c.oracle.signatures) decode("/oracle/signatures", [&] { return parse_signature(s); });

  const Json& A = r["appendix_a"];
  c.appendix.trials = A["trials"].get<int>();
  if (c.appendix.trials < 1) throw SchemaError("/appendix_a/trials", "must be positive");
  c.appendix.seed = A["seed"].get<std::uint64_t>();
  c.appendix.n_grid = A["n_grid"].get<std::vector<int>>();
  c.appendix.width = A["width"].get<double>();
  c.appendix.margin = A["margin"].get<int>();
  if (c.appendix.margin < 0) throw SchemaError("/appendix_a/margin", "must be non-negative");

  const Json& U = r["outputs"];
  c.outputs.directory = U["directory"].get<std::string>();
  c.outputs.formats = U["formats"].get<std::vector<std::string>>();
  for (const auto& f : c.outputs.formats)
    if (f != "csv" && f != "snapshots") throw SchemaError("/outputs/formats", "unknown format '" + f + "'");
  return c;
}

ExperimentConfig config_from_text(const std::string& text, const std::vector<std::string>& overrides,
                                  std::optional<std::uint64_t> seed) {
  Json doc = Json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw ConfigError("config is not valid JSON");
  for (const auto& o : overrides) apply_override(doc, o);
  if (seed) {
    doc["initial_state"]["seed"] = *seed;
    doc["appendix_a"]["seed"] = *seed;
  }
  return parse_config(doc);
}

ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides,
                             std::optional<std::uint64_t> seed) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_text(ss.str(), overrides, seed);
}

std::string canonical_dump(const Json& doc) { return doc.dump(); }

std::string config_hash(const ExperimentConfig& config) { return sha256_hex(canonical_dump(config.resolved)); }

std::vector<int> split_particles(int total, int spins) {
  if (spins < 1 || total < 0) throw ConfigError("cannot split particles over spins");
  std::vector<int> out(static_cast<std::size_t>(spins), total / spins);
  for (int s = 0; s < total % spins; ++s) ++out[static_cast<std::size_t>(s)];
  return out;
}

}  // namespace hfbdyn::bench

#pragma once

// Experiment runner: JSON configuration, seeded parameter scans over the
// chain length, delta or switch position, figure-reproduction pipelines and
// CSV result tables with a '#'-comment provenance header.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <exception>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "fci/bounds.hpp"
#include "fci/errors.hpp"
#include "fci/hamiltonian.hpp"
#include "fci/indices.hpp"
#include "fci/lattice.hpp"
#include "fci/spectral.hpp"

namespace fci {

inline constexpr const char* kVersion = "0.1.0";

/// Upper bound on the bulk-edge correspondence residual accepted in any result row.
inline constexpr double kResidualTolerance = 1e-10;

enum class ScanAxis { None, Length, Delta, Switch };

struct DisorderSpec {
  double amplitude = 0.0;
  std::optional<std::uint64_t> seed;
};

struct DefectSpec {
  double height = 0.0;
  double center_frac = 0.5;
  double width = 1.0;
};

struct ExtraSpec {
  int range = 2;
  std::vector<double> ab;  // one value = homogeneous
  std::vector<double> ba;
};

struct ModelSpec {
  std::vector<double> t1{0.5};  // one value = homogeneous
  std::vector<double> t2{1.0};
  std::optional<DisorderSpec> disorder;
  std::optional<DefectSpec> defect;
  std::vector<ExtraSpec> extra;
  std::vector<BoundaryTerm> boundary;
};

struct DeltaSpec {
  DeltaMode mode = DeltaMode::Empirical;
  std::vector<double> values;  // Manual
  double d = 1.0;              // decay length used for K_d and the theorem policy
  int ring_factor = 4;         // bulk gap ring = ring_factor * L
};

struct ExperimentConfig {
  ModelSpec model;
  std::vector<int> lengths{30};
  Convention convention = Convention::CellC2;
  DeltaSpec delta;
  std::vector<std::optional<int>> switches{std::nullopt};  // nullopt = middle
  std::optional<std::uint64_t> seed;
  ScanAxis scan = ScanAxis::None;
  std::string output;

  /// Seed of the disorder realization: top-level seed, else disorder.seed.
  std::optional<std::uint64_t> effective_seed() const {
    if (seed) return seed;
    if (model.disorder) return model.disorder->seed;
    return std::nullopt;
  }
};

// ---------------------------------------------------------------------------
// Config parsing and serialization
// ---------------------------------------------------------------------------

namespace detail {

using nlohmann::json;

inline void reject_unknown(const json& j, const std::string& path, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
  for (const auto& [k, _] : j.items()) {
    bool known = false;
    for (const char* key : keys) known = known || k == key;
    if (!known) throw ConfigError(path.empty() ? k : path + "." + k, "unknown key");
  }
}

inline double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(path, "must be finite");
  return v;
}

inline int as_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ConfigError(path, "expected an integer");
  return j.get<int>();
}

inline std::uint64_t as_seed(const json& j, const std::string& path) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0)) {
    throw ConfigError(path, "expected a non-negative integer seed");
  }
  return j.get<std::uint64_t>();
}

inline std::vector<double> number_or_list(const json& j, const std::string& path) {
  std::vector<double> out;
  if (j.is_array()) {
    if (j.empty()) throw ConfigError(path, "list must not be empty");
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_number(j[i], path + "[" + std::to_string(i) + "]"));
  } else {
    out.push_back(as_number(j, path));
  }
  return out;
}

inline json scalar_or_list(const std::vector<double>& v) { return v.size() == 1 ? json(v[0]) : json(v); }

inline std::optional<int> parse_switch_entry(const json& j, const std::string& path) {
  if (j.is_string()) {
    if (j.get<std::string>() != "middle") throw ConfigError(path, "expected an integer or \"middle\"");
    return std::nullopt;
  }
  return as_int(j, path);
}

inline json switch_entry(const std::optional<int>& s) { return s ? json(*s) : json("middle"); }

}  // namespace detail

inline std::string to_string(ScanAxis a) {
  switch (a) {
    case ScanAxis::None: return "none";
    case ScanAxis::Length: return "length";
    case ScanAxis::Delta: return "delta";
    case ScanAxis::Switch: return "switch";
  }
  return "none";
}

inline std::string to_string(DeltaMode m) {
  switch (m) {
    case DeltaMode::Theorem: return "theorem";
    case DeltaMode::Empirical: return "empirical";
    case DeltaMode::Manual: return "manual";
  }
  return "empirical";
}

/// Parses and validates a configuration; errors carry the JSON field path.
inline ExperimentConfig parse_config(const nlohmann::json& j) {
  using detail::as_int;
  using detail::as_number;
  detail::reject_unknown(j, "", {"model", "geometry", "delta", "switch", "seed", "scan", "output"});
  ExperimentConfig c;

  if (j.contains("model")) {
    const auto& m = j["model"];
    detail::reject_unknown(m, "model", {"t1", "t2", "disorder", "defect", "extra", "boundary_potential"});
    if (m.contains("t1")) c.model.t1 = detail::number_or_list(m["t1"], "model.t1");
    if (m.contains("t2")) c.model.t2 = detail::number_or_list(m["t2"], "model.t2");
    if (m.contains("disorder")) {
      const auto& d = m["disorder"];
      detail::reject_unknown(d, "model.disorder", {"amplitude", "seed"});
      DisorderSpec spec;
      if (d.contains("amplitude")) spec.amplitude = as_number(d["amplitude"], "model.disorder.amplitude");
      if (spec.amplitude < 0.0) throw ConfigError("model.disorder.amplitude", "must be >= 0");
      if (d.contains("seed")) spec.seed = detail::as_seed(d["seed"], "model.disorder.seed");
      c.model.disorder = spec;
    }
    if (m.contains("defect")) {
      const auto& d = m["defect"];
      detail::reject_unknown(d, "model.defect", {"height", "center_frac", "width"});
      DefectSpec spec;
      if (d.contains("height")) spec.height = as_number(d["height"], "model.defect.height");
      if (d.contains("center_frac")) spec.center_frac = as_number(d["center_frac"], "model.defect.center_frac");
      if (d.contains("width")) spec.width = as_number(d["width"], "model.defect.width");
      if (!(spec.width > 0.0)) throw ConfigError("model.defect.width", "must be > 0");
      c.model.defect = spec;
    }
    if (m.contains("extra")) {
      if (!m["extra"].is_array()) throw ConfigError("model.extra", "expected a list");
      for (std::size_t i = 0; i < m["extra"].size(); ++i) {
        const std::string path = "model.extra[" + std::to_string(i) + "]";
        const auto& e = m["extra"][i];
        detail::reject_unknown(e, path, {"range", "ab", "ba"});
        ExtraSpec spec;
        if (e.contains("range")) spec.range = as_int(e["range"], path + ".range");
        if (spec.range < 1) throw ConfigError(path + ".range", "must be >= 1");
        spec.ab = e.contains("ab") ? detail::number_or_list(e["ab"], path + ".ab") : std::vector<double>{0.0};
        spec.ba = e.contains("ba") ? detail::number_or_list(e["ba"], path + ".ba") : std::vector<double>{0.0};
        c.model.extra.push_back(spec);
      }
    }
    if (m.contains("boundary_potential")) {
      if (!m["boundary_potential"].is_array()) throw ConfigError("model.boundary_potential", "expected a list");
      for (std::size_t i = 0; i < m["boundary_potential"].size(); ++i) {
        const std::string path = "model.boundary_potential[" + std::to_string(i) + "]";
        const auto& e = m["boundary_potential"][i];
        detail::reject_unknown(e, path, {"a", "b", "value"});
        if (!e.contains("a") || !e.contains("b") || !e.contains("value")) {
          throw ConfigError(path, "needs keys a, b and value");
        }
        c.model.boundary.push_back({as_int(e["a"], path + ".a"), as_int(e["b"], path + ".b"),
                                    as_number(e["value"], path + ".value")});
      }
    }
  }

  if (j.contains("geometry")) {
    const auto& g = j["geometry"];
    detail::reject_unknown(g, "geometry", {"L", "convention"});
    if (g.contains("L")) {
      c.lengths.clear();
      if (g["L"].is_array()) {
        if (g["L"].empty()) throw ConfigError("geometry.L", "list must not be empty");
        for (std::size_t i = 0; i < g["L"].size(); ++i) {
          c.lengths.push_back(as_int(g["L"][i], "geometry.L[" + std::to_string(i) + "]"));
        }
      } else {
        c.lengths.push_back(as_int(g["L"], "geometry.L"));
      }
      for (int l : c.lengths) {
        if (l < 2) throw ConfigError("geometry.L", "chain length must be >= 2");
      }
    }
    if (g.contains("convention")) {
      const auto& v = g["convention"];
      if (v == "cell") {
        c.convention = Convention::CellC2;
      } else if (v == "alternating") {
        c.convention = Convention::AlternatingSites;
      } else {
        throw ConfigError("geometry.convention", "expected \"cell\" or \"alternating\"");
      }
    }
  }

  if (j.contains("delta")) {
    const auto& d = j["delta"];
    detail::reject_unknown(d, "delta", {"mode", "value", "d", "ring_factor"});
    if (d.contains("mode")) {
      const auto& v = d["mode"];
      if (v == "theorem") {
        c.delta.mode = DeltaMode::Theorem;
      } else if (v == "empirical") {
        c.delta.mode = DeltaMode::Empirical;
      } else if (v == "manual") {
        c.delta.mode = DeltaMode::Manual;
      } else {
        throw ConfigError("delta.mode", "expected \"theorem\", \"empirical\" or \"manual\"");
      }
    }
    if (d.contains("value")) c.delta.values = detail::number_or_list(d["value"], "delta.value");
    for (double v : c.delta.values) {
      if (!(v > 0.0)) throw ConfigError("delta.value", "delta must be > 0");
    }
    if (c.delta.mode == DeltaMode::Manual && c.delta.values.empty()) {
      throw ConfigError("delta.value", "manual mode needs a value");
    }
    if (c.delta.mode != DeltaMode::Manual && !c.delta.values.empty()) {
      throw ConfigError("delta.value", "only allowed in manual mode");
    }
    if (d.contains("d")) c.delta.d = as_number(d["d"], "delta.d");
    if (!(c.delta.d > 0.0)) throw ConfigError("delta.d", "must be > 0");
    if (d.contains("ring_factor")) c.delta.ring_factor = as_int(d["ring_factor"], "delta.ring_factor");
    if (c.delta.ring_factor < 1) throw ConfigError("delta.ring_factor", "must be >= 1");
  }

  if (j.contains("switch")) {
    c.switches.clear();
    const auto& s = j["switch"];
    if (s.is_array()) {
      if (s.empty()) throw ConfigError("switch", "list must not be empty");
      for (std::size_t i = 0; i < s.size(); ++i) {
        c.switches.push_back(detail::parse_switch_entry(s[i], "switch[" + std::to_string(i) + "]"));
      }
    } else {
      c.switches.push_back(detail::parse_switch_entry(s, "switch"));
    }
  }

  if (j.contains("seed")) c.seed = detail::as_seed(j["seed"], "seed");

  if (j.contains("scan")) {
    const auto& v = j["scan"];
    if (v == "none") {
      c.scan = ScanAxis::None;
    } else if (v == "length") {
      c.scan = ScanAxis::Length;
    } else if (v == "delta") {
      c.scan = ScanAxis::Delta;
    } else if (v == "switch") {
      c.scan = ScanAxis::Switch;
    } else {
      throw ConfigError("scan", "expected \"none\", \"length\", \"delta\" or \"switch\"");
    }
  }
  if (j.contains("output")) {
    if (!j["output"].is_string()) throw ConfigError("output", "expected a string");
    c.output = j["output"].get<std::string>();
  }

  // Exactly one axis may carry a list.
  if (c.lengths.size() > 1 && c.scan != ScanAxis::Length) throw ConfigError("geometry.L", "list requires scan \"length\"");
  if (c.delta.values.size() > 1 && c.scan != ScanAxis::Delta) throw ConfigError("delta.value", "list requires scan \"delta\"");
  if (c.switches.size() > 1 && c.scan != ScanAxis::Switch) throw ConfigError("switch", "list requires scan \"switch\"");
  if (c.scan == ScanAxis::Delta && c.delta.mode != DeltaMode::Manual) {
    throw ConfigError("delta.mode", "scan \"delta\" requires manual mode");
  }
  if (c.model.disorder && c.model.disorder->amplitude > 0.0 && !c.effective_seed()) {
    throw ConfigError("seed", "required when model.disorder.amplitude > 0");
  }
  return c;
}

inline ExperimentConfig parse_config(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(j);
}

inline ExperimentConfig parse_config(const char* text) { return parse_config(std::string(text)); }

/// Reads a config file; `seed` replaces the top-level seed before validation.
inline ExperimentConfig load_config(const std::string& path, std::optional<std::uint64_t> seed = std::nullopt) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("", std::string("invalid JSON: ") + e.what());
  }
  if (seed) {
    if (!j.is_object()) throw ConfigError("", "expected an object");
    j["seed"] = *seed;
  }
  return parse_config(j);
}

/// Canonical JSON form; parse_config(to_json(c)) reproduces c.
inline nlohmann::json to_json(const ExperimentConfig& c) {
  using nlohmann::json;
  json model;
  model["t1"] = detail::scalar_or_list(c.model.t1);
  model["t2"] = detail::scalar_or_list(c.model.t2);
  if (c.model.disorder) {
    json d;
    d["amplitude"] = c.model.disorder->amplitude;
    if (c.model.disorder->seed) d["seed"] = *c.model.disorder->seed;
    model["disorder"] = d;
  }
  if (c.model.defect) {
    model["defect"] = {{"height", c.model.defect->height},
                       {"center_frac", c.model.defect->center_frac},
                       {"width", c.model.defect->width}};
  }
  if (!c.model.extra.empty()) {
    json list = json::array();
    for (const auto& e : c.model.extra) {
      list.push_back({{"range", e.range}, {"ab", detail::scalar_or_list(e.ab)}, {"ba", detail::scalar_or_list(e.ba)}});
    }
    model["extra"] = list;
  }
  if (!c.model.boundary.empty()) {
    json list = json::array();
    for (const auto& b : c.model.boundary) list.push_back({{"a", b.a}, {"b", b.b}, {"value", b.value.real()}});
    model["boundary_potential"] = list;
  }
  json out;
  out["model"] = model;
  out["geometry"] = {{"L", c.lengths.size() == 1 ? json(c.lengths[0]) : json(c.lengths)},
                     {"convention", to_string(c.convention)}};
  json delta = {{"mode", to_string(c.delta.mode)}, {"d", c.delta.d}, {"ring_factor", c.delta.ring_factor}};
  if (!c.delta.values.empty()) delta["value"] = detail::scalar_or_list(c.delta.values);
  out["delta"] = delta;
  if (c.switches.size() == 1) {
    out["switch"] = detail::switch_entry(c.switches[0]);
  } else {
    json list = json::array();
    for (const auto& s : c.switches) list.push_back(detail::switch_entry(s));
    out["switch"] = list;
  }
  if (c.seed) out["seed"] = *c.seed;
  out["scan"] = to_string(c.scan);
  if (!c.output.empty()) out["output"] = c.output;
  return out;
}

// ---------------------------------------------------------------------------
// Model construction
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<double> expand(const std::vector<double>& v, int n, const char* name) {
  if (v.size() == 1) return std::vector<double>(n, v[0]);
  if (static_cast<int>(v.size()) < n) {
    throw ConfigError(std::string("model.") + name,
                      "list has " + std::to_string(v.size()) + " entries, chain needs " + std::to_string(n));
  }
  return {v.begin(), v.begin() + n};
}

}  // namespace detail

/// Coupling profile of the configured model on `geom`, with the disorder
/// realization selected by `seed`.
inline CouplingProfile build_profile(const ModelSpec& m, const ChainGeometry& geom,
                                     std::optional<std::uint64_t> seed) {
  const int cells = geom.profile_cells();
  CouplingProfile p;
  p.t1 = detail::expand(m.t1, cells, "t1");
  p.t2 = detail::expand(m.t2, cells, "t2");
  for (const auto& e : m.extra) {
    const int n = std::max(0, cells - e.range);
    ExtraHopping k{e.range, {}, {}};
    for (double v : detail::expand(e.ab, n, "extra.ab")) k.ab.emplace_back(v);
    for (double v : detail::expand(e.ba, n, "extra.ba")) k.ba.emplace_back(v);
    p.extra.push_back(std::move(k));
  }
  p.boundary = m.boundary;
  if (m.disorder && m.disorder->amplitude > 0.0) {
    if (!seed) throw ConfigError("seed", "required when model.disorder.amplitude > 0");
    p = apply_disorder(std::move(p), *seed, m.disorder->amplitude);
  }
  if (m.defect) p = apply_defect(std::move(p), m.defect->height, m.defect->center_frac, m.defect->width);
  return p;
}

/// The disordered SSH chain with a Gaussian defect used by the figure pipelines:
/// t1 = 1/2 + U[-0.1, 0.1] + 0.2 exp(-(4(x - L/2)/L)^2), t2 = 1 + U[-0.1, 0.1].
inline ModelSpec defect_chain_model() {
  ModelSpec m;
  m.t1 = {0.5};
  m.t2 = {1.0};
  m.disorder = DisorderSpec{0.1, std::nullopt};
  m.defect = DefectSpec{0.2, 0.5, 1.0};
  return m;
}

// ---------------------------------------------------------------------------
// Result tables
// ---------------------------------------------------------------------------

/// Round-trippable decimal form of a double (shortest of %.17g).
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

struct ResultTable {
  std::vector<std::string> provenance;  // emitted as "# " lines
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row) {
    if (row.size() != columns.size()) {
      throw NumericalFailure("row has " + std::to_string(row.size()) + " cells, table has " +
                             std::to_string(columns.size()) + " columns");
    }
    rows.push_back(std::move(row));
  }

  int column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (columns[i] == name) return static_cast<int>(i);
    }
    return -1;
  }

  std::vector<double> numeric_column(const std::string& name) const {
    const int c = column(name);
    if (c < 0) throw ConfigError(name, "no such column");
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(std::strtod(r[c].c_str(), nullptr));
    return out;
  }

  std::string to_csv() const {
    std::string out;
    for (const auto& p : provenance) out += "# " + p + "\n";
    for (std::size_t i = 0; i < columns.size(); ++i) out += (i ? "," : "") + columns[i];
    out += "\n";
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + r[i];
      out += "\n";
    }
    return out;
  }
};

inline const std::vector<std::string>& index_columns() {
  static const std::vector<std::string> cols{"L",      "seed",  "delta",    "ell",         "I_bulk",
                                             "I_edge", "imbalance", "residual", "nearest_int", "q_error"};
  return cols;
}

inline const std::vector<std::string>& bound_columns() {
  static const std::vector<std::string> cols{"bound_name", "L", "delta", "margin", "gamma_star", "pass"};
  return cols;
}

inline const std::vector<std::string>& density_columns() {
  static const std::vector<std::string> cols{"cell", "value", "kind"};
  return cols;
}

inline std::vector<std::string> index_row(int length, std::optional<std::uint64_t> seed, const IndexReport& r) {
  return {std::to_string(length),
          seed ? std::to_string(*seed) : "NA",
          format_number(r.delta),
          std::to_string(r.ell),
          format_number(r.i_bulk),
          format_number(r.i_edge),
          std::to_string(r.imbalance),
          format_number(r.correspondence_residual),
          r.classified ? std::to_string(r.nearest_integer) : "unclassified",
          format_number(r.quantization_error)};
}

inline std::vector<std::string> bound_row(const BoundCertificate& c, int length, double delta) {
  return {c.name, std::to_string(length), format_number(delta), format_number(c.margin),
          format_number(c.gamma_star), c.pass ? "true" : "false"};
}

/// FNV-1a 64-bit digest, rendered as 16 hex digits.
inline std::string fnv1a_hex(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct RunOptions {
  int threads = 1;
  bool reproducible = false;
};

inline std::vector<std::string> provenance_block(const ExperimentConfig& c, const std::string& what,
                                                 const RunOptions& opts) {
  std::vector<std::string> p;
  p.push_back(std::string("fci ") + kVersion + " " + what);
  p.push_back("config_hash fnv1a64:" + fnv1a_hex(to_json(c).dump()));
  const auto seed = c.effective_seed();
  p.push_back("seed " + (seed ? std::to_string(*seed) : std::string("NA")));
  if (!opts.reproducible) {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    p.push_back(std::string("generated ") + buf);
  }
  return p;
}

// ---------------------------------------------------------------------------
// Scans
// ---------------------------------------------------------------------------

struct ScanPoint {
  int length;
  std::optional<double> delta;  // manual value, if any
  std::optional<int> ell;
};

/// Scan points in ascending scan-axis order.
inline std::vector<ScanPoint> scan_points(const ExperimentConfig& c) {
  std::vector<ScanPoint> pts;
  const std::optional<double> manual =
      c.delta.mode == DeltaMode::Manual ? std::optional<double>(c.delta.values.front()) : std::nullopt;
  switch (c.scan) {
    case ScanAxis::None:
      pts.push_back({c.lengths.front(), manual, c.switches.front()});
      break;
    case ScanAxis::Length: {
      std::vector<int> ls = c.lengths;
      std::sort(ls.begin(), ls.end());
      for (int l : ls) pts.push_back({l, manual, c.switches.front()});
      break;
    }
    case ScanAxis::Delta: {
      std::vector<double> ds = c.delta.values;
      std::sort(ds.begin(), ds.end());
      for (double d : ds) pts.push_back({c.lengths.front(), d, c.switches.front()});
      break;
    }
    case ScanAxis::Switch: {
      std::vector<int> ells;
      for (const auto& s : c.switches) ells.push_back(s.value_or(c.lengths.front() / 2));
      std::sort(ells.begin(), ells.end());
      for (int e : ells) pts.push_back({c.lengths.front(), manual, e});
      break;
    }
  }
  return pts;
}

/// Everything needed to evaluate one scan point.
struct PointModel {
  ChainGeometry geometry;
  CouplingProfile profile;
  ChiralHamiltonian hamiltonian;
};

inline PointModel point_model(const ExperimentConfig& c, int length) {
  const ChainGeometry geom(length, c.convention);
  CouplingProfile profile = build_profile(c.model, geom, c.effective_seed());
  ChiralHamiltonian h = build_ssh(geom, profile);
  return {geom, std::move(profile), std::move(h)};
}

/// Gap of the periodic closure at ring_factor * L cells (CellC2 picture).
inline double point_gap(const ExperimentConfig& c, const PointModel& m) {
  return bulk_gap(m.profile, std::max(2, c.delta.ring_factor * m.profile.cells()));
}

inline DeltaPolicy point_policy(const ExperimentConfig& c, const PointModel& m, const ScanPoint& p) {
  switch (c.delta.mode) {
    case DeltaMode::Manual:
      return DeltaPolicy::manual(*p.delta);
    case DeltaMode::Empirical:
      return DeltaPolicy::empirical(p.length);
    case DeltaMode::Theorem:
      return DeltaPolicy::theorem(point_gap(c, m), c.delta.d, short_range_constant(m.hamiltonian, c.delta.d),
                                  p.length);
  }
  return DeltaPolicy::empirical(p.length);
}

namespace detail {

inline std::string describe(const ScanPoint& p) {
  std::string s = "scan point L=" + std::to_string(p.length);
  if (p.delta) s += " delta=" + format_number(*p.delta);
  s += " ell=" + (p.ell ? std::to_string(*p.ell) : std::string("middle"));
  return s;
}

/// Evaluates fn(i) for i in [0, n) on up to `threads` workers; results keep index order.
template <class T, class F>
std::vector<T> parallel_map(std::size_t n, int threads, F&& fn) {
  std::vector<std::optional<T>> results(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        results[i] = fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(n)));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<T> out;
  out.reserve(n);
  for (auto& r : results) out.push_back(std::move(*r));
  return out;
}

}  // namespace detail

/// One IndexReport row per scan point. Rows whose correspondence residual
/// exceeds kResidualTolerance abort the run with NumericalFailure.
inline ResultTable run(const ExperimentConfig& c, const RunOptions& opts = {}) {
  const auto points = scan_points(c);
  const auto seed = c.effective_seed();
  auto rows = detail::parallel_map<std::vector<std::string>>(points.size(), opts.threads, [&](std::size_t i) {
    const ScanPoint& p = points[i];
    try {
      const PointModel m = point_model(c, p.length);
      const IndexReport r = index_report(m.hamiltonian, point_policy(c, m, p), p.ell);
      if (!(r.correspondence_residual < kResidualTolerance)) {
        throw NumericalFailure("correspondence residual " + format_number(r.correspondence_residual) +
                               " exceeds " + format_number(kResidualTolerance));
      }
      return index_row(p.length, seed, r);
    } catch (const ConfigError&) {
      throw;
    } catch (const InvalidSwitch& e) {
      throw ConfigError("switch", detail::describe(p) + ": " + e.what());
    } catch (const InvalidProfile& e) {
      throw ConfigError("model", detail::describe(p) + ": " + e.what());
    } catch (const std::exception& e) {
      throw NumericalFailure(detail::describe(p) + ": " + e.what());
    }
  });
  ResultTable t;
  t.provenance = provenance_block(c, "index scan=" + to_string(c.scan), opts);
  t.columns = index_columns();
  for (auto& r : rows) t.add_row(std::move(r));
  return t;
}

/// Per-cell bulk and edge densities at the first scan point.
inline ResultTable density_table(const ExperimentConfig& c, const RunOptions& opts = {}) {
  const ScanPoint p = scan_points(c).front();
  const PointModel m = point_model(c, p.length);
  const double delta = resolve_delta(point_policy(c, m, p));
  const SwitchFunction theta = switch_function(m.geometry, p.ell);
  const FilteredOperators f = filter(m.hamiltonian, delta);
  ResultTable t;
  t.provenance = provenance_block(c, "density delta=" + format_number(delta) +
                                         " ell=" + std::to_string(theta.transition()), opts);
  t.columns = density_columns();
  for (DensityKind kind : {DensityKind::Bulk, DensityKind::Edge}) {
    const auto dens = index_density(m.hamiltonian, f, theta, kind);
    for (std::size_t x = 0; x < dens.size(); ++x) {
      t.add_row({std::to_string(x), format_number(dens[x]), to_string(kind)});
    }
  }
  return t;
}

/// Locality certificates for the first scan point (CellC2 only).
inline ResultTable bounds_table(const ExperimentConfig& c, const RunOptions& opts = {}) {
  if (c.convention != Convention::CellC2) throw ConfigError("geometry.convention", "bounds require \"cell\"");
  const ScanPoint p = scan_points(c).front();
  const PointModel m = point_model(c, p.length);
  const double d = c.delta.d;
  const double k_d = short_range_constant(m.hamiltonian, d);
  const double gap = point_gap(c, m);
  const double delta = resolve_delta(point_policy(c, m, p));
  const FilterParams params(delta, d, k_d);
  const int length = p.length;
  const double threshold = default_threshold(length);

  ResultTable t;
  t.provenance = provenance_block(c, "bounds K_d=" + format_number(k_d) + " Delta=" + format_number(gap) +
                                         " d_prime=" + format_number(params.d_prime), opts);
  t.columns = bound_columns();
  for (double time : {0.1, 0.5, 1.0}) {
    auto cert = lieb_robinson_check(m.hamiltonian, time, d, k_d);
    cert.name += "_t" + format_number(time);
    t.add_row(bound_row(cert, length, delta));
  }
  t.add_row(bound_row(edge_filter_decay_check(m.hamiltonian, delta, gap, params.d_prime), length, delta));

  const SwitchFunction theta = switch_function(m.geometry, p.ell);
  const TraceNorms norms = anticommutator_trace_norms(m.hamiltonian, delta, theta);
  const double env = std::exp(-2.0 * gap / delta) + std::exp(-length / (48.0 * params.d_prime));
  t.add_row(bound_row(envelope_certificate("anticommutator_trace_norm", norms.anticommutator, env, threshold),
                      length, delta));
  t.add_row(bound_row(envelope_certificate("commutator_trace_norm", norms.commutator, env, threshold), length,
                      delta));

  if (length >= 6) {
    const std::pair<int, int> omega{length / 3, length - length / 3};
    const int d_omega = omega.first;
    const double env_r = std::exp(-d_omega / (2.0 * params.d_prime));
    for (auto [kind, name] : {std::pair{FilterKind::GapFilter, "restriction_gap_filter"},
                              std::pair{FilterKind::FlattenedSign, "restriction_flattened_sign"}}) {
      const double v = restriction_discrepancy(m.profile, length, length, omega, kind, delta);
      t.add_row(bound_row(envelope_certificate(name, v, env_r, threshold), length, delta));
    }
  }
  return t;
}

// ---------------------------------------------------------------------------
// Figure pipelines
// ---------------------------------------------------------------------------

struct FigureTables {
  ResultTable scan;     // index rows
  ResultTable profile;  // density rows (fig3) or delta scan (fig4)
};

/// Default chain lengths of the length scan.
inline std::vector<int> default_fig3_lengths() { return {10, 20, 30, 40, 50, 60, 70, 80, 90, 100}; }

/// Length scan of the defect chain at delta = 1/sqrt(2L), and per-cell
/// densities at L = 30, delta = 1/20.
inline FigureTables reproduce_fig3(std::uint64_t seed, const RunOptions& opts = {},
                                   std::vector<int> lengths = default_fig3_lengths()) {
  ExperimentConfig scan;
  scan.model = defect_chain_model();
  scan.seed = seed;
  scan.lengths = std::move(lengths);
  scan.delta.mode = DeltaMode::Empirical;
  scan.scan = ScanAxis::Length;

  ExperimentConfig dens;
  dens.model = defect_chain_model();
  dens.seed = seed;
  dens.lengths = {30};
  dens.delta.mode = DeltaMode::Manual;
  dens.delta.values = {1.0 / 20.0};
  return {run(scan, opts), density_table(dens, opts)};
}

/// Log-spaced values from lo to hi inclusive.
inline std::vector<double> log_space(double lo, double hi, int count) {
  std::vector<double> out;
  for (int i = 0; i < count; ++i) {
    const double f = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
    out.push_back(std::pow(10.0, std::log10(lo) + f * (std::log10(hi) - std::log10(lo))));
  }
  return out;
}

/// Switch-position scan (ell = 1 .. 29) at L = 30, delta = 1/20, and a delta
/// scan over 31 log-spaced values in [1e-3, 1] at L = 30.
inline FigureTables reproduce_fig4(std::uint64_t seed, const RunOptions& opts = {}) {
  ExperimentConfig sw;
  sw.model = defect_chain_model();
  sw.seed = seed;
  sw.lengths = {30};
  sw.delta.mode = DeltaMode::Manual;
  sw.delta.values = {1.0 / 20.0};
  sw.switches.clear();
  for (int l = 1; l < 30; ++l) sw.switches.push_back(l);
  sw.scan = ScanAxis::Switch;

  ExperimentConfig ds;
  ds.model = defect_chain_model();
  ds.seed = seed;
  ds.lengths = {30};
  ds.delta.mode = DeltaMode::Manual;
  ds.delta.values = log_space(1e-3, 1.0, 31);
  ds.scan = ScanAxis::Delta;
  return {run(sw, opts), run(ds, opts)};
}

}  // namespace fci

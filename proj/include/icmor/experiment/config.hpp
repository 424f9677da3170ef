#pragma once

// Experiment configuration, an INI file:
//
//   [system]
//   source = convdiff          ; convdiff | beam | files
//   n_inner = 40               ; convdiff grid
//   beam_dir =                 ; beam data, empty -> $ICMOR_DATA_DIR
//   beam_case = trained        ; trained | not_trained
//   manifest = sys/manifest.ini ; files
//   training =                 ; files: optional X0 matrix (.mtx)
//
//   [reduction]
//   method = BT                ; BT IRKA ISRK (uncontrolled part), BT-BT split-IRKA
//                              ; split-ISRK, BT-aug, given
//   order = 12                 ; uncontrolled order, total order for BT-aug
//   order_controlled = 0
//   rom = rom/manifest.ini     ; given: Ar, Br, Cr as A, B, C plus W
//   gramians = auto            ; auto | dense | low_rank
//   lowrank_tol = 1e-10
//   tol = 1e-6                 ; IRKA/ISRK shift convergence
//   max_iterations = 100
//
//   [estimator]
//   gap = true
//   dense_gap_limit = 2000
//
//   [scenario]
//   x0 = default               ; default | mu:<value> | v0:<a,b,...> | constant:<c> | file:<path>
//   T = default                ; default | auto | <value>
//   input = default            ; default | none | pulse:<t0>,<t1>,<amplitude>
//   mesh_points = 10000
//   refine = 1
//
//   [integrator]
//   rtol = 1e-10
//   atol = 1e-12
//   mode = adaptive            ; adaptive | exponential
//
//   [output]
//   dir = icmor_out
//   trajectories = false
//
//   [run]
//   seed = 1
//
// Relative input paths are resolved against the config file's directory,
// output.dir against the working directory.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "icmor/benchmarks/beam.hpp"
#include "icmor/core/error.hpp"
#include "icmor/simulate/integrate.hpp"
#include "icmor/solvers/gramian.hpp"

namespace icmor::experiment {

namespace fs = std::filesystem;
using boost::property_tree::ptree;

enum class Source { convdiff, beam, files };

struct ExperimentConfig {
  Source source = Source::convdiff;
  Index n_inner = 40;
  std::string beam_dir;
  BeamCase beam_case = BeamCase::trained;
  std::string manifest;
  std::string training;

  std::string method = "BT";
  Index order = 12;
  Index order_controlled = 0;
  std::string rom;
  GramianMode gramians = GramianMode::automatic;
  double lowrank_tol = 1e-10;
  double tol = 1e-6;
  Index max_iterations = 100;

  bool gap = true;
  Index dense_gap_limit = 2000;

  std::string x0 = "default";
  std::string T = "default";
  std::string input = "default";
  std::size_t mesh_points = 10000;
  std::size_t refine = 1;

  double rtol = 1e-10;
  double atol = 1e-12;
  IntegrationMode mode = IntegrationMode::adaptive;

  std::string out_dir = "icmor_out";
  bool trajectories = false;

  std::uint64_t seed = 1;

  fs::path base = ".";  // directory relative paths refer to

  fs::path resolve(const std::string& p) const {
    const fs::path path(p);
    return path.is_absolute() ? path : base / path;
  }
};

inline const char* to_string(Source s) {
  switch (s) {
    case Source::convdiff: return "convdiff";
    case Source::beam: return "beam";
    case Source::files: return "files";
  }
  return "?";
}

inline const char* gramian_mode_name(GramianMode m) {
  switch (m) {
    case GramianMode::automatic: return "auto";
    case GramianMode::dense: return "dense";
    case GramianMode::low_rank: return "low_rank";
  }
  return "?";
}

namespace detail {

[[noreturn]] inline void bad_value(const std::string& key, const std::string& value, const std::string& allowed) {
  throw Error("config", "invalid value '" + value + "' for " + key, "allowed: " + allowed);
}

template <class T>
T get(const ptree& t, const std::string& key, T fallback) {
  const auto raw = t.get_optional<std::string>(key);
  if (!raw) return fallback;
  const auto v = t.get_optional<T>(key);
  if (!v) throw Error("config", "cannot parse " + key + " = '" + *raw + "'");
  return *v;
}

inline bool get_bool(const ptree& t, const std::string& key, bool fallback) {
  const auto raw = t.get_optional<std::string>(key);
  if (!raw) return fallback;
  if (*raw == "true" || *raw == "1" || *raw == "yes" || *raw == "on") return true;
  if (*raw == "false" || *raw == "0" || *raw == "no" || *raw == "off") return false;
  bad_value(key, *raw, "true, false");
}

inline const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys{
      "system.source",         "system.n_inner",      "system.beam_dir",       "system.beam_case",
      "system.manifest",       "system.training",     "reduction.method",      "reduction.order",
      "reduction.order_controlled", "reduction.rom",  "reduction.gramians",    "reduction.lowrank_tol",
      "reduction.tol",         "reduction.max_iterations", "estimator.gap",    "estimator.dense_gap_limit",
      "scenario.x0",           "scenario.T",          "scenario.input",        "scenario.mesh_points",
      "scenario.refine",       "integrator.rtol",     "integrator.atol",       "integrator.mode",
      "output.dir",            "output.trajectories", "run.seed"};
  return keys;
}

}  // namespace detail

inline const std::vector<std::string>& methods() {
  static const std::vector<std::string> m{"BT", "IRKA", "ISRK", "BT-BT", "split-IRKA", "split-ISRK", "BT-aug",
                                          "given"};
  return m;
}

/// Rejects values outside the documented domains.
inline void validate(const ExperimentConfig& c) {
  if (std::find(methods().begin(), methods().end(), c.method) == methods().end())
    detail::bad_value("reduction.method", c.method, "BT, IRKA, ISRK, BT-BT, split-IRKA, split-ISRK, BT-aug, given");
  if (c.method == "given") {
    if (c.rom.empty()) throw Error("config", "method 'given' needs reduction.rom");
    if (!fs::exists(c.resolve(c.rom))) throw Error("config", "ROM manifest not found: " + c.resolve(c.rom).string());
  } else if (c.order < 1) {
    throw Error("config", "reduction.order must be >= 1");
  }
  if (c.order_controlled < 0) throw Error("config", "reduction.order_controlled must be >= 0");
  if (c.source == Source::convdiff && c.n_inner < 3) throw Error("config", "system.n_inner must be >= 3");
  if (c.source == Source::files) {
    if (c.manifest.empty()) throw Error("config", "source 'files' needs system.manifest");
    if (!fs::exists(c.resolve(c.manifest)))
      throw Error("config", "system manifest not found: " + c.resolve(c.manifest).string());
    if (!c.training.empty() && !fs::exists(c.resolve(c.training)))
      throw Error("config", "training matrix not found: " + c.resolve(c.training).string());
  }
  if (c.mesh_points < 2) throw Error("config", "scenario.mesh_points must be >= 2");
  if (c.refine < 1) throw Error("config", "scenario.refine must be >= 1");
  if (!(c.rtol > 0) || !(c.atol > 0)) throw Error("config", "integrator tolerances must be positive");
}

inline ExperimentConfig from_ptree(const ptree& t, const fs::path& base = ".") {
  for (const auto& [section, body] : t) {
    for (const auto& [key, value] : body) {
      const std::string full = section + "." + key;
      const auto& known = detail::known_keys();
      if (std::find(known.begin(), known.end(), full) == known.end())
        throw Error("config", "unknown key " + full, "see the key list at the top of the config header");
    }
  }
  ExperimentConfig c;
  c.base = base;
  const std::string source = t.get<std::string>("system.source", "convdiff");
  if (source == "convdiff")
    c.source = Source::convdiff;
  else if (source == "beam")
    c.source = Source::beam;
  else if (source == "files")
    c.source = Source::files;
  else
    detail::bad_value("system.source", source, "convdiff, beam, files");
  c.n_inner = detail::get<Index>(t, "system.n_inner", c.n_inner);
  c.beam_dir = t.get<std::string>("system.beam_dir", "");
  const std::string bc = t.get<std::string>("system.beam_case", "trained");
  if (bc == "trained")
    c.beam_case = BeamCase::trained;
  else if (bc == "not_trained")
    c.beam_case = BeamCase::not_trained;
  else
    detail::bad_value("system.beam_case", bc, "trained, not_trained");
  c.manifest = t.get<std::string>("system.manifest", "");
  c.training = t.get<std::string>("system.training", "");

  c.method = t.get<std::string>("reduction.method", c.method);
  c.order = detail::get<Index>(t, "reduction.order", c.order);
  c.order_controlled = detail::get<Index>(t, "reduction.order_controlled", c.order_controlled);
  c.rom = t.get<std::string>("reduction.rom", "");
  const std::string gm = t.get<std::string>("reduction.gramians", "auto");
  if (gm == "auto")
    c.gramians = GramianMode::automatic;
  else if (gm == "dense")
    c.gramians = GramianMode::dense;
  else if (gm == "low_rank")
    c.gramians = GramianMode::low_rank;
  else
    detail::bad_value("reduction.gramians", gm, "auto, dense, low_rank");
  c.lowrank_tol = detail::get<double>(t, "reduction.lowrank_tol", c.lowrank_tol);
  c.tol = detail::get<double>(t, "reduction.tol", c.tol);
  c.max_iterations = detail::get<Index>(t, "reduction.max_iterations", c.max_iterations);

  c.gap = detail::get_bool(t, "estimator.gap", c.gap);
  c.dense_gap_limit = detail::get<Index>(t, "estimator.dense_gap_limit", c.dense_gap_limit);

  c.x0 = t.get<std::string>("scenario.x0", c.x0);
  c.T = t.get<std::string>("scenario.T", c.T);
  c.input = t.get<std::string>("scenario.input", c.input);
  c.mesh_points = detail::get<std::size_t>(t, "scenario.mesh_points", c.mesh_points);
  c.refine = detail::get<std::size_t>(t, "scenario.refine", c.refine);

  c.rtol = detail::get<double>(t, "integrator.rtol", c.rtol);
  c.atol = detail::get<double>(t, "integrator.atol", c.atol);
  const std::string mode = t.get<std::string>("integrator.mode", "adaptive");
  if (mode == "adaptive")
    c.mode = IntegrationMode::adaptive;
  else if (mode == "exponential")
    c.mode = IntegrationMode::exponential;
  else
    detail::bad_value("integrator.mode", mode, "adaptive, exponential");

  c.out_dir = t.get<std::string>("output.dir", c.out_dir);
  c.trajectories = detail::get_bool(t, "output.trajectories", c.trajectories);
  c.seed = detail::get<std::uint64_t>(t, "run.seed", c.seed);
  validate(c);
  return c;
}

/// Inverse of from_ptree; paths are written as given.
inline ptree to_ptree(const ExperimentConfig& c) {
  auto s = [](double v) {
    std::ostringstream o;
    o.imbue(std::locale::classic());
    o.precision(17);
    o << v;
    return o.str();
  };
  ptree t;
  t.put("system.source", to_string(c.source));
  t.put("system.n_inner", c.n_inner);
  t.put("system.beam_dir", c.beam_dir);
  t.put("system.beam_case", c.beam_case == BeamCase::trained ? "trained" : "not_trained");
  t.put("system.manifest", c.manifest);
  t.put("system.training", c.training);
  t.put("reduction.method", c.method);
  t.put("reduction.order", c.order);
  t.put("reduction.order_controlled", c.order_controlled);
  t.put("reduction.rom", c.rom);
  t.put("reduction.gramians", gramian_mode_name(c.gramians));
  t.put("reduction.lowrank_tol", s(c.lowrank_tol));
  t.put("reduction.tol", s(c.tol));
  t.put("reduction.max_iterations", c.max_iterations);
  t.put("estimator.gap", c.gap ? "true" : "false");
  t.put("estimator.dense_gap_limit", c.dense_gap_limit);
  t.put("scenario.x0", c.x0);
  t.put("scenario.T", c.T);
  t.put("scenario.input", c.input);
  t.put("scenario.mesh_points", c.mesh_points);
  t.put("scenario.refine", c.refine);
  t.put("integrator.rtol", s(c.rtol));
  t.put("integrator.atol", s(c.atol));
  t.put("integrator.mode", c.mode == IntegrationMode::adaptive ? "adaptive" : "exponential");
  t.put("output.dir", c.out_dir);
  t.put("output.trajectories", c.trajectories ? "true" : "false");
  t.put("run.seed", c.seed);
  return t;
}

/// Applies "section.key=value" overrides on top of a parsed tree.
inline void apply_overrides(ptree& t, const std::vector<std::string>& overrides) {
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0 || o.find('.') > eq)
      throw Error("config", "override '" + o + "' is not of the form section.key=value");
    t.put(o.substr(0, eq), o.substr(eq + 1));
  }
}

inline ExperimentConfig load_config(const fs::path& path, const std::vector<std::string>& overrides = {}) {
  if (!fs::exists(path)) throw Error("config", "config file not found: " + path.string());
  ptree t;
  try {
    boost::property_tree::ini_parser::read_ini(path.string(), t);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw Error("config", std::string("malformed config: ") + e.what());
  }
  apply_overrides(t, overrides);
  return from_ptree(t, path.parent_path().empty() ? fs::path(".") : path.parent_path());
}

/// Config assembled from overrides alone (no file).
inline ExperimentConfig config_from_overrides(const std::vector<std::string>& overrides) {
  ptree t;
  apply_overrides(t, overrides);
  return from_ptree(t, ".");
}

}  // namespace icmor::experiment

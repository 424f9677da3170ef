#pragma once

#include <chrono>
#include <ctime>
#include <fstream>
#include <future>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <boost/version.hpp>
#include "json.hpp"

#include "icmor/benchmarks/beam.hpp"
#include "icmor/benchmarks/convdiff.hpp"
#include "icmor/estimator/error_gramian.hpp"
#include "icmor/experiment/config.hpp"
#include "icmor/experiment/csv.hpp"
#include "icmor/io/matrix_market.hpp"
#include "icmor/io/system_io.hpp"
#include "icmor/reduction/initial_condition.hpp"
#include "icmor/simulate/error_metrics.hpp"
#include "icmor/simulate/integrate.hpp"
#include "icmor/simulate/mesh.hpp"

extern "C" char* openblas_get_config(void);

namespace icmor::experiment {

inline constexpr const char* kVersion = "1.0.0";

/// FOM, training matrix and scenario after applying the config defaults.
struct Problem {
  LtiSystem system;  // x0 is the scenario initial state
  Matrix X0;         // training matrix
  InputSignal u;
  double T = 1.0;
  std::string label;
};

/// A reduction result in the shape the pipeline needs: the uncontrolled ROM
/// (x0r = W^T x0) for the estimator, and either a split ROM or one ROM
/// carrying both parts for the full output.
struct RomBundle {
  std::string method;
  ReducedModel uncontrolled;
  std::optional<SplitRom> split;
  std::optional<ReducedModel> joint;
  ReductionReport report;
  std::optional<GramianFactors> q;

  Index order() const { return split ? split->order() : joint ? joint->order() : uncontrolled.order(); }
};

struct ScenarioResult {
  std::string method;
  Index N = 0;
  Index n = 0;
  double T = 0.0;
  ReductionReport report;
  std::optional<Estimate> estimate;
  std::optional<double> gap_norm;
  std::optional<double> E_T;     // full output error at T
  std::optional<double> E_x0_T;  // uncontrolled output error at T
  std::optional<double> rel_discrepancy;  // |Delta - E_x0(T)| / E_x0(T)
  double u_norm = 0.0;
  std::optional<double> combined_bound;  // alpha ||u|| + Delta (split methods)
  fs::path out_dir;
};

enum class Stage { reduce, estimate, simulate, full };

namespace detail {

inline std::vector<double> parse_list(const std::string& s, const std::string& what) {
  std::vector<double> out;
  std::stringstream in(s);
  in.imbue(std::locale::classic());
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error("config", "cannot parse number '" + item + "' in " + what);
    }
  }
  return out;
}

inline std::pair<std::string, std::string> split_kind(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) return {s, ""};
  return {s.substr(0, colon), s.substr(colon + 1)};
}

/// ||u||_{L2(0,T)}, exact for piecewise constant inputs.
inline double input_l2_norm(const InputSignal& u, double T) {
  if (u.is_zero()) return 0.0;
  std::vector<double> pts{0.0};
  for (double b : u.breakpoints())
    if (b > 0 && b < T) pts.push_back(b);
  pts.push_back(T);
  double sum = 0.0;
  if (u.is_piecewise_constant()) {
    for (std::size_t i = 1; i < pts.size(); ++i) sum += u(0.5 * (pts[i - 1] + pts[i])).squaredNorm() * (pts[i] - pts[i - 1]);
    return std::sqrt(sum);
  }
  // composite Simpson per segment
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const int m = 2000;
    const double h = (pts[i] - pts[i - 1]) / m;
    for (int k = 0; k <= m; ++k) {
      const double w = (k == 0 || k == m) ? 1.0 : (k % 2 ? 4.0 : 2.0);
      sum += w * u(pts[i - 1] + k * h).squaredNorm() * h / 3.0;
    }
  }
  return std::sqrt(sum);
}

inline std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

}  // namespace detail

inline GramianOptions gramian_options(const ExperimentConfig& c) {
  GramianOptions g;
  g.mode = c.gramians;
  g.low_rank.tol = c.lowrank_tol;
  g.low_rank.seed = c.seed;
  return g;
}

inline ReductionOptions reduction_options(const ExperimentConfig& c) {
  ReductionOptions r;
  r.gramians = gramian_options(c);
  r.interpolation.seed = c.seed;
  r.interpolation.tol = c.tol;
  r.interpolation.max_iterations = c.max_iterations;
  return r;
}

inline IntegratorOptions integrator_options(const ExperimentConfig& c) {
  IntegratorOptions o;
  o.rtol = c.rtol;
  o.atol = c.atol;
  o.mode = c.mode;
  return o;
}

inline EstimatorOptions estimator_options(const ExperimentConfig& c) {
  EstimatorOptions e;
  e.gap = c.gap;
  e.dense_gap_limit = c.dense_gap_limit;
  e.seed = c.seed + 10;
  return e;
}

inline Problem build_problem(const ExperimentConfig& c, std::ostream* log = nullptr) {
  std::optional<LtiSystem> sys;
  Matrix X0;
  std::optional<InputSignal> u_default;
  std::optional<double> T_default;
  std::string label;
  switch (c.source) {
    case Source::convdiff: {
      ConvDiffConfig cc;
      cc.n_inner = c.n_inner;
      auto prob = convdiff_generate(cc);
      sys = std::move(prob.system);
      X0 = std::move(prob.X0);
      T_default = 1.0;
      label = "convdiff n_inner=" + std::to_string(c.n_inner);
      break;
    }
    case Source::beam: {
      auto sc = beam_load_scenario(c.beam_dir.empty() ? "" : c.resolve(c.beam_dir).string(), c.beam_case, log);
      sys = std::move(sc.system);
      X0 = std::move(sc.X0);
      u_default = sc.u;
      T_default = sc.T;
      label = std::string("beam ") + (c.beam_case == BeamCase::trained ? "trained" : "not_trained");
      break;
    }
    case Source::files: {
      sys = io::load_system(c.resolve(c.manifest));
      X0 = c.training.empty() ? Matrix(sys->x0()) : io::read_dense(c.resolve(c.training));
      if (X0.rows() != sys->N()) throw Error("config", "training matrix must have N rows");
      label = "files " + c.manifest;
      break;
    }
  }

  // initial state
  const auto [kind, arg] = detail::split_kind(c.x0);
  Vector x0;
  if (kind == "default") {
    x0 = c.source == Source::convdiff ? convdiff_initial_state(3.0, ConvDiffConfig{.n_inner = c.n_inner}) : sys->x0();
  } else if (kind == "mu") {
    if (c.source != Source::convdiff) throw Error("config", "x0 = mu:<value> needs source = convdiff");
    const auto v = detail::parse_list(arg, "scenario.x0");
    if (v.size() != 1) throw Error("config", "x0 = mu:<value> takes one number");
    x0 = convdiff_initial_state(v[0], ConvDiffConfig{.n_inner = c.n_inner});
  } else if (kind == "v0") {
    const auto v = detail::parse_list(arg, "scenario.x0");
    if (static_cast<Index>(v.size()) != X0.cols())
      throw Error("config", "x0 = v0:... needs " + std::to_string(X0.cols()) + " coefficients");
    x0 = X0 * Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
  } else if (kind == "constant") {
    const auto v = detail::parse_list(arg, "scenario.x0");
    if (v.size() != 1) throw Error("config", "x0 = constant:<value> takes one number");
    x0 = Vector::Constant(sys->N(), v[0]);
  } else if (kind == "file") {
    x0 = io::read_vector(c.resolve(arg));
    if (x0.size() != sys->N()) throw Error("config", "x0 file has length " + std::to_string(x0.size()));
  } else {
    detail::bad_value("scenario.x0", c.x0, "default, mu:<v>, v0:<a,b,...>, constant:<c>, file:<path>");
  }
  LtiSystem with_state = sys->with_x0(std::move(x0));

  // input
  InputSignal u;
  const auto [ukind, uarg] = detail::split_kind(c.input);
  if (ukind == "default") {
    if (u_default) u = *u_default;
  } else if (ukind == "pulse") {
    const auto v = detail::parse_list(uarg, "scenario.input");
    if (v.size() != 3) throw Error("config", "input = pulse:<t0>,<t1>,<amplitude>");
    if (with_state.q() == 0) throw Error("config", "the system has no input", "use input = none");
    u = InputSignal::pulse(v[0], v[1], Vector::Constant(with_state.q(), v[2]));
  } else if (ukind != "none") {
    detail::bad_value("scenario.input", c.input, "default, none, pulse:<t0>,<t1>,<amplitude>");
  }

  // horizon
  double T = 0.0;
  if (c.T == "auto" || (c.T == "default" && !T_default)) {
    double last = 0.0;
    for (double b : u.breakpoints()) last = std::max(last, b);
    T = last + std::max(decay_horizon(with_state, 1e-9), 1.0);
  } else if (c.T == "default") {
    T = *T_default;
  } else {
    const auto v = detail::parse_list(c.T, "scenario.T");
    if (v.size() != 1 || !(v[0] > 0)) throw Error("config", "scenario.T must be positive");
    T = v[0];
  }
  return Problem{std::move(with_state), std::move(X0), std::move(u), T, std::move(label)};
}

/// ROM from a manifest: A, B, C of the reduced system plus system.W, the
/// map x0 -> xr0 = W^T x0.
inline ReducedModel load_rom(const fs::path& manifest, const LtiSystem& fom) {
  const LtiSystem r = io::load_system(manifest);
  const auto tree = io::read_ini(manifest);
  const auto w_file = tree.get_optional<std::string>("system.W");
  if (!w_file) throw Error("io", "ROM manifest " + manifest.string() + " must name system.W");
  ReducedModel rom;
  rom.Ar = r.A().to_dense();
  rom.Cr = r.C();
  rom.Br = r.q() ? r.B() : Matrix::Zero(r.N(), fom.q());
  rom.W = io::read_dense(io::resolve(manifest.parent_path(), *w_file));
  if (rom.Cr.rows() != fom.p() || rom.Br.cols() != fom.q() || rom.W->rows() != fom.N() ||
      rom.W->cols() != rom.order())
    throw Error("io", "ROM files do not match the full model dimensions");
  rom.x0r = rom.W->transpose() * fom.x0();
  return rom;
}

inline RomBundle reduce(const Problem& prob, const ExperimentConfig& c, bool need_q = true) {
  RomBundle b;
  b.method = c.method;
  const ReductionOptions ropt = reduction_options(c);
  if (need_q || c.method != "given") b.q = observability_gramian(prob.system, ropt.gramians);
  if (c.method == "given") {
    ReducedModel rom = load_rom(c.resolve(c.rom), prob.system);
    b.uncontrolled = rom;
    b.uncontrolled.Br.setZero();
    b.report.order = rom.order();
    b.report.stable = is_hurwitz(rom.Ar);
    b.report.seed = c.seed;
    b.report.notes.push_back("user-supplied ROM");
    b.joint = std::move(rom);
    return b;
  }
  if (c.method == "BT-aug") {
    auto [rom, rep] = bt_aug(prob.system, prob.X0, c.order, ropt, &*b.q);
    rep.seed = c.seed;
    b.uncontrolled = rom;
    b.uncontrolled.Br.setZero();
    b.joint = std::move(rom);
    b.report = std::move(rep);
    return b;
  }
  UncontrolledMethod m = UncontrolledMethod::BT;
  if (c.method == "IRKA" || c.method == "split-IRKA") m = UncontrolledMethod::IRKA;
  if (c.method == "ISRK" || c.method == "split-ISRK") m = UncontrolledMethod::ISRK;
  auto [split, rep] = split_reduce(prob.system, prob.X0, c.order, c.order_controlled, m, ropt, &*b.q);
  b.uncontrolled = split.uncontrolled;
  b.split = std::move(split);
  b.report = std::move(rep);
  return b;
}

inline nlohmann::json report_json(const RomBundle& b) {
  nlohmann::json j = to_json(b.report);
  j["method"] = b.method;
  return j;
}

inline void write_rom(const fs::path& dir, const RomBundle& b) {
  auto save = [](const fs::path& d, const ReducedModel& r, const std::string& name) {
    io::save_system(d, r.as_system(), name, {{"W", "W.mtx"}});
    io::write_dense(d / "W.mtx", r.W ? *r.W : Matrix(0, 0));
  };
  if (b.split) {
    save(dir / "uncontrolled", b.split->uncontrolled, "uncontrolled");
    if (b.split->controlled.order() > 0) save(dir / "controlled", b.split->controlled, "controlled");
  } else if (b.joint) {
    save(dir, *b.joint, b.method);
  }
}

inline void write_hankel(const fs::path& path, const ReductionReport& r) {
  CsvWriter w(path);
  w.header({"part", "index", "sigma"});
  for (Index i = 0; i < r.hankel_values.size(); ++i)
    w.row_strings({"controlled_or_augmented", std::to_string(i + 1), fmt(r.hankel_values(i))});
  for (Index i = 0; i < r.uncontrolled_hankel_values.size(); ++i)
    w.row_strings({"uncontrolled", std::to_string(i + 1), fmt(r.uncontrolled_hankel_values(i))});
}

/// Offline estimator data as Matrix Market files plus offline.ini.
inline void write_offline(const fs::path& dir, const EstimatorOffline& off) {
  fs::create_directories(dir);
  io::write_dense(dir / "U.mtx", off.U);
  io::write_dense(dir / "Qbar.mtx", off.Qbar);
  io::write_dense(dir / "Qhat.mtx", off.Qhat);
  io::write_dense(dir / "W.mtx", off.W);
  ptree t;
  t.put("offline.U", "U.mtx");
  t.put("offline.Qbar", "Qbar.mtx");
  t.put("offline.Qhat", "Qhat.mtx");
  t.put("offline.W", "W.mtx");
  t.put("offline.N", off.N());
  t.put("offline.n", off.n());
  t.put("offline.gramian_kind", to_string(off.kind));
  t.put("offline.gramian_residual", fmt(off.gramian_residual));
  t.put("offline.sylvester_residual", fmt(off.sylvester_residual));
  t.put("offline.reduced_lyapunov_residual", fmt(off.reduced_lyapunov_residual));
  if (off.gap_norm) {
    t.put("offline.gap_norm", fmt(*off.gap_norm));
    t.put("offline.gap_is_estimate", off.gap_is_estimate ? "true" : "false");
  }
  boost::property_tree::ini_parser::write_ini((dir / "offline.ini").string(), t);
}

inline EstimatorOffline load_offline(const fs::path& dir) {
  const auto t = io::read_ini(dir / "offline.ini");
  auto file = [&](const char* key) {
    const auto f = t.get_optional<std::string>(std::string("offline.") + key);
    if (!f) throw Error("io", std::string("offline.ini lacks offline.") + key);
    return io::read_dense(io::resolve(dir, *f));
  };
  EstimatorOffline off;
  off.U = file("U");
  off.Qbar = file("Qbar");
  off.Qhat = file("Qhat");
  off.W = file("W");
  if (off.U.cols() != off.N() || off.Qbar.rows() != off.N() || off.Qbar.cols() != off.n() ||
      off.Qhat.rows() != off.n() || off.Qhat.cols() != off.n())
    throw Error("io", "offline files in " + dir.string() + " have inconsistent shapes");
  if (const auto g = t.get_optional<double>("offline.gap_norm")) {
    off.gap_norm = *g;
    off.gap_is_estimate = t.get<std::string>("offline.gap_is_estimate", "false") == "true";
  }
  return off;
}

inline void write_provenance(const fs::path& dir, const ExperimentConfig& c, const Problem& prob) {
  ptree t;
  t.put("run.tool", std::string("icmor ") + kVersion);
  t.put("run.seed", c.seed);
  t.put("run.system", prob.label);
  t.put("run.N", prob.system.N());
  t.put("run.T", fmt(prob.T));
  if (c.source == Source::convdiff) t.put("run.discretization", kConvDiffDiscretization);
  t.put("integrator.rtol", fmt(c.rtol));
  t.put("integrator.atol", fmt(c.atol));
  t.put("integrator.mode", c.mode == IntegrationMode::adaptive ? "adaptive" : "exponential");
  t.put("integrator.mesh_points", c.mesh_points);
  t.put("integrator.refine", c.refine);
  t.put("gramians.mode", gramian_mode_name(c.gramians));
  t.put("gramians.lowrank_tol", fmt(c.lowrank_tol));
  t.put("versions.eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                              std::to_string(EIGEN_MINOR_VERSION));
  t.put("versions.boost", BOOST_LIB_VERSION);
  t.put("versions.nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                      std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                      std::to_string(NLOHMANN_JSON_VERSION_PATCH));
  t.put("versions.blas", openblas_get_config());
  t.put("versions.compiler", __VERSION__);
  t.put("run.timestamp", detail::timestamp());
  boost::property_tree::ini_parser::write_ini((dir / "provenance.ini").string(), t);

  ExperimentConfig copy = c;
  auto abs = [&](std::string& p) {
    if (!p.empty()) p = fs::weakly_canonical(c.resolve(p)).string();
  };
  abs(copy.manifest);
  abs(copy.training);
  abs(copy.rom);
  abs(copy.beam_dir);
  if (detail::split_kind(copy.x0).first == "file") copy.x0 = "file:" + fs::weakly_canonical(c.resolve(detail::split_kind(c.x0).second)).string();
  boost::property_tree::ini_parser::write_ini((dir / "config.ini").string(), to_ptree(copy));
}

/// Runs the pipeline up to `stage` and writes its artifacts into cfg.out_dir.
inline ScenarioResult run_experiment(const ExperimentConfig& c, Stage stage = Stage::full,
                                     std::ostream* log = nullptr) {
  validate(c);
  const fs::path dir = c.out_dir;
  fs::create_directories(dir);
  const Problem prob = build_problem(c, log);
  write_provenance(dir, c, prob);
  if (log) *log << "system: " << prob.label << ", N = " << prob.system.N() << ", T = " << prob.T << "\n";

  const bool estimate = stage == Stage::estimate || stage == Stage::full;
  const bool simulate = stage == Stage::simulate || stage == Stage::full;
  const RomBundle b = reduce(prob, c, estimate);
  if (log) *log << "reduced with " << b.method << " to order " << b.order() << "\n";

  ScenarioResult res;
  res.method = b.method;
  res.N = prob.system.N();
  res.n = b.order();
  res.T = prob.T;
  res.report = b.report;
  res.out_dir = dir;
  res.u_norm = detail::input_l2_norm(prob.u, prob.T);

  {
    std::ofstream js(dir / "report.json");
    js << report_json(b).dump(2) << "\n";
  }
  write_hankel(dir / "hankel.csv", b.report);
  write_rom(dir / "rom", b);

  if (estimate) {
    if (!b.uncontrolled.W) throw Error("estimator", "ROM carries no W");
    const EstimatorOffline off = build_error_gramian(prob.system, b.uncontrolled, *b.q, estimator_options(c));
    write_offline(dir / "offline", off);
    res.estimate = estimate_delta(off, prob.system.x0());
    res.gap_norm = off.gap_norm;
    if (b.split) res.combined_bound = b.report.alpha * res.u_norm + res.estimate->delta;
    if (log) *log << "Delta = " << fmt(res.estimate->delta) << "\n";
  }

  if (simulate) {
    const TimeMesh mesh = refine_mesh(make_log_mesh(prob.T, c.mesh_points), c.refine);
    const IntegratorOptions iopt = integrator_options(c);
    const Trajectory yx = integrate_lti(prob.system, InputSignal::none(), mesh, iopt);
    const Trajectory yxr = integrate_lti(b.uncontrolled, InputSignal::none(), mesh, iopt);
    const Vector ex = cumulative_l2_error(yx, yxr);
    Vector e = ex;
    std::optional<Trajectory> y, yr;
    if (!prob.u.is_zero()) {
      y = integrate_lti(prob.system, prob.u, mesh, iopt);
      yr = b.split ? integrate_lti(*b.split, prob.u, mesh, iopt) : integrate_lti(*b.joint, prob.u, mesh, iopt);
      e = cumulative_l2_error(*y, *yr);
    }
    res.E_T = e.tail(1)(0);
    res.E_x0_T = ex.tail(1)(0);
    const Matrix erow = e.transpose();
    const Matrix exrow = ex.transpose();
    write_series(dir / "error.csv", mesh.points, {"E", "E_x0"}, {&erow, &exrow});
    if (c.trajectories) {
      std::vector<std::string> names;
      for (Index i = 0; i < prob.system.p(); ++i) names.push_back("y" + std::to_string(i + 1));
      for (Index i = 0; i < prob.system.p(); ++i) names.push_back("yr" + std::to_string(i + 1));
      write_series(dir / "trajectories.csv", mesh.points, names, {y ? &y->y : &yx.y, yr ? &yr->y : &yxr.y});
    }
    if (res.estimate && *res.E_x0_T > 0)
      res.rel_discrepancy = std::abs(res.estimate->delta - *res.E_x0_T) / *res.E_x0_T;
    if (log) *log << "E(T) = " << fmt(*res.E_T) << ", E_x0(T) = " << fmt(*res.E_x0_T) << "\n";
  }

  auto opt = [](const std::optional<double>& v) { return v ? fmt(*v) : std::string(); };
  std::vector<std::pair<std::string, std::string>> kv{
      {"method", b.method},
      {"N", std::to_string(res.N)},
      {"n", std::to_string(res.n)},
      {"n_uncontrolled", std::to_string(b.uncontrolled.order())},
      {"n_controlled", std::to_string(b.split ? b.split->controlled.order() : 0)},
      {"T", fmt(res.T)},
      {"seed", std::to_string(c.seed)},
      {"delta", res.estimate ? fmt(res.estimate->delta) : ""},
      {"delta_raw_square", res.estimate ? fmt(res.estimate->raw_square) : ""},
      {"delta_upper_bound", res.estimate ? opt(res.estimate->upper_bound) : ""},
      {"gap_norm", opt(res.gap_norm)},
      {"E_T", opt(res.E_T)},
      {"E_x0_T", opt(res.E_x0_T)},
      {"rel_discrepancy", opt(res.rel_discrepancy)},
      {"alpha", fmt(b.report.alpha)},
      {"alpha_aug", b.report.aug_alpha ? fmt(*b.report.aug_alpha) : ""},
      {"u_norm", fmt(res.u_norm)},
      {"combined_bound", opt(res.combined_bound)},
      {"iterations", std::to_string(b.report.iterations)},
      {"converged", b.report.converged ? "true" : "false"},
      {"stable", b.report.stable ? "true" : "false"}};
  write_key_values(dir / "summary.csv", kv);
  return res;
}

/// Runs independent configs with at most `jobs` in flight. Returns the number
/// of failed runs; failures are reported on `err`.
inline int run_batch(const std::vector<ExperimentConfig>& configs, int jobs, std::ostream& err) {
  jobs = std::max(jobs, 1);
  int failed = 0;
  std::vector<std::future<std::string>> running;
  auto drain = [&](std::size_t keep) {
    while (running.size() > keep) {
      const std::string msg = running.front().get();
      running.erase(running.begin());
      if (!msg.empty()) {
        err << msg << "\n";
        ++failed;
      }
    }
  };
  for (const auto& c : configs) {
    drain(static_cast<std::size_t>(jobs) - 1);
    running.push_back(std::async(std::launch::async, [c]() -> std::string {
      try {
        run_experiment(c);
        return {};
      } catch (const std::exception& e) {
        return "error [" + c.out_dir + "]: " + e.what();
      }
    }));
  }
  drain(0);
  return failed;
}

}  // namespace icmor::experiment

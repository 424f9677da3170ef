// icmor: command line front end for the reduction / estimation pipeline.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "icmor/icmor.hpp"

namespace ex = icmor::experiment;
namespace fs = std::filesystem;

namespace {

// Flags shared by the pipeline subcommands; each one becomes a config override.
struct PipelineArgs {
  std::vector<std::string> configs;
  std::vector<std::string> sets;
  std::string source, method, out, x0, T, input, gramians, beam_dir, beam_case, manifest, mode;
  std::string order, order_controlled, seed, n_inner, mesh_points, refine, rtol, atol;
  bool quiet = false;

  void add(CLI::App* app, bool many_configs) {
    if (many_configs)
      app->add_option("config", configs, "experiment config file(s)")->check(CLI::ExistingFile);
    else
      app->add_option("-c,--config", configs, "experiment config file")->check(CLI::ExistingFile)->expected(0, 1);
    app->add_option("--set", sets, "override, section.key=value (repeatable)");
    app->add_option("--source", source, "system.source: convdiff | beam | files");
    app->add_option("--n-inner", n_inner, "system.n_inner");
    app->add_option("--beam-dir", beam_dir, "system.beam_dir");
    app->add_option("--beam-case", beam_case, "system.beam_case: trained | not_trained");
    app->add_option("--manifest", manifest, "system.manifest");
    app->add_option("--method", method, "reduction.method");
    app->add_option("--order", order, "reduction.order");
    app->add_option("--order-controlled", order_controlled, "reduction.order_controlled");
    app->add_option("--gramians", gramians, "reduction.gramians: auto | dense | low_rank");
    app->add_option("--x0", x0, "scenario.x0");
    app->add_option("--T", T, "scenario.T");
    app->add_option("--input", input, "scenario.input");
    app->add_option("--mesh-points", mesh_points, "scenario.mesh_points");
    app->add_option("--refine", refine, "scenario.refine");
    app->add_option("--rtol", rtol, "integrator.rtol");
    app->add_option("--atol", atol, "integrator.atol");
    app->add_option("--mode", mode, "integrator.mode: adaptive | exponential");
    app->add_option("--seed", seed, "run.seed");
    app->add_option("-o,--out", out, "output.dir");
    app->add_flag("-q,--quiet", quiet, "no progress output");
  }

  std::vector<std::string> overrides() const {
    std::vector<std::string> o = sets;
    auto put = [&](const char* key, const std::string& v) {
      if (!v.empty()) o.push_back(std::string(key) + "=" + v);
    };
    put("system.source", source);
    put("system.n_inner", n_inner);
    put("system.beam_dir", beam_dir);
    put("system.beam_case", beam_case);
    put("system.manifest", manifest);
    put("reduction.method", method);
    put("reduction.order", order);
    put("reduction.order_controlled", order_controlled);
    put("reduction.gramians", gramians);
    put("scenario.x0", x0);
    put("scenario.T", T);
    put("scenario.input", input);
    put("scenario.mesh_points", mesh_points);
    put("scenario.refine", refine);
    put("integrator.rtol", rtol);
    put("integrator.atol", atol);
    put("integrator.mode", mode);
    put("run.seed", seed);
    put("output.dir", out);
    return o;
  }

  std::vector<ex::ExperimentConfig> load() const {
    std::vector<ex::ExperimentConfig> out_cfgs;
    if (configs.empty()) {
      out_cfgs.push_back(ex::config_from_overrides(overrides()));
    } else {
      for (const auto& c : configs) out_cfgs.push_back(ex::load_config(c, overrides()));
    }
    return out_cfgs;
  }
};

void print_summary(const ex::ScenarioResult& r) {
  std::cout << "method,N,n,T,delta,E_T,E_x0_T,rel_discrepancy,alpha\n";
  auto opt = [](const std::optional<double>& v) { return v ? ex::fmt(*v) : std::string(); };
  std::cout << r.method << "," << r.N << "," << r.n << "," << ex::fmt(r.T) << ","
            << (r.estimate ? ex::fmt(r.estimate->delta) : "") << "," << opt(r.E_T) << "," << opt(r.E_x0_T) << ","
            << opt(r.rel_discrepancy) << "," << ex::fmt(r.report.alpha) << "\n";
}

int run_stage(const PipelineArgs& a, ex::Stage stage) {
  const auto cfgs = a.load();
  if (cfgs.size() != 1) throw icmor::Error("cli", "this subcommand takes one config", "use 'run' for batches");
  const auto r = ex::run_experiment(cfgs.front(), stage, a.quiet ? nullptr : &std::cerr);
  print_summary(r);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Model reduction with initial conditions: reduce, certify and simulate LTI systems."};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("icmor ") + ex::kVersion);

  // generate
  auto* gen = app.add_subcommand("generate", "write a benchmark system as Matrix Market files");
  std::string gen_kind, gen_out, gen_beam_dir, gen_case = "trained";
  icmor::Index gen_n = 40;
  double gen_mu = 3.0;
  gen->add_option("kind", gen_kind, "convdiff | beam")->required()->check(CLI::IsMember({"convdiff", "beam"}));
  gen->add_option("-o,--out", gen_out, "output directory")->required();
  gen->add_option("--n-inner", gen_n, "convdiff inner grid points per direction");
  gen->add_option("--mu", gen_mu, "convdiff initial state parameter");
  gen->add_option("--beam-dir", gen_beam_dir, "beam data directory (default: $ICMOR_DATA_DIR)");
  gen->add_option("--beam-case", gen_case, "trained | not_trained")->check(CLI::IsMember({"trained", "not_trained"}));

  PipelineArgs reduce_args, estimate_args, simulate_args, run_args;
  auto* reduce = app.add_subcommand("reduce", "reduce a system and write the ROM and report");
  reduce_args.add(reduce, false);
  auto* estimate = app.add_subcommand("estimate", "reduce and build the error estimator, or evaluate stored offline data");
  estimate_args.add(estimate, false);
  std::string offline_dir, x0_file;
  estimate->add_option("--offline", offline_dir, "offline directory written by a previous run");
  estimate->add_option("--x0-file", x0_file, "initial state vector (.mtx) for --offline");
  auto* simulate = app.add_subcommand("simulate", "reduce and simulate FOM and ROM, writing E(t)");
  simulate_args.add(simulate, false);
  auto* run = app.add_subcommand("run", "full pipeline for one or more configs");
  run_args.add(run, true);
  int jobs = 1;
  run->add_option("-j,--jobs", jobs, "configs run concurrently")->check(CLI::PositiveNumber);

  auto* table = app.add_subcommand("reproduce-table", "recompute a published table");
  std::string which, scale = "desk", table_out, table_beam;
  std::size_t table_mesh = 10000, table_refine = 1;
  table->add_option("which", which, "table1 | table2 | table3")->required();
  table->add_option("--scale", scale, "desk | full");
  table->add_option("-o,--out", table_out, "CSV file (default: stdout)");
  table->add_option("--beam-dir", table_beam, "beam data directory (default: $ICMOR_DATA_DIR)");
  table->add_option("--mesh-points", table_mesh, "log mesh points");
  table->add_option("--refine", table_refine, "mesh refinement factor");
  bool table_quiet = false;
  table->add_flag("-q,--quiet", table_quiet, "no progress output");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      if (gen_kind == "convdiff") {
        icmor::ConvDiffConfig cfg;
        cfg.n_inner = gen_n;
        auto prob = icmor::convdiff_generate(cfg);
        const auto empty = (prob.system.C().rowwise().squaredNorm().array() == 0.0).count();
        if (empty > 0)
          std::cerr << "warning: " << empty << " of 9 output patches contain no grid node at n_inner = " << gen_n
                    << "\n";
        const auto sys = prob.system.with_x0(icmor::convdiff_initial_state(gen_mu, cfg));
        icmor::io::save_system(gen_out, sys, "convdiff", {{"training", "X0.mtx"}, {"discretization", icmor::kConvDiffDiscretization}});
        icmor::io::write_dense(fs::path(gen_out) / "X0.mtx", prob.X0);
      } else {
        const auto sc = icmor::beam_load_scenario(gen_beam_dir,
                                                  gen_case == "trained" ? icmor::BeamCase::trained
                                                                        : icmor::BeamCase::not_trained);
        icmor::io::save_system(gen_out, sc.system, "beam", {{"training", "X0.mtx"}});
        icmor::io::write_dense(fs::path(gen_out) / "X0.mtx", sc.X0);
      }
      std::cout << (fs::path(gen_out) / "manifest.ini").string() << "\n";
      return 0;
    }
    if (*reduce) return run_stage(reduce_args, ex::Stage::reduce);
    if (*estimate) {
      if (!offline_dir.empty()) {
        if (x0_file.empty()) throw icmor::Error("cli", "--offline needs --x0-file");
        const auto off = ex::load_offline(offline_dir);
        const auto e = icmor::estimate_delta(off, icmor::io::read_vector(x0_file));
        std::cout << "delta,delta_upper_bound\n"
                  << ex::fmt(e.delta) << "," << (e.upper_bound ? ex::fmt(*e.upper_bound) : "") << "\n";
        return 0;
      }
      return run_stage(estimate_args, ex::Stage::estimate);
    }
    if (*simulate) return run_stage(simulate_args, ex::Stage::simulate);
    if (*run) {
      const auto cfgs = run_args.load();
      if (cfgs.size() == 1) {
        print_summary(ex::run_experiment(cfgs.front(), ex::Stage::full, run_args.quiet ? nullptr : &std::cerr));
        return 0;
      }
      const int failed = ex::run_batch(cfgs, jobs, std::cerr);
      std::cout << cfgs.size() - static_cast<std::size_t>(failed) << " of " << cfgs.size() << " runs succeeded\n";
      return failed ? 1 : 0;
    }
    if (*table) {
      ex::TableOptions opt;
      opt.beam_dir = table_beam;
      opt.mesh_points = table_mesh;
      opt.refine = table_refine;
      opt.log = table_quiet ? nullptr : &std::cerr;
      const auto t = ex::reproduce_table(ex::table_from_string(which), ex::scale_from_string(scale), opt);
      if (table_out.empty()) {
        ex::write_table(std::cout, t);
      } else {
        std::ofstream f(table_out);
        if (!f) throw icmor::Error("cli", "cannot write " + table_out);
        ex::write_table(f, t);
      }
      return 0;
    }
  } catch (const icmor::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

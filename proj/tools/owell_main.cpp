#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "owell/config.hpp"
#include "owell/io.hpp"

using namespace owell;

namespace {

struct CliOptions {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  int slice = -1;
};

RunConfig load_config(const CliOptions& opt) {
  RunConfig cfg = RunConfig::parse_file(opt.config_path);
  if (!opt.out_dir.empty()) cfg.dir = opt.out_dir;
  if (opt.seed) cfg.solver.rng_seed = *opt.seed;
  return cfg;
}

ArtifactWriter make_writer(const RunConfig& cfg) {
  std::string canon = cfg.canonical_text();
  return ArtifactWriter(cfg.dir, fnv1a_hash(canon.data(), canon.size()),
                        cfg.solver.rng_seed);
}

void dump_final_field(ArtifactWriter& w, const RunConfig& cfg, const Field& u,
                      const ProblemSpec& ps, const std::string& stem, int slice) {
  if (!cfg.dump_fields) return;
  for (const auto& fmt : cfg.formats) {
    if (fmt == "csv") {
      dump_field_csv(u, w.path(stem + ".csv"));
      w.note_artifact(stem + ".csv");
    } else if (fmt == "raw") {
      dump_field_raw(u, w.path(stem + ".f64"), w.path(stem + ".f64.json"));
      w.note_artifact(stem + ".f64");
      w.note_artifact(stem + ".f64.json");
    }
  }
  if (ps.grid->dim == 2 || slice >= 0) {
    emit_heatmap(u, ps.potential.well_radius, ps.potential.tilde_radius,
                 w.path(stem + ".pgm"), w.path(stem + ".pgm.json"), slice);
    w.note_artifact(stem + ".pgm");
    w.note_artifact(stem + ".pgm.json");
  }
}

int run_solve(const CliOptions& opt) {
  RunConfig cfg = load_config(opt);
  ProblemSpec ps = cfg.build_problem();
  ArtifactWriter w = make_writer(cfg);
  MountainPassResult mp = mountain_pass(ps, cfg.solver);
  w.write_text("mountain_pass.json", mountain_pass_to_json(mp));
  w.write_text("energy.json", energy_to_json(energy(mp.u, ps)));
  dump_final_field(w, cfg, mp.u, ps, "solution", opt.slice);
  w.write_manifest();
  if (!mp.refined) {
    std::cerr << "solve: unrefined result (residual " << mp.residual_norm << ")\n";
    return 2;
  }
  std::cout << "solve: level " << mp.level << ", residual " << mp.residual_norm
            << "\n";
  return 0;
}

int run_sweep_eps(const CliOptions& opt) {
  RunConfig cfg = load_config(opt);
  ProblemSpec ps = cfg.build_problem();
  ArtifactWriter w = make_writer(cfg);
  SweepReport rep = epsilon_sweep(ps, cfg.eps_schedule(), cfg.solver);
  w.write_text("sweep_eps.json", sweep_to_json(rep, "eps"));
  w.write_text("sweep_eps.csv", sweep_to_csv(rep));
  if (!rep.final_u.empty()) {
    ProblemSpec ps_final = ps.with_eps(cfg.eps_schedule().back());
    dump_final_field(w, cfg, rep.final_u, ps_final, "sweep_eps_final", opt.slice);
  }
  w.write_manifest();
  if (!rep.completed) {
    std::cerr << "sweep-eps: aborted: " << rep.abort_reason << "\n";
    return 2;
  }
  std::cout << "sweep-eps: " << rep.steps.size() << " steps completed\n";
  return 0;
}

int run_sweep_lambda(const CliOptions& opt) {
  RunConfig cfg = load_config(opt);
  ProblemSpec ps = cfg.build_problem();
  ArtifactWriter w = make_writer(cfg);
  SweepReport rep =
      lambda_sweep(ps, cfg.lambda_schedule(), cfg.eps_schedule(), cfg.solver);

  std::optional<double> lambda_star;
  for (const auto& s : rep.steps)
    if (!lambda_star && s.sup_outside_tilde <= s.a_threshold)
      lambda_star = s.param_value;

  std::string j = sweep_to_json(rep, "lambda");
  // append lambda_star to the report
  {
    auto pos = j.rfind('}');
    std::string extra = lambda_star
                            ? ",\n  \"lambda_star\": " + std::to_string(*lambda_star)
                            : ",\n  \"lambda_star\": null";
    j.insert(pos - 1, extra);
  }
  w.write_text("sweep_lambda.json", j);
  w.write_text("sweep_lambda.csv", sweep_to_csv(rep));
  if (!rep.final_u.empty()) {
    ProblemSpec ps_top = ps.with_lambda(cfg.lambda_schedule().back())
                             .with_eps(cfg.eps_schedule().back());
    dump_final_field(w, cfg, rep.final_u, ps_top, "sweep_lambda_final", opt.slice);
  }
  w.write_manifest();
  if (!rep.completed) {
    std::cerr << "sweep-lambda: aborted: " << rep.abort_reason << "\n";
    return 2;
  }
  std::cout << "sweep-lambda: " << rep.steps.size() << " steps";
  if (lambda_star) std::cout << ", lambda* = " << *lambda_star;
  std::cout << "\n";
  return 0;
}

int run_verify(const CliOptions& opt) {
  RunConfig cfg = load_config(opt);
  ProblemSpec ps = cfg.build_problem();
  ArtifactWriter w = make_writer(cfg);
  SweepReport rep = epsilon_sweep(ps, cfg.eps_schedule(), cfg.solver);
  w.write_text("sweep_eps.json", sweep_to_json(rep, "eps"));
  if (!rep.completed) {
    w.write_manifest();
    std::cerr << "verify: sweep aborted: " << rep.abort_reason << "\n";
    return 2;
  }
  ProblemSpec ps_final = ps.with_eps(cfg.eps_schedule().back());
  ViReport vi = vi_verify(rep.final_u, ps_final, 200, cfg.solver.rng_seed + 99);
  TruncationConsistency tc =
      truncation_consistency(rep.final_u, ps_final.trunc, ps_final);
  std::string j = vi_report_to_json(vi);
  {
    auto pos = j.rfind('}');
    std::ostringstream extra;
    extra.precision(17);
    extra << ",\n  \"sup_outside_tilde\": " << tc.sup_outside
          << ",\n  \"truncation_inactive\": " << (tc.ok ? "true" : "false")
          << ",\n  \"moser_ratio\": " << tc.moser_ratio;
    j.insert(pos - 1, extra.str());
  }
  w.write_text("verify.json", j);
  dump_final_field(w, cfg, rep.final_u, ps_final, "verify_final", opt.slice);
  w.write_manifest();
  if (vi.worst_normalized < -1e-6) {
    std::cerr << "verify: variational inequality violated (" << vi.worst_normalized
              << ")\n";
    return 2;
  }
  std::cout << "verify: max violation " << vi.max_violation << " (normalized "
            << vi.worst_normalized << ")\n";
  return 0;
}

int run_geometry(const CliOptions& opt) {
  RunConfig cfg = load_config(opt);
  ProblemSpec ps = cfg.build_problem();
  ArtifactWriter w = make_writer(cfg);
  GeometryReport rep = geometry_check(ps, 50, cfg.solver.rng_seed + 17);
  w.write_text("geometry.json", geometry_to_json(rep));
  w.write_manifest();
  if (!rep.ok) {
    std::cerr << "geometry: violated (min I on sphere " << rep.min_I_on_sphere
              << " < rho " << rep.rho << ")\n";
    return 2;
  }
  std::cout << "geometry: r " << rep.r << ", rho " << rep.rho << ", min I "
            << rep.min_I_on_sphere << "\n";
  return 0;
}

int run_sobolev(const CliOptions& opt) {
  RunConfig cfg = load_config(opt);
  auto grid = GridSpec::make(cfg.dimension, cfg.nodes_per_axis, cfg.half_extent);
  ArtifactWriter w = make_writer(cfg);
  double s = sobolev_estimate(grid);
  std::ostringstream os;
  os.precision(17);
  os << "{\n  \"sobolev_constant\": " << s << ",\n  \"nodes_per_axis\": "
     << cfg.nodes_per_axis << ",\n  \"half_extent\": " << cfg.half_extent
     << "\n}\n";
  w.write_text("sobolev.json", os.str());
  w.write_manifest();
  std::cout << "estimate-sobolev: " << s << "\n";
  return 0;
}

int run_axioms(const CliOptions& opt) {
  RunConfig cfg = load_config(opt);
  ProblemSpec ps = cfg.build_problem();
  ArtifactWriter w = make_writer(cfg);
  PenaltyAxiomsReport rep = penalty_axioms_check(ps, 100, cfg.solver.rng_seed + 7);
  w.write_text("axioms.json", axioms_to_json(rep));
  w.write_manifest();
  if (!rep.all_ok()) {
    std::cerr << "axioms: " << rep.failure << "\n";
    return 2;
  }
  std::cout << "axioms: all four hold (sup |P| = " << rep.p4_sup_norm << ")\n";
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"obstacle-well: penalized variational-inequality solver"};
  app.require_subcommand(1);

  CliOptions opt;
  app.add_option("--config", opt.config_path, "config file path")->required();
  app.add_option("--out", opt.out_dir, "output directory (overrides [output] dir)");
  std::uint64_t seed_val = 0;
  auto* seed_opt = app.add_option("--seed", seed_val, "RNG seed override");
  app.add_option("--slice", opt.slice, "slice index for 3-d heatmaps");

  auto* c_solve = app.add_subcommand("solve", "single mountain-pass solve");
  auto* c_se = app.add_subcommand("sweep-eps", "epsilon continuation");
  auto* c_sl = app.add_subcommand("sweep-lambda", "lambda continuation");
  auto* c_ver = app.add_subcommand("verify", "epsilon sweep + VI verification");
  auto* c_geo = app.add_subcommand("geometry", "mountain-pass geometry check");
  auto* c_sob = app.add_subcommand("estimate-sobolev", "Rayleigh-quotient minimum");
  auto* c_axm = app.add_subcommand("axioms", "penalty operator axioms");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  if (*seed_opt) opt.seed = seed_val;

  try {
    (void)env_thread_cap(); // validate early so bad values fail fast
    if (c_solve->parsed()) return run_solve(opt);
    if (c_se->parsed()) return run_sweep_eps(opt);
    if (c_sl->parsed()) return run_sweep_lambda(opt);
    if (c_ver->parsed()) return run_verify(opt);
    if (c_geo->parsed()) return run_geometry(opt);
    if (c_sob->parsed()) return run_sobolev(opt);
    if (c_axm->parsed()) return run_axioms(opt);
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const SolverFailure& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

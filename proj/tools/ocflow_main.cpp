/// @file ocflow_main.cpp
/// Command-line front end for the optimal-control workflow.
///
///   ocflow mesh     --config c.cfg [--work DIR]
///   ocflow offline  --config c.cfg [--work DIR] [--workers N]
///   ocflow train    --config c.cfg [--work DIR] [--workers N]
///   ocflow online   --config c.cfg --mu RE[,RE2] [--work DIR] [--extrapolate]
///   ocflow compare  --config c.cfg --mu RE[,RE2] [--work DIR] [--uncontrolled]
///   ocflow wss      --config c.cfg --mu RE[,RE2] [--work DIR] [--uncontrolled]
///
/// Exit codes: 0 success, 1 unexpected failure, 2 invalid input or
/// configuration, 3 missing prerequisite artifacts, 4 damaged or stale
/// artifacts.

#include "ocflow/core/io.hpp"
#include "ocflow/geometry/meshio.hpp"
#include "ocflow/pipeline/pipeline.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace {

using ocflow::Vec;

Vec parse_mu(const std::vector<double>& values) {
  Vec mu(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i)
    mu[static_cast<Eigen::Index>(i)] = values[i];
  return mu;
}

int resolve_workers(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

void print_error_summary(const ocflow::post::ErrorReport& errors) {
  std::printf("  velocity  rel time-avg %.6e\n", errors.v.rel_time_avg);
  std::printf("  pressure  rel time-avg %.6e\n", errors.p.rel_time_avg);
  std::printf("  control   rel time-avg %.6e\n", errors.u.rel_time_avg);
  std::printf("  adjoint v rel time-avg %.6e\n", errors.w.rel_time_avg);
  std::printf("  adjoint p rel time-avg %.6e\n", errors.q.rel_time_avg);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parametrized optimal flow control: full-order training "
               "sweeps, nested model reduction, and fast online solves"};
  app.require_subcommand(1);

  std::string config_path;
  std::string work = "work";
  int workers = 0;
  std::vector<double> mu_values;
  bool extrapolate = false;
  bool uncontrolled = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "configuration file")
        ->required();
    sub->add_option("--work", work, "work directory (default: work)");
  };
  auto add_mu = [&](CLI::App* sub) {
    sub->add_option("--mu", mu_values,
                    "inlet Reynolds number(s), comma separated")
        ->required()
        ->delimiter(',');
  };

  CLI::App* c_mesh = app.add_subcommand(
      "mesh", "build the scenario mesh and write it to the work directory");
  add_common(c_mesh);

  CLI::App* c_offline = app.add_subcommand(
      "offline", "solve the coupled optimality system for every training "
                 "parameter (resumable)");
  add_common(c_offline);
  c_offline->add_option("--workers", workers,
                        "parallel solves (0 = all cores)");

  CLI::App* c_train = app.add_subcommand(
      "train", "compress the snapshot store and project the reduced "
               "operators");
  add_common(c_train);
  c_train->add_option("--workers", workers,
                      "parallel compression (0 = all cores)");

  CLI::App* c_online = app.add_subcommand(
      "online", "fast reduced solve at a new parameter");
  add_common(c_online);
  add_mu(c_online);
  c_online->add_flag("--extrapolate", extrapolate,
                     "allow parameters outside the training range");

  CLI::App* c_compare = app.add_subcommand(
      "compare", "reduced-vs-full (or uncontrolled-vs-controlled) error "
                 "report at one parameter");
  add_common(c_compare);
  add_mu(c_compare);
  c_compare->add_flag("--uncontrolled", uncontrolled,
                      "compare the uncontrolled flow against the controlled "
                      "state instead");

  CLI::App* c_wss = app.add_subcommand(
      "wss", "wall shear stress and mirror asymmetry along a trajectory");
  add_common(c_wss);
  add_mu(c_wss);
  c_wss->add_flag("--uncontrolled", uncontrolled,
                  "use the uncontrolled flow instead of the controlled "
                  "state");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const ocflow::scen::ScenarioConfig cfg =
        ocflow::scen::load_config(config_path);
    const ocflow::pipe::Paths paths = ocflow::pipe::make_paths(work);

    if (c_mesh->parsed()) {
      ocflow::pipe::FullOrderSetup setup = ocflow::pipe::build_setup(cfg);
      ocflow::io::ensure_dir(paths.work);
      ocflow::geom::save_mesh(paths.mesh_file, *setup.mesh);
      std::printf("mesh written to %s\n", paths.mesh_file.c_str());
      std::printf("  vertices        %zu\n", setup.mesh->vertices.size());
      std::printf("  cells           %zu\n", setup.mesh->cells.size());
      std::printf("  boundary facets %zu\n", setup.mesh->facets.size());
      std::printf("  velocity dofs   %d\n", setup.vs.n_vel());
      std::printf("  pressure dofs   %d\n", setup.vs.n_pr());
      std::printf("  control dofs    %d\n", setup.vs.n_ctrl());
      std::printf("  coupled dofs    %d\n", setup.vs.n_oneshot());
    } else if (c_offline->parsed()) {
      const ocflow::pipe::OfflineResult res =
          ocflow::pipe::run_offline(cfg, paths, resolve_workers(workers));
      for (const ocflow::pipe::MuRunRecord& r : res.runs)
        std::printf("mu %-12s %-7s %8.2f s  %4d Newton iterations\n",
                    r.key.c_str(),
                    r.skipped ? "skipped" : r.resumed ? "resumed" : "solved",
                    r.wall_s, r.newton_iters);
      std::printf("offline sweep finished in %.2f s (%zu parameters)\n",
                  res.wall_s, res.runs.size());
    } else if (c_train->parsed()) {
      const ocflow::pipe::TrainResult res =
          ocflow::pipe::run_train(cfg, paths, resolve_workers(workers));
      for (const ocflow::rom::FamilyResult& fam : res.families)
        std::printf("family %-2s stacked %4d -> kept %3d\n",
                    fam.name.c_str(), fam.stacked_columns,
                    static_cast<int>(fam.parametric.z.cols()));
      std::printf("basis sizes: state %d+%d  adjoint %d+%d  pressure %d/%d  "
                  "control %d\n",
                  static_cast<int>(res.basis.z_vs.cols()),
                  static_cast<int>(res.basis.lift.cols()),
                  static_cast<int>(res.basis.z_wr.cols()),
                  static_cast<int>(res.basis.lift.cols()),
                  static_cast<int>(res.basis.z_p.cols()),
                  static_cast<int>(res.basis.z_q.cols()),
                  static_cast<int>(res.basis.z_u.cols()));
      std::printf("reduced pressure stability: state %.3e  adjoint %.3e\n",
                  res.infsup_state, res.infsup_adjoint);
      std::printf("training finished in %.2f s\n", res.wall_s);
    } else if (c_online->parsed()) {
      const ocflow::pipe::OnlineResult res = ocflow::pipe::run_online(
          cfg, paths, parse_mu(mu_values), extrapolate);
      std::printf("reduced solve: %d steps in %.4f s (total %.4f s)\n",
                  cfg.n_steps(), res.solve_wall_s, res.total_wall_s);
      std::printf("cost: total %.6e  tracking %.6e  penalty %.6e\n",
                  res.cost.total, res.cost.tracking, res.cost.penalty);
    } else if (c_compare->parsed()) {
      const Vec mu = parse_mu(mu_values);
      const ocflow::pipe::CompareResult res =
          uncontrolled
              ? ocflow::pipe::run_uncontrolled_compare(cfg, paths, mu)
              : ocflow::pipe::run_compare(cfg, paths, mu);
      std::printf("%s\n", uncontrolled
                              ? "uncontrolled flow vs controlled state:"
                              : "reduced solution vs full-order solution:");
      print_error_summary(res.errors);
      std::printf("  cost: candidate %.6e  reference %.6e\n",
                  res.cost_candidate.total, res.cost_reference.total);
      if (uncontrolled)
        std::printf("  solve time: uncontrolled %.2f s, controlled %s\n",
                    res.rom_solve_s,
                    res.fom_from_store
                        ? "from store"
                        : (std::to_string(res.fom_solve_s) + " s").c_str());
      else
        std::printf("  solve time: reduced %.4f s, full-order %s  "
                    "(speed-up %.1fx)\n",
                    res.rom_solve_s,
                    res.fom_from_store
                        ? "from store"
                        : (std::to_string(res.fom_solve_s) + " s").c_str(),
                    res.fom_from_store || res.rom_solve_s <= 0.0
                        ? 0.0
                        : res.fom_solve_s / res.rom_solve_s);
    } else if (c_wss->parsed()) {
      const ocflow::pipe::WssResult res = ocflow::pipe::run_wss(
          cfg, paths, parse_mu(mu_values), uncontrolled);
      std::printf("wall shear stress on %zu wall facets (%s flow)\n",
                  res.final_wss.size(),
                  uncontrolled ? "uncontrolled" : "controlled");
      std::printf("  mean mirror asymmetry (t > 0): %.6e\n",
                  res.mean_asymmetry);
      std::printf("  final-time mirror asymmetry:   %.6e\n",
                  res.asymmetry.empty() ? 0.0 : res.asymmetry.back());
    }
    return 0;
  } catch (const ocflow::IncompleteError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const ocflow::IntegrityError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  } catch (const ocflow::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "unexpected error: %s\n", e.what());
    return 1;
  }
}

#include "stepmap/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "stepmap/csv.hpp"
#include "stepmap/lipm.hpp"
#include "stepmap/manifest.hpp"
#include "stepmap/maps.hpp"
#include "stepmap/param_grid.hpp"
#include "stepmap/render.hpp"
#include "stepmap/rng.hpp"
#include "stepmap/selector.hpp"
#include "stepmap/svm.hpp"
#include "stepmap/workers.hpp"

namespace stepmap {

namespace {

namespace fs = std::filesystem;

// Distinct stream tags for seed derivation, so no two consumers of the master
// seed share a generator.
constexpr uint64_t kSeedValidateReach = 0x7ea11u;
constexpr uint64_t kSeedValidateStep = 0x57e9u;

bool is_early(const EpisodeOutcome& o, double t_total) { return o.t_term < t_total - 1e-9; }

int status_code(Termination t) {
  switch (t) {
    case Termination::Running: return 0;
    case Termination::Success: return 1;
    case Termination::FellVelocity: return 2;
    case Termination::FellHeight: return 3;
    case Termination::TimeoutUnsettled: return 4;
  }
  return -1;
}

// Loads the manifest beside the artifacts, or starts a fresh one. A config
// hash mismatch is reported but tolerated; the per-file hash checks are the
// actual tamper defence.
RunManifest open_manifest(const PipelineConfig& config, std::ostream& log) {
  const fs::path path = fs::path(config.out_dir) / artifacts::kManifest;
  if (fs::exists(path)) {
    RunManifest m = RunManifest::load(path);
    if (m.config_hash != config.hash())
      log << "note: configuration differs from the one recorded in " << path.string() << "\n";
    return m;
  }
  RunManifest m;
  m.config_hash = config.hash();
  return m;
}

// Verifies an input artifact against the manifest before compute starts.
void verify_input(const RunManifest& manifest, const PipelineConfig& config,
                  const std::string& rel) {
  const fs::path file = fs::path(config.out_dir) / rel;
  if (!fs::exists(file)) throw std::runtime_error("missing input artifact " + file.string());
  if (manifest.has_file(rel)) manifest.verify_file(config.out_dir, rel);
}

EvalResult grid_objective(const EpisodeConfig& episode, const InitialCondition& ic,
                          const GaitParams& p) {
  const EpisodeOutcome out = run_episode(ic, p, episode);
  return EvalResult{objective(out, ic, episode.weights, episode.biped.t_total,
                              episode.biped.z_nom),
                    is_early(out, episode.biped.t_total)};
}

ParamGrid load_grid_checked(const PipelineConfig& config, const RunManifest& manifest) {
  verify_input(manifest, config, artifacts::kParamGrid);
  ParamGrid grid = read_param_grid_csv(fs::path(config.out_dir) / artifacts::kParamGrid);
  const std::vector<double> want_v = config.phase1_velocity.values();
  const std::vector<double> want_p = config.phase1_position.values();
  if (grid.velocities != want_v || grid.positions != want_p)
    throw std::invalid_argument(
        "param_grid.csv axes do not match the configured phase-1 axes");
  for (size_t i = 0; i < grid.best_j.size(); ++i) {
    if (!std::isfinite(grid.best_j[i]))
      throw std::invalid_argument("param_grid.csv contains failed nodes (best_J is not finite)");
    if (!config.bounds.contains(grid.params[i], 1e-12))
      throw std::invalid_argument("param_grid.csv contains out-of-bounds parameters");
  }
  return grid;
}

std::pair<ReachMap, TorqueMap> load_maps_checked(const PipelineConfig& config,
                                                 const RunManifest& manifest) {
  verify_input(manifest, config, artifacts::kMaps);
  auto maps = read_maps_csv(fs::path(config.out_dir) / artifacts::kMaps);
  const std::vector<double> want_v = config.phase2_velocity.values();
  const std::vector<double> want_p = config.phase2_position.values();
  if (maps.first.velocities != want_v || maps.first.positions != want_p)
    throw std::invalid_argument("maps.csv axes do not match the configured phase-2 axes");
  return maps;
}

// Per-column torque argmin indices for star markers; -1 for empty columns.
std::vector<int> argmin_stars(const TorqueMap& tmap) {
  const int nv = static_cast<int>(tmap.velocities.size());
  const int np = static_cast<int>(tmap.positions.size());
  std::vector<int> stars(static_cast<size_t>(nv), -1);
  for (int iv = 0; iv < nv; ++iv) {
    double best = std::numeric_limits<double>::infinity();
    for (int jp = 0; jp < np; ++jp) {
      const int i = tmap.index(iv, jp);
      if (tmap.present[static_cast<size_t>(i)] && tmap.j_tau[static_cast<size_t>(i)] < best) {
        best = tmap.j_tau[static_cast<size_t>(i)];
        stars[static_cast<size_t>(iv)] = jp;
      }
    }
  }
  return stars;
}

double node_swing_time(const GaitParams& p, double s_des) {
  return p.t_swing_start + s_des / p.s_speed;
}

void print_stats(std::ostream& log, const char* label, const ResidualStats& st,
                 const char* unit) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s: mean=%.6g %s (StD=%.6g, min=%.6g, max=%.6g)", label,
                st.mean, unit, st.stddev, st.min, st.max);
  log << buf << "\n";
}

}  // namespace

int cmd_optimize(const PipelineConfig& config, std::ostream& log) {
  config.validate();
  fs::create_directories(config.out_dir);
  config.save(fs::path(config.out_dir) / artifacts::kConfig);

  const std::vector<double> velocities = config.phase1_velocity.values();
  const std::vector<double> positions = config.phase1_position.values();
  const EpisodeConfig episode = config.episode;

  std::vector<NodeReport> reports;
  std::vector<std::vector<BoStep>> traces;
  std::vector<int> failed;
  const ParamGrid grid = build_param_grid(
      velocities, positions, config.seeded_budget(), config.bounds,
      [&](const InitialCondition& ic, const GaitParams& p) {
        return grid_objective(episode, ic, p);
      },
      config.workers, &reports, &traces, &failed);

  write_param_grid_csv(fs::path(config.out_dir) / artifacts::kParamGrid, grid);

  std::vector<std::vector<double>> trace_rows;
  for (size_t node = 0; node < traces.size(); ++node) {
    const NodeReport& r = reports[node];
    for (const BoStep& s : traces[node])
      trace_rows.push_back({static_cast<double>(r.iv), static_cast<double>(r.jp), r.xdot0,
                            r.s_des, static_cast<double>(s.iteration),
                            s.random_phase ? 1.0 : 0.0, s.params.t_min, s.params.s_max,
                            s.params.t_swing_start, s.params.s_speed, s.objective_value,
                            s.incumbent});
  }
  write_csv(fs::path(config.out_dir) / artifacts::kBoTrace,
            {"iv", "jp", "xdot0", "s_des", "iteration", "random_phase", "t_min", "s_max",
             "t_swing_start", "s_speed", "J", "incumbent_J"},
            trace_rows);

  std::vector<std::vector<double>> timing_rows;
  std::vector<double> node_wall_ms;
  for (const NodeReport& r : reports) {
    timing_rows.push_back({r.xdot0, r.s_des, r.best_j, r.wall_ms,
                           static_cast<double>(r.early_terminations)});
    node_wall_ms.push_back(r.wall_ms);
  }
  write_csv(fs::path(config.out_dir) / artifacts::kTimings,
            {"xdot0", "s_des", "best_J", "wall_ms", "early_terminations"}, timing_rows);

  std::vector<std::vector<double>> swing_rows;
  for (size_t iv = 0; iv < grid.velocities.size(); ++iv)
    for (size_t jp = 0; jp < grid.positions.size(); ++jp) {
      const GaitParams& p = grid.at(static_cast<int>(iv), static_cast<int>(jp));
      swing_rows.push_back({grid.velocities[iv], grid.positions[jp],
                            node_swing_time(p, grid.positions[jp])});
    }
  write_csv(fs::path(config.out_dir) / artifacts::kSwingTime, {"xdot0", "s_des", "t_sw"},
            swing_rows);

  RunManifest manifest = open_manifest(config, log);
  manifest.config_hash = config.hash();
  ManifestPhase phase;
  phase.seed = config.seed;
  phase.node_wall_ms = node_wall_ms;
  phase.failed_nodes = failed;
  manifest.phases["optimize"] = phase;
  for (const char* rel : {artifacts::kConfig, artifacts::kParamGrid, artifacts::kBoTrace,
                          artifacts::kTimings, artifacts::kSwingTime})
    manifest.record_file("optimize", config.out_dir, rel);
  manifest.save(fs::path(config.out_dir) / artifacts::kManifest);

  log << "optimized " << grid.params.size() << " nodes (" << grid.velocities.size() << "x"
      << grid.positions.size() << ")";
  if (!failed.empty()) {
    log << "; " << failed.size() << " nodes FAILED:";
    for (int node : failed) log << " " << node;
    log << "\n";
    return kExitPartialFailure;
  }
  log << "\n";
  return kExitSuccess;
}

int cmd_map(const PipelineConfig& config, std::ostream& log) {
  config.validate();
  RunManifest manifest = open_manifest(config, log);
  const ParamGrid grid = load_grid_checked(config, manifest);

  const EpisodeConfig episode = config.episode;
  const auto [rmap, tmap] = build_dense_maps(
      grid, config.phase2_velocity.values(), config.phase2_position.values(),
      [&](const InitialCondition& ic, const GaitParams& p) {
        const EpisodeOutcome out = run_episode(ic, p, episode);
        return MapCellResult{out.status == Termination::Success, out.j_tau,
                             is_early(out, episode.biped.t_total)};
      },
      config.workers);

  write_maps_csv(fs::path(config.out_dir) / artifacts::kMaps, rmap, tmap);

  ManifestPhase phase;
  phase.seed = config.seed;
  manifest.phases["map"] = phase;
  manifest.record_file("map", config.out_dir, artifacts::kMaps);
  manifest.save(fs::path(config.out_dir) / artifacts::kManifest);

  int reachable = 0;
  for (uint8_t r : rmap.reachable) reachable += r;
  log << "mapped " << rmap.reachable.size() << " cells (" << rmap.velocities.size() << "x"
      << rmap.positions.size() << "), " << reachable << " reachable\n";
  return kExitSuccess;
}

int cmd_fit(const PipelineConfig& config, std::ostream& log) {
  config.validate();
  RunManifest manifest = open_manifest(config, log);
  const auto [rmap, tmap] = load_maps_checked(config, manifest);

  const SafeRegionModel safe = train_safe_region(rmap, config.svm);
  const StepSelector sel = fit_step_selector(tmap);

  save_safe_region(fs::path(config.out_dir) / artifacts::kSafeRegion, safe);
  save_step_selector(fs::path(config.out_dir) / artifacts::kSelector, sel);

  ManifestPhase phase;
  phase.seed = config.seed;
  manifest.phases["fit"] = phase;
  manifest.record_file("fit", config.out_dir, artifacts::kSafeRegion);
  manifest.record_file("fit", config.out_dir, artifacts::kSelector);
  manifest.save(fs::path(config.out_dir) / artifacts::kManifest);

  log << "safe region: " << safe.support_x.size() << " support vectors, gamma=" << safe.gamma
      << "\n";
  print_stats(log, "step selector fit residual", sel.residuals, "m");
  return kExitSuccess;
}

int cmd_query(const PipelineConfig& config, double xdot0, std::ostream& log) {
  config.validate();
  RunManifest manifest = open_manifest(config, log);
  verify_input(manifest, config, artifacts::kSelector);
  const StepSelector sel = load_step_selector(fs::path(config.out_dir) / artifacts::kSelector);
  const ParamGrid grid = load_grid_checked(config, manifest);

  if (xdot0 < sel.velocity_range[0] || xdot0 > sel.velocity_range[1]) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "velocity %.17g outside the valid range [%.17g, %.17g]",
                  xdot0, sel.velocity_range[0], sel.velocity_range[1]);
    throw std::out_of_range(buf);
  }
  const double s_des = select_step(sel, xdot0);
  const GaitParams p = query_params(grid, {xdot0, s_des});

  char buf[256];
  std::snprintf(buf, sizeof buf,
                "s_des* = %.17g\np* = {t_min=%.17g, s_max=%.17g, t_swing_start=%.17g, "
                "s_speed=%.17g}",
                s_des, p.t_min, p.s_max, p.t_swing_start, p.s_speed);
  log << buf << "\n";
  return kExitSuccess;
}

int cmd_validate(const PipelineConfig& config, const ValidateOptions& options,
                 std::ostream& log) {
  config.validate();
  if (options.n < 1) throw std::invalid_argument("validate: n must be >= 1");
  const bool reach_mode = options.mode == "reach";
  if (!reach_mode && options.mode != "step-select")
    return kExitUsage;  // unknown mode is a usage error

  RunManifest manifest = open_manifest(config, log);
  const ParamGrid grid = load_grid_checked(config, manifest);
  verify_input(manifest, config, artifacts::kSelector);
  const StepSelector sel = load_step_selector(fs::path(config.out_dir) / artifacts::kSelector);

  verify_input(manifest, config, artifacts::kSafeRegion);
  const SafeRegionModel safe =
      load_safe_region(fs::path(config.out_dir) / artifacts::kSafeRegion);

  const EpisodeConfig episode = config.episode;
  const int n = options.n;
  std::vector<InitialCondition> trials(static_cast<size_t>(n));

  if (reach_mode) {
    // Seeded-uniform pairs inside the SVM-safe region via per-trial rejection.
    for (int i = 0; i < n; ++i) {
      Rng rng(derive_seed(config.seed, kSeedValidateReach, static_cast<uint64_t>(i)));
      bool placed = false;
      for (int attempt = 0; attempt < 100000; ++attempt) {
        const InitialCondition ic{
            safe.velocity_range[0] +
                (safe.velocity_range[1] - safe.velocity_range[0]) * rng.uniform(),
            safe.position_range[0] +
                (safe.position_range[1] - safe.position_range[0]) * rng.uniform()};
        if (safe.classify(ic)) {
          trials[static_cast<size_t>(i)] = ic;
          placed = true;
          break;
        }
      }
      if (!placed)
        throw std::runtime_error("validate: could not sample inside the safe region");
    }
  } else {
    // Seeded velocities in the safe range: the selected pair (v, K(v)) must
    // lie inside the trimmed safe region, mirroring the reach-mode sampler.
    for (int i = 0; i < n; ++i) {
      Rng rng(derive_seed(config.seed, kSeedValidateStep, static_cast<uint64_t>(i)));
      bool placed = false;
      for (int attempt = 0; attempt < 100000; ++attempt) {
        const double v = sel.velocity_range[0] +
                         (sel.velocity_range[1] - sel.velocity_range[0]) * rng.uniform();
        const InitialCondition ic{v, select_step(sel, v)};
        if (safe.classify(ic)) {
          trials[static_cast<size_t>(i)] = ic;
          placed = true;
          break;
        }
      }
      if (!placed)
        throw std::runtime_error("validate: could not sample inside the safe region");
    }
  }

  std::vector<EpisodeOutcome> outcomes(static_cast<size_t>(n));
  run_jobs_or_throw(n, config.workers, [&](int i) {
    const InitialCondition& ic = trials[static_cast<size_t>(i)];
    outcomes[static_cast<size_t>(i)] = run_episode(ic, query_params(grid, ic), episode);
  });

  int successes = 0;
  std::vector<std::vector<double>> rows;
  rows.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const InitialCondition& ic = trials[static_cast<size_t>(i)];
    const EpisodeOutcome& out = outcomes[static_cast<size_t>(i)];
    const bool ok = out.status == Termination::Success;
    successes += ok ? 1 : 0;
    rows.push_back({ic.xdot0, ic.s_des, ok ? 1.0 : 0.0,
                    static_cast<double>(status_code(out.status)), out.t_td, out.s_td, out.x_f,
                    out.z_f});
  }
  const std::string rel =
      reach_mode ? std::string("validate_reach.csv") : std::string("validate_step_select.csv");
  write_csv(fs::path(config.out_dir) / rel,
            {"xdot0", "s_des", "success", "status", "t_td", "s_td", "x_f", "z_f"}, rows);

  const std::string phase_name = reach_mode ? "validate-reach" : "validate-step-select";
  ManifestPhase phase;
  phase.seed = config.seed;
  manifest.phases[phase_name] = phase;
  manifest.record_file(phase_name, config.out_dir, rel);
  manifest.save(fs::path(config.out_dir) / artifacts::kManifest);

  char buf[128];
  std::snprintf(buf, sizeof buf, "%s validation: %d/%d successful (fraction %.4f)",
                options.mode.c_str(), successes, n, static_cast<double>(successes) / n);
  log << buf << "\n";
  return kExitSuccess;
}

int cmd_render(const PipelineConfig& config, const RenderOptions& options, std::ostream& log) {
  config.validate();
  RunManifest manifest = open_manifest(config, log);

  Heatmap map;
  map.x_label = "xdot0 [m/s]";
  map.y_label = "s_des [m]";
  std::string stem;

  if (options.what == "reach" || options.what == "torque" || options.what == "near-opt") {
    const auto [rmap, tmap] = load_maps_checked(config, manifest);
    map.x_axis = rmap.velocities;
    map.y_axis = rmap.positions;
    if (options.what == "reach") {
      stem = "reach_map";
      map.title = "Reachability";
      map.binary = true;
      map.value.assign(rmap.reachable.begin(), rmap.reachable.end());
    } else {
      map.title = "Swing torque integral [N^2 m^2 s]";
      map.value = tmap.j_tau;
      map.present.assign(tmap.present.begin(), tmap.present.end());
      map.star_y = argmin_stars(tmap);
      if (options.what == "near-opt") {
        if (!(options.delta >= 0.0))
          throw std::invalid_argument("render: near-opt delta must be >= 0");
        char suffix[32];
        std::snprintf(suffix, sizeof suffix, "%g", options.delta);
        stem = std::string("near_opt_d") + suffix;
        map.overlay = near_optimal_regions(tmap, options.delta);
        map.title += " (near-optimal overlay)";
      } else {
        stem = "torque_map";
      }
    }
  } else if (options.what == "safe-region") {
    verify_input(manifest, config, artifacts::kSafeRegion);
    const SafeRegionModel safe =
        load_safe_region(fs::path(config.out_dir) / artifacts::kSafeRegion);
    stem = "safe_region";
    map.title = "SVM safe region (4x resolution)";
    map.binary = true;
    map.x_axis = linspace(safe.velocity_range[0], safe.velocity_range[1],
                          4 * config.phase2_velocity.count);
    map.y_axis = linspace(safe.position_range[0], safe.position_range[1],
                          4 * config.phase2_position.count);
    map.value.resize(map.x_axis.size() * map.y_axis.size());
    for (size_t ix = 0; ix < map.x_axis.size(); ++ix)
      for (size_t iy = 0; iy < map.y_axis.size(); ++iy)
        map.value[ix * map.y_axis.size() + iy] =
            safe.classify({map.x_axis[ix], map.y_axis[iy]}) ? 1.0 : 0.0;
  } else if (options.what == "swing-time") {
    const ParamGrid grid = load_grid_checked(config, manifest);
    stem = "swing_time";
    map.title = "Swing time [s]";
    map.x_axis = grid.velocities;
    map.y_axis = grid.positions;
    map.value.resize(grid.params.size());
    for (size_t iv = 0; iv < grid.velocities.size(); ++iv)
      for (size_t jp = 0; jp < grid.positions.size(); ++jp)
        map.value[iv * grid.positions.size() + jp] = node_swing_time(
            grid.at(static_cast<int>(iv), static_cast<int>(jp)), grid.positions[jp]);
  } else {
    log << "render: unknown --what '" << options.what << "'\n";
    return kExitUsage;
  }

  const std::string svg_rel = stem + ".svg";
  const std::string ppm_rel = stem + ".ppm";
  render_heatmap(fs::path(config.out_dir) / svg_rel, fs::path(config.out_dir) / ppm_rel, map);

  manifest.phases["render"].seed = config.seed;
  manifest.record_file("render", config.out_dir, svg_rel);
  manifest.record_file("render", config.out_dir, ppm_rel);
  manifest.save(fs::path(config.out_dir) / artifacts::kManifest);

  log << "rendered " << svg_rel << " and " << ppm_rel << "\n";
  return kExitSuccess;
}

int cmd_lipm_compare(const PipelineConfig& config, std::ostream& log) {
  config.validate();
  RunManifest manifest = open_manifest(config, log);
  const ParamGrid grid = load_grid_checked(config, manifest);
  const auto [rmap, tmap] = load_maps_checked(config, manifest);
  verify_input(manifest, config, artifacts::kSelector);
  const StepSelector sel = load_step_selector(fs::path(config.out_dir) / artifacts::kSelector);

  const LipmComparison cmp =
      compare_lipm(tmap, sel, grid, config.episode.biped.z_nom, config.episode.biped.gravity);

  std::vector<std::vector<double>> rows;
  rows.reserve(cmp.rows.size());
  for (const LipmRow& r : cmp.rows)
    rows.push_back({r.xdot0, r.s_opt, r.s_lipm, r.t_sw, static_cast<double>(r.status), r.j_opt,
                    r.j_lipm, r.abs_err});
  write_csv(fs::path(config.out_dir) / artifacts::kLipmCompare,
            {"xdot0", "s_opt", "s_lipm", "t_sw", "status", "j_opt", "j_lipm", "abs_err"}, rows);

  manifest.phases["lipm-compare"].seed = config.seed;
  manifest.record_file("lipm-compare", config.out_dir, artifacts::kLipmCompare);
  manifest.save(fs::path(config.out_dir) / artifacts::kManifest);

  print_stats(log, "LIPM torque error", cmp.error, "N^2 m^2 s");
  log << cmp.n_compared << " velocities compared, " << cmp.n_unreachable
      << " predictions beyond the reachable area, " << cmp.n_out_of_bounds
      << " outside the position axis\n";
  return kExitSuccess;
}

}  // namespace stepmap

/*
 * Copyright 2026 The spadsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "spadsim/config.hpp"
#include "spadsim/constants.hpp"
#include "spadsim/crb_imager.hpp"
#include "spadsim/error.hpp"
#include "spadsim/estimation.hpp"
#include "spadsim/fisher.hpp"
#include "spadsim/likelihood.hpp"
#include "spadsim/radiometry.hpp"
#include "spadsim/scene_io.hpp"
#include "spadsim/spad_sampler.hpp"

namespace fs = std::filesystem;
using namespace spadsim;

namespace {

enum Exit { kOk = 0, kConfig = 2, kIo = 3, kNonConvergence = 4 };

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

nlohmann::json finite_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

// --- fisher -----------------------------------------------------------

struct FisherArgs {
  std::string config;
  std::optional<double> range;
  std::optional<double> reflectivity;
  std::string json;
};

int run_fisher(const FisherArgs& a) {
  SystemConfig cfg = load_config(a.config);
  TargetPatch target = cfg.target.value_or(TargetPatch{});
  if (a.range) target.range = *a.range;
  if (a.reflectivity) target.reflectivity = *a.reflectivity;
  if (!cfg.target && !(a.range && a.reflectivity)) {
    throw ConfigError("target", "no [target] section; pass --range and --reflectivity");
  }
  cfg.target = target;
  cfg.validate();

  const LikelihoodModel m =
      make_likelihood(cfg.laser, cfg.atmosphere, cfg.optics, cfg.sensor, target);
  const Alpha alpha = total_alpha(m, cfg.tolerances.edge_sigma_guard);
  const Sbnr ratio = sbnr(cfg.laser, cfg.atmosphere, cfg.optics, target);
  const FisherResult f = fisher_per_pulse(m, cfg.fisher_options());
  const CrbBound bound = crb_sigma_star(f.info_per_pulse, alpha.value, cfg.acquisition());
  const double dist = bound.estimable() ? min_distinguishability(bound.value) : bound.value;

  std::cout << "P_pp            " << num(m.signal_ppp) << "\n"
            << "C_bckg          " << num(m.background_rate) << " Hz\n"
            << "alpha           " << num(alpha.value) << (alpha.near_edge ? "  (near window edge)" : "")
            << "\n"
            << "SbNR            " << (ratio.infinite ? std::string("inf (no background)") : num(ratio.value))
            << "\n"
            << "F               " << num(f.info_per_pulse) << " s^-2\n";
  if (bound.estimable()) {
    std::cout << "sigma*          " << num(bound.value) << " s (" << num(time_to_depth(bound.value))
              << " m)\n"
              << "distinguishable " << num(dist) << " s (" << num(time_to_depth(dist)) << " m)\n";
  } else {
    std::cout << "sigma*          not estimable\n"
              << "distinguishable not estimable\n";
  }

  if (!a.json.empty()) {
    nlohmann::json j{{"P_pp", m.signal_ppp},
                     {"C_bckg_hz", m.background_rate},
                     {"alpha", alpha.value},
                     {"alpha_near_edge", alpha.near_edge},
                     {"sbnr", finite_or_null(ratio.value)},
                     {"fisher_per_pulse", f.info_per_pulse},
                     {"fisher_abs_error", f.abs_error},
                     {"estimable", bound.estimable()},
                     {"sigma_star_s", finite_or_null(bound.value)},
                     {"distinguishability_s", finite_or_null(dist)},
                     {"distinguishability_m", finite_or_null(time_to_depth(dist))},
                     {"frames", cfg.frames},
                     {"config_digest", config_digest(cfg)}};
    write_text(a.json, j.dump(2) + "\n");
  }
  return kOk;
}

// --- sim --------------------------------------------------------------

struct SimArgs {
  std::string config;
  std::string depth;
  std::string reflectivity;
  bool target = false;
  std::string mode = "crb";
  std::size_t images = 1;
  std::string format = "csv";
  std::string out = ".";
  int threads = 1;
  std::optional<long> frames;
  bool refine = false;
};

void report_status(const DepthImage& img) {
  std::map<PixelStatus, std::size_t> counts;
  for (PixelStatus s : img.status.values()) ++counts[s];
  for (const auto& [s, n] : counts) std::cerr << "  " << to_string(s) << ": " << n << "\n";
}

int run_sim(const SimArgs& a) {
  const SystemConfig cfg = load_config(a.config);
  cfg.validate();
  const GridFormat format = parse_grid_format(a.format);
  AcquisitionSpec acq = cfg.acquisition();
  if (a.frames) acq.frames = *a.frames;

  Scene scene;
  if (a.target) {
    ResolutionTargetSpec spec;
    spec.rows = static_cast<std::size_t>(cfg.sensor.rows);
    spec.cols = static_cast<std::size_t>(cfg.sensor.cols);
    scene = make_resolution_target(spec).scene;
  } else {
    if (a.depth.empty() || a.reflectivity.empty()) {
      throw ConfigError("scene", "pass --depth and --reflectivity, or --resolution-target");
    }
    scene = load_scene(a.depth, a.reflectivity);
  }
  fs::create_directories(a.out);
  const std::string ext = format == GridFormat::kCsv ? ".csv" : ".grd";

  if (a.mode == "crb") {
    std::size_t k = 0;
    simulate_crb_batch(scene, cfg, acq, a.images, cfg.seed, [&](DepthImage&& img) {
      char name[32];
      std::snprintf(name, sizeof name, "depth_%05zu", k++);
      save_depth_image(img, fs::path(a.out) / (name + ext), format);
      if (k == 1) {
        std::cerr << "pixel status:\n";
        report_status(img);
      }
    }, a.threads);
    std::cerr << "wrote " << a.images << " crb images to " << a.out << "\n";
  } else if (a.mode == "histogram") {
    MatchFilterSpec filter = default_match_filter(cfg);
    if (a.refine) filter.refinement = Refinement::kParabolic;
    for (std::size_t k = 0; k < a.images; ++k) {
      const HistogramCube cube =
          simulate_histogram_cube(scene, cfg, acq, cfg.seed + k, a.threads);
      DepthImage img = depth_image_from_cube(cube, filter);
      img.provenance.image_index = k;
      char name[32];
      std::snprintf(name, sizeof name, "%05zu", k);
      save_histogram_cube(cube, fs::path(a.out) / ("cube_" + std::string(name) + ".bin"));
      save_depth_image(img, fs::path(a.out) / ("depth_" + std::string(name) + ext), format);
      std::cerr << "image " << k << " pixel status:\n";
      report_status(img);
    }
  } else {
    throw ConfigError("mode", "expected crb or histogram, got '" + a.mode + "'");
  }
  return kOk;
}

// --- sweep ------------------------------------------------------------

struct SweepArgs {
  std::string config;
  long frames_max = 1000;
  long increments = 100;
  long repeats = 100;
  std::string out;
  int threads = 1;
  bool refine = false;
};

int run_sweep(const SweepArgs& a) {
  const SystemConfig cfg = load_config(a.config);
  cfg.validate();
  if (!cfg.target) throw ConfigError("target", "sweep needs a [target] section");
  SweepSpec spec;
  spec.total_frames = a.frames_max;
  spec.increments = a.increments;
  spec.repeats = a.repeats;
  spec.seed = cfg.seed;
  spec.filter = default_match_filter(cfg);
  if (a.refine) spec.filter.refinement = Refinement::kParabolic;
  const SweepResult r = distinguishability_sweep(cfg, *cfg.target, spec, {}, a.threads);
  if (!a.out.empty()) save_sweep_csv(r, a.out);

  std::cout << "frames  histogram_mm  crb_mm\n";
  for (std::size_t k = 0; k < r.histogram.points.size(); ++k) {
    const CurvePoint& h = r.histogram.points[k];
    std::cout << h.frames << "  "
              << (h.ill_defined ? std::string("ill-defined") : num(1e3 * time_to_depth(h.value)))
              << "  " << num(1e3 * time_to_depth(r.crb.points[k].value)) << "\n";
  }
  try {
    std::cout << "log-log slope " << num(loglog_slope(r.histogram).slope) << "\n";
  } catch (const DomainError&) {
    std::cout << "log-log slope undefined\n";
  }
  return kOk;
}

// --- validate ---------------------------------------------------------

int run_validate(const std::string& path) {
  const SystemConfig cfg = load_config(path);
  const auto findings = check_config(cfg);
  bool failed = false;
  for (const Finding& f : findings) {
    const bool err = f.severity == Finding::Severity::kError;
    failed = failed || err;
    std::cout << (err ? "error   " : "warning ") << f.field << ": " << f.message << "\n";
  }
  if (!failed) std::cout << "ok\n";
  return failed ? kConfig : kOk;
}

// --- target -----------------------------------------------------------

int run_target(const ResolutionTargetSpec& spec, const std::string& depth,
               const std::string& reflectivity) {
  const ResolutionTarget t = make_resolution_target(spec);
  save_csv_grid(depth, t.scene.range);
  save_csv_grid(reflectivity, t.scene.reflectivity);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SPAD-array direct time-of-flight lidar simulator"};
  app.require_subcommand(1);

  FisherArgs fa;
  auto* fisher = app.add_subcommand("fisher", "Fisher information and Cramer-Rao bound for one target");
  fisher->add_option("-c,--config", fa.config, "configuration file")->required();
  fisher->add_option("--range", fa.range, "target range, m");
  fisher->add_option("--reflectivity", fa.reflectivity, "target reflectivity");
  fisher->add_option("--json", fa.json, "write the report as JSON");

  SimArgs sa;
  auto* sim = app.add_subcommand("sim", "Simulate depth images of a scene");
  sim->add_option("-c,--config", sa.config, "configuration file")->required();
  sim->add_option("--depth", sa.depth, "ground-truth range grid (csv or grid_binary)");
  sim->add_option("--reflectivity", sa.reflectivity, "reflectivity grid (csv or grid_binary)");
  sim->add_flag("--resolution-target", sa.target, "use the built-in resolution target scene");
  sim->add_option("--mode", sa.mode, "crb or histogram")->check(CLI::IsMember({"crb", "histogram"}));
  sim->add_option("--images", sa.images, "number of images")->check(CLI::PositiveNumber);
  sim->add_option("--format", sa.format, "csv or grid_binary")
      ->check(CLI::IsMember({"csv", "grid_binary"}));
  sim->add_option("--out", sa.out, "output directory");
  sim->add_option("--threads", sa.threads, "worker threads")->check(CLI::PositiveNumber);
  sim->add_option("--frames", sa.frames, "override acquisition.frames")->check(CLI::PositiveNumber);
  sim->add_flag("--refine", sa.refine, "parabolic sub-bin peak refinement");

  SweepArgs wa;
  auto* sweep = app.add_subcommand("sweep", "Distinguishability versus frames summed");
  sweep->add_option("-c,--config", wa.config, "configuration file")->required();
  sweep->add_option("--frames-max", wa.frames_max, "largest number of frames summed")
      ->check(CLI::PositiveNumber);
  sweep->add_option("--increments", wa.increments, "points in the linear schedule")
      ->check(CLI::PositiveNumber);
  sweep->add_option("--repeats", wa.repeats, "independent runs per point")
      ->check(CLI::Range(2L, 1L << 30));
  sweep->add_option("--out", wa.out, "CSV output");
  sweep->add_option("--threads", wa.threads, "worker threads")->check(CLI::PositiveNumber);
  sweep->add_flag("--refine", wa.refine, "parabolic sub-bin peak refinement");

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "Check a configuration");
  validate->add_option("config", validate_path, "configuration file")->required();

  ResolutionTargetSpec ts;
  std::string target_depth = "target_depth.csv";
  std::string target_refl = "target_reflectivity.csv";
  auto* target = app.add_subcommand("target", "Write the resolution target scene");
  target->add_option("--rows", ts.rows);
  target->add_option("--cols", ts.cols);
  target->add_option("--pitch", ts.pixel_pitch, "pixel pitch at the backplane, m");
  target->add_option("--range", ts.backplane_range, "backplane range, m");
  target->add_option("--reflectivity-value", ts.reflectivity);
  target->add_option("--out-depth", target_depth);
  target->add_option("--out-reflectivity", target_refl);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*fisher) return run_fisher(fa);
    if (*sim) return run_sim(sa);
    if (*sweep) return run_sweep(wa);
    if (*validate) return run_validate(validate_path);
    if (*target) return run_target(ts, target_depth, target_refl);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const DomainError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kConfig;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kIo;
  } catch (const NonConvergenceError& e) {
    std::cerr << "nonconvergence: " << e.what() << "\n";
    return kNonConvergence;
  }
  return kOk;
}

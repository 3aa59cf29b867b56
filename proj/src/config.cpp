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

#include "spadsim/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "spadsim/error.hpp"
#include "spadsim/likelihood.hpp"

namespace spadsim {
namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"laser",
       {"pulse_energy", "rep_rate", "wavelength", "pulse_fwhm", "jitter_mean", "jitter_std"}},
      {"atmosphere", {"attenuation_length", "solar_irradiance"}},
      {"optics", {"f_number", "divergence", "focal_length"}},
      {"sensor",
       {"pixel_width", "pixel_height", "quantum_efficiency", "dark_rate", "n_bins", "bin_width",
        "rows", "cols", "sigma_q_start", "sigma_q_end", "gate_delay"}},
      {"acquisition", {"frames", "exposure"}},
      {"target", {"range", "reflectivity"}},
      {"run", {"seed", "quadrature_rel_tol", "edge_sigma_guard"}},
  };
  return keys;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  std::optional<std::string> raw(const std::string& path) const {
    const auto v = tree_.get_optional<std::string>(pt::ptree::path_type(path, '.'));
    if (!v) return std::nullopt;
    return trim(*v);
  }

  double real(const std::string& path) const {
    auto v = optional_real(path);
    if (!v) throw ConfigError(path, "missing required key");
    return *v;
  }
  double real(const std::string& path, double fallback) const {
    return optional_real(path).value_or(fallback);
  }
  std::optional<double> optional_real(const std::string& path) const {
    const auto s = raw(path);
    if (!s) return std::nullopt;
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(s->data(), s->data() + s->size(), value);
    if (ec != std::errc{} || ptr != s->data() + s->size()) {
      throw ConfigError(path, "expected a number, got '" + *s + "'");
    }
    return value;
  }

  template <class Int>
  Int integer(const std::string& path) const {
    const auto s = raw(path);
    if (!s) throw ConfigError(path, "missing required key");
    Int value{};
    const auto [ptr, ec] = std::from_chars(s->data(), s->data() + s->size(), value);
    if (ec != std::errc{} || ptr != s->data() + s->size()) {
      throw ConfigError(path, "expected an integer, got '" + *s + "'");
    }
    return value;
  }

 private:
  const pt::ptree& tree_;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

long SystemConfig::pulses_per_frame() const {
  return std::lround(acquisition().pulses_per_frame());
}

void SystemConfig::validate() const {
  laser.validate();
  atmosphere.validate();
  optics.validate();
  sensor.validate();
  acquisition().validate();
  if (target) target->validate();
  if (!(tolerances.quadrature_rel > 0.0)) throw DomainError("run.quadrature_rel_tol must be > 0");
  if (!(tolerances.edge_sigma_guard >= 0.0)) {
    throw DomainError("run.edge_sigma_guard must be >= 0");
  }
}

SystemConfig parse_config(const std::string& text) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("", std::string("malformed config: ") + e.what());
  }

  for (const auto& [section, body] : tree) {
    const auto it = known_keys().find(section);
    if (it == known_keys().end() || body.empty()) {
      throw ConfigError(section, "unknown section");
    }
    for (const auto& [key, _] : body) {
      if (!it->second.contains(key)) throw ConfigError(section + "." + key, "unknown key");
    }
  }

  const Reader r(tree);
  SystemConfig c;
  c.laser.pulse_energy = r.real("laser.pulse_energy");
  c.laser.rep_rate = r.real("laser.rep_rate");
  c.laser.wavelength = r.real("laser.wavelength");
  c.laser.pulse_fwhm = r.real("laser.pulse_fwhm");
  c.laser.jitter_mean = r.real("laser.jitter_mean", 0.0);
  c.laser.jitter_std = r.real("laser.jitter_std");

  c.atmosphere.attenuation_length = r.real("atmosphere.attenuation_length");
  c.atmosphere.solar_irradiance = r.real("atmosphere.solar_irradiance");

  c.optics.f_number = r.real("optics.f_number");
  c.optics.divergence = r.real("optics.divergence");
  c.optics.focal_length = r.optional_real("optics.focal_length");

  c.sensor.pixel_width = r.real("sensor.pixel_width");
  c.sensor.pixel_height = r.real("sensor.pixel_height");
  c.sensor.quantum_efficiency = r.real("sensor.quantum_efficiency");
  c.sensor.dark_rate = r.real("sensor.dark_rate");
  c.sensor.n_bins = r.integer<long>("sensor.n_bins");
  c.sensor.bin_width = r.real("sensor.bin_width");
  c.sensor.rows = r.integer<long>("sensor.rows");
  c.sensor.cols = r.integer<long>("sensor.cols");
  c.sensor.sigma_q_start = r.real("sensor.sigma_q_start", 0.0);
  c.sensor.sigma_q_end = r.real("sensor.sigma_q_end", 0.0);
  c.sensor.gate_delay = r.real("sensor.gate_delay", 0.0);

  c.frames = r.integer<long>("acquisition.frames");
  c.exposure = r.real("acquisition.exposure");

  c.seed = r.integer<std::uint64_t>("run.seed");
  c.tolerances.quadrature_rel = r.real("run.quadrature_rel_tol", 1e-6);
  c.tolerances.edge_sigma_guard = r.real("run.edge_sigma_guard", 5.0);

  if (r.raw("target.range") || r.raw("target.reflectivity")) {
    c.target = TargetPatch{r.real("target.range"), r.real("target.reflectivity")};
  }
  return c;
}

SystemConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string to_config_text(const SystemConfig& c) {
  std::ostringstream o;
  o << "[laser]\n"
    << "pulse_energy = " << fmt(c.laser.pulse_energy) << "\n"
    << "rep_rate = " << fmt(c.laser.rep_rate) << "\n"
    << "wavelength = " << fmt(c.laser.wavelength) << "\n"
    << "pulse_fwhm = " << fmt(c.laser.pulse_fwhm) << "\n"
    << "jitter_mean = " << fmt(c.laser.jitter_mean) << "\n"
    << "jitter_std = " << fmt(c.laser.jitter_std) << "\n"
    << "[atmosphere]\n"
    << "attenuation_length = " << fmt(c.atmosphere.attenuation_length) << "\n"
    << "solar_irradiance = " << fmt(c.atmosphere.solar_irradiance) << "\n"
    << "[optics]\n"
    << "f_number = " << fmt(c.optics.f_number) << "\n"
    << "divergence = " << fmt(c.optics.divergence) << "\n";
  if (c.optics.focal_length) o << "focal_length = " << fmt(*c.optics.focal_length) << "\n";
  o << "[sensor]\n"
    << "pixel_width = " << fmt(c.sensor.pixel_width) << "\n"
    << "pixel_height = " << fmt(c.sensor.pixel_height) << "\n"
    << "quantum_efficiency = " << fmt(c.sensor.quantum_efficiency) << "\n"
    << "dark_rate = " << fmt(c.sensor.dark_rate) << "\n"
    << "n_bins = " << c.sensor.n_bins << "\n"
    << "bin_width = " << fmt(c.sensor.bin_width) << "\n"
    << "rows = " << c.sensor.rows << "\n"
    << "cols = " << c.sensor.cols << "\n"
    << "sigma_q_start = " << fmt(c.sensor.sigma_q_start) << "\n"
    << "sigma_q_end = " << fmt(c.sensor.sigma_q_end) << "\n"
    << "gate_delay = " << fmt(c.sensor.gate_delay) << "\n"
    << "[acquisition]\n"
    << "frames = " << c.frames << "\n"
    << "exposure = " << fmt(c.exposure) << "\n";
  if (c.target) {
    o << "[target]\n"
      << "range = " << fmt(c.target->range) << "\n"
      << "reflectivity = " << fmt(c.target->reflectivity) << "\n";
  }
  o << "[run]\n"
    << "seed = " << c.seed << "\n"
    << "quadrature_rel_tol = " << fmt(c.tolerances.quadrature_rel) << "\n"
    << "edge_sigma_guard = " << fmt(c.tolerances.edge_sigma_guard) << "\n";
  return o.str();
}

std::uint64_t config_digest(const SystemConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : to_config_text(config)) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::vector<Finding> check_config(const SystemConfig& c) {
  std::vector<Finding> out;
  auto error = [&](bool ok, const char* field, const char* msg) {
    if (!ok) out.push_back({Finding::Severity::kError, field, msg});
  };
  auto warn = [&](const char* field, std::string msg) {
    out.push_back({Finding::Severity::kWarning, field, std::move(msg)});
  };
  auto nonneg = [](double x) { return std::isfinite(x) && x >= 0.0; };
  auto pos = [](double x) { return std::isfinite(x) && x > 0.0; };

  error(nonneg(c.laser.pulse_energy), "laser.pulse_energy", "must be >= 0");
  error(nonneg(c.laser.rep_rate), "laser.rep_rate", "must be >= 0");
  error(pos(c.laser.wavelength), "laser.wavelength", "must be > 0");
  error(pos(c.laser.pulse_fwhm), "laser.pulse_fwhm", "must be > 0");
  error(nonneg(c.laser.jitter_mean), "laser.jitter_mean", "must be >= 0");
  error(nonneg(c.laser.jitter_std), "laser.jitter_std", "must be >= 0");
  error(c.atmosphere.attenuation_length > 0.0, "atmosphere.attenuation_length", "must be > 0");
  error(nonneg(c.atmosphere.solar_irradiance), "atmosphere.solar_irradiance", "must be >= 0");
  error(pos(c.optics.f_number), "optics.f_number", "must be > 0");
  error(c.optics.divergence > 0.0 && c.optics.divergence < std::numbers::pi / 2.0,
        "optics.divergence", "must lie in (0, pi/2)");
  if (c.optics.focal_length) error(pos(*c.optics.focal_length), "optics.focal_length", "must be > 0");
  error(pos(c.sensor.pixel_width), "sensor.pixel_width", "must be > 0");
  error(pos(c.sensor.pixel_height), "sensor.pixel_height", "must be > 0");
  error(c.sensor.quantum_efficiency >= 0.0 && c.sensor.quantum_efficiency <= 1.0,
        "sensor.quantum_efficiency", "must lie in [0, 1]");
  error(nonneg(c.sensor.dark_rate), "sensor.dark_rate", "must be >= 0");
  error(c.sensor.n_bins >= 1, "sensor.n_bins", "must be >= 1");
  error(pos(c.sensor.bin_width), "sensor.bin_width", "must be > 0");
  error(c.sensor.rows >= 1, "sensor.rows", "must be >= 1");
  error(c.sensor.cols >= 1, "sensor.cols", "must be >= 1");
  error(nonneg(c.sensor.sigma_q_start), "sensor.sigma_q_start", "must be >= 0");
  error(nonneg(c.sensor.sigma_q_end), "sensor.sigma_q_end", "must be >= 0");
  error(std::isfinite(c.sensor.gate_delay), "sensor.gate_delay", "must be finite");
  error(c.frames >= 1, "acquisition.frames", "must be >= 1");
  error(pos(c.exposure), "acquisition.exposure", "must be > 0");
  error(c.acquisition().pulses_per_frame() >= 1.0, "acquisition.exposure",
        "exposure * rep_rate must be >= 1 pulse per frame");
  error(c.tolerances.quadrature_rel > 0.0, "run.quadrature_rel_tol", "must be > 0");
  error(c.tolerances.edge_sigma_guard >= 0.0, "run.edge_sigma_guard", "must be >= 0");
  if (c.target) {
    error(pos(c.target->range), "target.range", "must be > 0");
    error(c.target->reflectivity >= 0.0 && c.target->reflectivity <= 1.0, "target.reflectivity",
          "must lie in [0, 1]");
  }
  if (!out.empty()) return out;

  const double ppf = c.acquisition().pulses_per_frame();
  if (std::abs(ppf - std::round(ppf)) > 1e-9 * ppf) {
    warn("acquisition.exposure", "exposure * rep_rate = " + fmt(ppf) +
                                     " is not an integer; the sampler uses " +
                                     std::to_string(c.pulses_per_frame()) + " pulses per frame");
  }
  if (c.target) {
    const LikelihoodModel m =
        make_likelihood(c.laser, c.atmosphere, c.optics, c.sensor, *c.target);
    const Alpha a = total_alpha(m, c.tolerances.edge_sigma_guard);
    if (a.value >= 1.0) {
      out.push_back({Finding::Severity::kError, "target",
                     "alpha = " + fmt(a.value) +
                         " >= 1: saturated regime, detection probability per frame undefined"});
    }
    if (m.pulse.peak_time < 0.0 || m.pulse.peak_time > m.window) {
      out.push_back({Finding::Severity::kError, "target.range",
                     "return at " + fmt(m.pulse.peak_time) +
                         " s lies outside the TCSPC window [0, " + fmt(m.window) + "]"});
    } else if (a.near_edge) {
      warn("target.range", "return lies within " + fmt(c.tolerances.edge_sigma_guard) +
                               " sigma' of a TCSPC window edge; alpha over-counts");
    }
  }
  return out;
}

}  // namespace spadsim

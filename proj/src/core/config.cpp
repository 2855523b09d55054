// Copyright 2026 The shipsi Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "core/config.hpp"

#include <charconv>
#include <functional>
#include <istream>
#include <ostream>

#include "core/error.hpp"
#include "core/textio.hpp"

namespace shipsi {

std::string to_string(FrameSource source) {
  return source == FrameSource::kEstimated ? "estimated" : "actual";
}

std::optional<FrameSource> parse_frame_source(std::string_view text) {
  if (text == "estimated") return FrameSource::kEstimated;
  if (text == "actual") return FrameSource::kActual;
  return std::nullopt;
}

double ExperimentConfig::span() const {
  return probe_span > 0.0 ? probe_span : peak_wavelength(spectrum);
}

std::size_t ExperimentConfig::steps() const {
  return static_cast<std::size_t>(std::llround(duration / dt));
}

SimulationOptions ExperimentConfig::simulation() const {
  SimulationOptions o;
  o.mode = mode;
  o.duration = duration;
  o.dt = dt;
  o.substeps = substeps;
  o.turn_rudder = turn_rudder;
  return o;
}

namespace {

[[noreturn]] void bad(std::string_view key, const std::string& why) {
  throw ConfigError(std::string(key) + ": " + why);
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double as_double(std::string_view key, std::string_view v) {
  double d = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), d);
  if (ec != std::errc{} || ptr != v.data() + v.size() || !std::isfinite(d)) {
    bad(key, "expected a number, got '" + std::string(v) + "'");
  }
  return d;
}

std::uint64_t as_u64(std::string_view key, std::string_view v) {
  std::uint64_t d = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), d);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    bad(key, "expected a non-negative integer, got '" + std::string(v) + "'");
  }
  return d;
}

std::vector<std::size_t> as_list(std::string_view key, std::string_view v) {
  std::vector<std::size_t> out;
  for (auto tok : text::split_ws(v)) out.push_back(as_u64(key, tok));
  if (out.empty()) bad(key, "expected a comma-separated list of integers");
  return out;
}

struct Field {
  const char* key;
  const char* unit;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, std::string_view key, std::string_view)> set;
};

template <typename T>
Field real(const char* key, const char* unit, T ExperimentConfig::*group, double T::*member) {
  return {key, unit, [=](const ExperimentConfig& c) { return text::fmt(c.*group.*member); },
          [=](ExperimentConfig& c, std::string_view k, std::string_view v) {
            c.*group.*member = as_double(k, v);
          }};
}

Field real(const char* key, const char* unit, double ExperimentConfig::*member) {
  return {key, unit, [=](const ExperimentConfig& c) { return text::fmt(c.*member); },
          [=](ExperimentConfig& c, std::string_view k, std::string_view v) {
            c.*member = as_double(k, v);
          }};
}

template <typename I>
Field integer(const char* key, const char* unit, I ExperimentConfig::*member) {
  return {key, unit, [=](const ExperimentConfig& c) { return std::to_string(c.*member); },
          [=](ExperimentConfig& c, std::string_view k, std::string_view v) {
            c.*member = static_cast<I>(as_u64(k, v));
          }};
}

Field triple(const char* key, const char* unit, std::array<double, 3> VesselParams::*member) {
  return {key, unit,
          [=](const ExperimentConfig& c) {
            const auto& a = c.vessel.*member;
            return text::fmt(a[0]) + ", " + text::fmt(a[1]) + ", " + text::fmt(a[2]);
          },
          [=](ExperimentConfig& c, std::string_view k, std::string_view v) {
            const auto tok = text::split_ws(v);
            if (tok.size() != 3) bad(k, "expected three comma-separated numbers");
            for (std::size_t i = 0; i < 3; ++i) (c.vessel.*member)[i] = as_double(k, tok[i]);
          }};
}

template <typename E>
Field choice(const char* key, const char* unit, E ExperimentConfig::*member,
             std::string (*show)(E), std::optional<E> (*read)(std::string_view)) {
  return {key, unit, [=](const ExperimentConfig& c) { return show(c.*member); },
          [=](ExperimentConfig& c, std::string_view k, std::string_view v) {
            const auto e = read(v);
            if (!e) bad(k, "invalid value '" + std::string(v) + "' (expected " + unit + ")");
            c.*member = *e;
          }};
}

Field list(const char* key, const char* unit, std::vector<std::size_t> ExperimentConfig::*member) {
  return {key, unit,
          [=](const ExperimentConfig& c) {
            std::string s;
            for (std::size_t v : c.*member) s += (s.empty() ? "" : ", ") + std::to_string(v);
            return s;
          },
          [=](ExperimentConfig& c, std::string_view k, std::string_view v) {
            c.*member = as_list(k, v);
          }};
}

std::string show_sign(DerivativeSign s) {
  return s == DerivativeSign::kAsPrinted ? "as-printed" : "stabilizing";
}

std::optional<DerivativeSign> read_sign(std::string_view v) {
  if (v == "as-printed") return DerivativeSign::kAsPrinted;
  if (v == "stabilizing") return DerivativeSign::kStabilizing;
  return std::nullopt;
}

std::string show_mode(RunMode m) { return to_string(m); }
std::string show_format(DataFormat f) { return to_string(f); }
std::string show_source(FrameSource s) { return to_string(s); }
std::string show_yaw(FrameYaw y) { return to_string(y); }
std::string show_mask(MaskMode m) { return to_string(m); }

const std::vector<Field>& fields() {
  using C = ExperimentConfig;
  static const std::vector<Field> f = [] {
    std::vector<Field> v{
        real("spectrum.significant_wave_height", "m", &C::spectrum,
             &SpectrumParams::significant_wave_height),
        real("spectrum.peak_period", "s", &C::spectrum, &SpectrumParams::peak_period),
        real("spectrum.wave_heading", "rad, direction waves come from", &C::spectrum,
             &SpectrumParams::wave_heading),
        real("spectrum.gravity", "m/s^2", &C::spectrum, &SpectrumParams::gravity),
        integer("spectrum.components", "count", &C::components),
        real("spectrum.omega_min_factor", "x peak frequency", &C::omega_min_factor),
        real("spectrum.omega_max_factor", "x peak frequency", &C::omega_max_factor),

        real("vessel.length_bp", "m", &C::vessel, &VesselParams::length_bp),
        real("vessel.beam", "m", &C::vessel, &VesselParams::beam),
        real("vessel.draft", "m", &C::vessel, &VesselParams::draft),
        real("vessel.displacement", "t", &C::vessel, &VesselParams::displacement),
        real("vessel.gm_transverse", "m", &C::vessel, &VesselParams::gm_transverse),
        real("vessel.roll_gyradius", "m", &C::vessel, &VesselParams::roll_gyradius),
        real("vessel.pitch_gyradius", "m", &C::vessel, &VesselParams::pitch_gyradius),
        real("vessel.yaw_gyradius", "m", &C::vessel, &VesselParams::yaw_gyradius),
        real("vessel.nominal_speed", "m/s", &C::vessel, &VesselParams::nominal_speed),
        real("vessel.surge_time_constant", "s", &C::vessel, &VesselParams::surge_time_constant),
        real("vessel.turn_speed_loss", "s/rad^2", &C::vessel, &VesselParams::turn_speed_loss),
        real("vessel.surge_slope_gain", "per g of slope", &C::vessel,
             &VesselParams::surge_slope_gain),
        real("vessel.added_resistance", "m/s^2 per m^2", &C::vessel,
             &VesselParams::added_resistance),
        real("vessel.sway_time_constant", "s", &C::vessel, &VesselParams::sway_time_constant),
        real("vessel.sway_rudder_gain", "m/s per rad", &C::vessel,
             &VesselParams::sway_rudder_gain),
        real("vessel.sway_slope_gain", "per g of slope", &C::vessel,
             &VesselParams::sway_slope_gain),
        real("vessel.sway_drift", "m/s^2 per m^2", &C::vessel, &VesselParams::sway_drift),
        real("vessel.yaw_time_constant", "s", &C::vessel, &VesselParams::yaw_time_constant),
        real("vessel.yaw_rudder_gain", "rad/s per rad", &C::vessel,
             &VesselParams::yaw_rudder_gain),
        real("vessel.yaw_slope_gain", "rad/s^2 per rad", &C::vessel,
             &VesselParams::yaw_slope_gain),
        real("vessel.yaw_drift", "rad/s^2 per m^2", &C::vessel, &VesselParams::yaw_drift),
        triple("vessel.natural_periods", "s; heave, roll, pitch", &VesselParams::natural_periods),
        triple("vessel.damping_ratios", "heave, roll, pitch", &VesselParams::damping_ratios),
        triple("vessel.excitation_gains", "m/m, rad/rad, rad/rad",
               &VesselParams::excitation_gains),
        real("vessel.turn_heel_gain", "rad per (m/s * rad/s)", &C::vessel,
             &VesselParams::turn_heel_gain),

        real("pid.proportional", "-", &C::pid, &PidGains::proportional),
        real("pid.integral", "1/s", &C::pid, &PidGains::integral),
        real("pid.derivative", "s", &C::pid, &PidGains::derivative),
        real("pid.max_rudder_rate", "rad/s", &C::pid, &PidGains::max_rudder_rate),
        real("pid.max_deflection", "rad", &C::pid, &PidGains::max_deflection),
        real("pid.desired_heading", "rad", &C::pid, &PidGains::desired_heading),
        {"pid.derivative_sign", "as-printed | stabilizing",
         [](const C& c) { return show_sign(c.pid.derivative_sign); },
         [](C& c, std::string_view k, std::string_view v) {
           const auto s = read_sign(v);
           if (!s) bad(k, "invalid value '" + std::string(v) + "' (expected as-printed | stabilizing)");
           c.pid.derivative_sign = *s;
         }},

        choice("run.mode", "course-keeping | turning-circle", &C::mode, show_mode, parse_run_mode),
        real("run.duration", "s", &C::duration),
        real("run.dt", "s", &C::dt),
        integer("run.substeps", "integration steps per sample", &C::substeps),
        real("run.turn_rudder", "rad", &C::turn_rudder),

        integer("data.train_runs", "count", &C::train_runs),
        integer("data.validation_runs", "count", &C::validation_runs),
        integer("data.train_seed", "first training run seed", &C::train_seed),
        integer("data.validation_seed", "first validation run seed", &C::validation_seed),
        choice("data.format", "text | binary", &C::format, show_format, parse_data_format),

        integer("probes.count", "count", &C::probes),
        real("probes.span", "m, 0 = peak wavelength", &C::probe_span),
        choice("frame.source", "estimated | actual", &C::frame_source, show_source,
               parse_frame_source),
        choice("frame.yaw", "circular | track", &C::frame_yaw, show_yaw, parse_frame_yaw),

        {"net.units", "count", [](const C& c) { return std::to_string(c.net.units); },
         [](C& c, std::string_view k, std::string_view v) { c.net.units = as_u64(k, v); }},
        {"net.layers", "count", [](const C& c) { return std::to_string(c.net.layers); },
         [](C& c, std::string_view k, std::string_view v) { c.net.layers = as_u64(k, v); }},
        {"net.dropout", "probability", [](const C& c) { return text::fmt(c.net.dropout); },
         [](C& c, std::string_view k, std::string_view v) { c.net.dropout = as_double(k, v); }},
        {"net.learning_rate", "-",
         [](const C& c) { return text::fmt(c.net.adam.learning_rate); },
         [](C& c, std::string_view k, std::string_view v) {
           c.net.adam.learning_rate = as_double(k, v);
         }},
        {"net.beta1", "-", [](const C& c) { return text::fmt(c.net.adam.beta1); },
         [](C& c, std::string_view k, std::string_view v) { c.net.adam.beta1 = as_double(k, v); }},
        {"net.beta2", "-", [](const C& c) { return text::fmt(c.net.adam.beta2); },
         [](C& c, std::string_view k, std::string_view v) { c.net.adam.beta2 = as_double(k, v); }},
        {"net.epsilon", "-", [](const C& c) { return text::fmt(c.net.adam.epsilon); },
         [](C& c, std::string_view k, std::string_view v) {
           c.net.adam.epsilon = as_double(k, v);
         }},
        {"net.epochs", "count", [](const C& c) { return std::to_string(c.net.epochs); },
         [](C& c, std::string_view k, std::string_view v) { c.net.epochs = as_u64(k, v); }},
        {"net.batch_runs", "runs per update, 0 = full batch",
         [](const C& c) { return std::to_string(c.net.batch_runs); },
         [](C& c, std::string_view k, std::string_view v) { c.net.batch_runs = as_u64(k, v); }},
        {"net.seed", "-", [](const C& c) { return std::to_string(c.net.seed); },
         [](C& c, std::string_view k, std::string_view v) { c.net.seed = as_u64(k, v); }},
        {"net.forget_bias", "-", [](const C& c) { return text::fmt(c.net.forget_bias); },
         [](C& c, std::string_view k, std::string_view v) {
           c.net.forget_bias = as_double(k, v);
         }},
        {"net.clip_norm", "0 = off", [](const C& c) { return text::fmt(c.net.clip_norm); },
         [](C& c, std::string_view k, std::string_view v) { c.net.clip_norm = as_double(k, v); }},
        {"net.mask", "sequence | step", [](const C& c) { return show_mask(c.net.mask_mode); },
         [](C& c, std::string_view k, std::string_view v) {
           const auto m = parse_mask_mode(v);
           if (!m) bad(k, "invalid value '" + std::string(v) + "' (expected sequence | step)");
           c.net.mask_mode = *m;
         }},

        integer("predict.samples", "count", &C::predict_samples),
        integer("predict.seed", "-", &C::predict_seed),
        list("study.probes", "counts", &C::study_probes),
        list("study.runs", "counts", &C::study_runs),
    };
    return v;
  }();
  return f;
}

const Field& find_field(std::string_view key) {
  for (const auto& f : fields()) {
    if (key == f.key) return f;
  }
  throw ConfigError(std::string(key) + ": unknown configuration key");
}

}  // namespace

void ExperimentConfig::validate() const {
  auto need = [](bool ok, const char* key, const char* why) {
    if (!ok) bad(key, why);
  };
  need(spectrum.significant_wave_height > 0.0, "spectrum.significant_wave_height", "must be positive");
  need(spectrum.peak_period > 0.0, "spectrum.peak_period", "must be positive");
  need(spectrum.wave_heading >= 0.0 && spectrum.wave_heading < 2.0 * 3.14159265358979323846,
       "spectrum.wave_heading", "must lie in [0, 2 pi)");
  need(spectrum.gravity > 0.0, "spectrum.gravity", "must be positive");
  need(components >= 1, "spectrum.components", "must be at least 1");
  need(omega_min_factor > 0.0, "spectrum.omega_min_factor", "must be positive");
  need(omega_max_factor > omega_min_factor, "spectrum.omega_max_factor",
       "must exceed spectrum.omega_min_factor");
  try {
    vessel.validate();
  } catch (const Error& e) {
    throw ConfigError(std::string("vessel: ") + e.what());
  }
  need(pid.max_rudder_rate > 0.0, "pid.max_rudder_rate", "must be positive");
  need(pid.max_deflection > 0.0, "pid.max_deflection", "must be positive");
  need(dt > 0.0, "run.dt", "must be positive");
  need(duration > 0.0, "run.duration", "must be positive");
  need(std::abs(duration / dt - std::round(duration / dt)) < 1e-9 && steps() >= 2, "run.duration",
       "must be an integer multiple (at least 2) of run.dt");
  need(substeps >= 1, "run.substeps", "must be at least 1");
  need(train_runs >= 1, "data.train_runs", "must be at least 1");
  need(validation_runs >= 1, "data.validation_runs", "must be at least 1");
  const std::size_t pool = std::max(train_runs, *std::max_element(study_runs.begin(), study_runs.end()));
  need(train_seed + pool <= validation_seed || validation_seed + validation_runs <= train_seed,
       "data.validation_seed", "training and validation seed ranges overlap");
  need(probes >= 1, "probes.count", "must be at least 1");
  need(probe_span >= 0.0, "probes.span", "must be non-negative");
  need(net.units >= 1, "net.units", "must be at least 1");
  need(net.layers >= 1, "net.layers", "must be at least 1");
  need(net.dropout >= 0.0 && net.dropout < 1.0, "net.dropout", "must lie in [0, 1)");
  need(net.adam.learning_rate > 0.0, "net.learning_rate", "must be positive");
  need(net.adam.beta1 >= 0.0 && net.adam.beta1 < 1.0, "net.beta1", "must lie in [0, 1)");
  need(net.adam.beta2 >= 0.0 && net.adam.beta2 < 1.0, "net.beta2", "must lie in [0, 1)");
  need(net.adam.epsilon > 0.0, "net.epsilon", "must be positive");
  need(net.clip_norm >= 0.0, "net.clip_norm", "must be non-negative");
  need(predict_samples >= 1, "predict.samples", "must be at least 1");
  need(!study_probes.empty(), "study.probes", "must not be empty");
  need(!study_runs.empty(), "study.runs", "must not be empty");
  for (std::size_t k : study_probes) need(k >= 1, "study.probes", "entries must be at least 1");
  for (std::size_t m : study_runs) need(m >= 1, "study.runs", "entries must be at least 1");
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig c;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    const auto hash = line.find('#');
    const std::string body = trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(n) + ": expected 'key = value'");
    }
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    set_config_value(c, key, value);
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  return parse_config(in);
}

void emit_config(std::ostream& out, const ExperimentConfig& config) {
  std::string group;
  for (const auto& f : fields()) {
    const std::string_view key(f.key);
    const std::string g(key.substr(0, key.find('.')));
    if (g != group) {
      if (!group.empty()) out << '\n';
      out << "# " << g << '\n';
      group = g;
    }
    out << f.key << " = " << f.get(config) << "  # " << f.unit << '\n';
  }
  if (!out) throw IoError("failed writing config");
}

void set_config_value(ExperimentConfig& config, std::string_view key, std::string_view value) {
  find_field(key).set(config, key, value);
}

std::string get_config_value(const ExperimentConfig& config, std::string_view key) {
  return find_field(key).get(config);
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& f : fields()) keys.emplace_back(f.key);
  return keys;
}

}  // namespace shipsi

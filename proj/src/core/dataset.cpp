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

#include "core/dataset.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>

#include "core/error.hpp"
#include "core/textio.hpp"

namespace shipsi {

namespace fs = std::filesystem;

std::array<std::string, kDofCount> dof_names(RunMode mode) {
  return {"surge_vel", "sway_vel", "heave", "roll", "pitch",
          mode == RunMode::kCourseKeeping ? "yaw" : "yaw_rate"};
}

Eigen::MatrixXd build_outputs(const Trajectory& run, RunMode mode) {
  run.validate();
  const auto n = static_cast<Eigen::Index>(run.size());
  Eigen::MatrixXd y(n, static_cast<Eigen::Index>(kDofCount));
  const std::vector<double>& last =
      mode == RunMode::kCourseKeeping ? run.yaw : run.yaw_rate;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto s = static_cast<std::size_t>(i);
    y(i, 0) = run.surge_vel[s];
    y(i, 1) = run.sway_vel[s];
    y(i, 2) = run.heave[s];
    y(i, 3) = run.roll[s];
    y(i, 4) = run.pitch[s];
    y(i, 5) = last[s];
  }
  return y;
}

// ---------------------------------------------------------------------------
// Standardizer

Standardizer::Standardizer(std::vector<double> mean, std::vector<double> stddev)
    : mean_(std::move(mean)), stddev_(std::move(stddev)) {
  if (mean_.size() != stddev_.size()) {
    throw InvalidArgument("standardizer mean and std differ in length");
  }
  for (std::size_t c = 0; c < stddev_.size(); ++c) {
    if (!(stddev_[c] > 0.0) || !std::isfinite(stddev_[c])) {
      throw InvalidArgument("standardizer std must be positive for channel " +
                            std::to_string(c));
    }
  }
}

Standardizer Standardizer::fit(std::span<const Eigen::MatrixXd> samples,
                               std::span<const std::string> names) {
  if (samples.empty()) throw InvalidArgument("standardizer fit needs data");
  const Eigen::Index width = samples.front().cols();
  Eigen::Index rows = 0;
  for (const auto& m : samples) {
    if (m.cols() != width) {
      throw InvalidArgument("standardizer fit: matrices differ in channel count");
    }
    rows += m.rows();
  }
  if (rows < 2) throw InvalidArgument("standardizer fit needs at least 2 samples per channel");

  std::vector<double> mean(static_cast<std::size_t>(width), 0.0);
  std::vector<double> stddev(static_cast<std::size_t>(width), 0.0);
  for (Eigen::Index c = 0; c < width; ++c) {
    double sum = 0.0;
    for (const auto& m : samples) sum += m.col(c).sum();
    const double mu = sum / static_cast<double>(rows);
    double ss = 0.0;
    for (const auto& m : samples) ss += (m.col(c).array() - mu).square().sum();
    const double sd = std::sqrt(ss / static_cast<double>(rows));
    const auto ci = static_cast<std::size_t>(c);
    if (!(sd > 0.0)) {
      const std::string label =
          ci < names.size() ? names[ci] : "channel " + std::to_string(c);
      throw InvalidArgument("cannot standardize constant channel '" + label +
                            "' (std = 0)");
    }
    mean[ci] = mu;
    stddev[ci] = sd;
  }
  return Standardizer(std::move(mean), std::move(stddev));
}

void Standardizer::check_width(const Eigen::MatrixXd& data) const {
  if (static_cast<std::size_t>(data.cols()) != mean_.size()) {
    throw InvalidArgument("standardizer expects " + std::to_string(mean_.size()) +
                          " channels, got " + std::to_string(data.cols()));
  }
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& data) const {
  check_width(data);
  Eigen::MatrixXd out(data.rows(), data.cols());
  for (Eigen::Index c = 0; c < data.cols(); ++c) {
    const auto ci = static_cast<std::size_t>(c);
    out.col(c) = (data.col(c).array() - mean_[ci]) / stddev_[ci];
  }
  return out;
}

Eigen::MatrixXd Standardizer::invert(const Eigen::MatrixXd& data) const {
  check_width(data);
  Eigen::MatrixXd out(data.rows(), data.cols());
  for (Eigen::Index c = 0; c < data.cols(); ++c) {
    const auto ci = static_cast<std::size_t>(c);
    out.col(c) = data.col(c).array() * stddev_[ci] + mean_[ci];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Assembly

std::size_t DatasetTensors::steps() const {
  return inputs.empty() ? 0 : static_cast<std::size_t>(inputs.front().rows());
}

std::size_t DatasetTensors::probes() const {
  return inputs.empty() ? 0 : static_cast<std::size_t>(inputs.front().cols());
}

void DatasetTensors::validate() const {
  if (outputs.size() != inputs.size() || run_seeds.size() != inputs.size()) {
    throw InvalidArgument("dataset run counts disagree");
  }
  for (std::size_t m = 0; m < inputs.size(); ++m) {
    if (inputs[m].rows() != inputs.front().rows() ||
        inputs[m].cols() != inputs.front().cols() ||
        outputs[m].rows() != inputs[m].rows() ||
        outputs[m].cols() != static_cast<Eigen::Index>(kDofCount)) {
      throw InvalidArgument("dataset tensor shapes are inconsistent at run " +
                            std::to_string(m));
    }
  }
}

RawRun build_raw_run(const RunSource& source, const ProbeLayout& layout, RunMode mode) {
  if (!source.run || !source.waves || !source.frame) {
    throw InvalidArgument("run source is incomplete");
  }
  if (source.frame->t != source.run->t) {
    throw InvalidArgument("encounter frame and run use different time grids");
  }
  return RawRun{probe_elevations(*source.waves, *source.frame, layout),
                build_outputs(*source.run, mode)};
}

namespace {

std::vector<RawRun> build_all(std::span<const RunSource> runs, const ProbeLayout& layout,
                              RunMode mode) {
  if (runs.empty()) throw InvalidArgument("dataset assembly needs at least one run");
  std::vector<RawRun> raw;
  raw.reserve(runs.size());
  for (const auto& src : runs) {
    if (src.run && src.run->t != runs.front().run->t) {
      throw InvalidArgument("dataset runs must share one time grid");
    }
    raw.push_back(build_raw_run(src, layout, mode));
  }
  return raw;
}

DatasetTensors scale(std::vector<RawRun>& raw, std::span<const RunSource> runs,
                     RunMode mode, const Standardizer& in, const Standardizer& out) {
  DatasetTensors d;
  d.mode = mode;
  d.input_scaler = in;
  d.output_scaler = out;
  for (std::size_t m = 0; m < raw.size(); ++m) {
    d.inputs.push_back(in.apply(raw[m].inputs));
    d.outputs.push_back(out.apply(raw[m].outputs));
    d.run_seeds.push_back(runs[m].run->seed);
  }
  return d;
}

std::vector<std::string> probe_names(std::size_t k) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < k; ++i) names.push_back("probe " + std::to_string(i + 1));
  return names;
}

}  // namespace

DatasetTensors assemble_training(std::span<const RunSource> runs,
                                 const ProbeLayout& layout, RunMode mode) {
  std::vector<RawRun> raw = build_all(runs, layout, mode);
  std::vector<Eigen::MatrixXd> xs, ys;
  for (auto& r : raw) {
    xs.push_back(r.inputs);
    ys.push_back(r.outputs);
  }
  const auto dof = dof_names(mode);
  const std::vector<std::string> out_names(dof.begin(), dof.end());
  const Standardizer in = Standardizer::fit(xs, probe_names(layout.size()));
  const Standardizer out = Standardizer::fit(ys, out_names);
  return scale(raw, runs, mode, in, out);
}

DatasetTensors assemble_validation(std::span<const RunSource> runs,
                                   const ProbeLayout& layout, RunMode mode,
                                   const DatasetTensors& training) {
  if (training.input_scaler.empty() || training.output_scaler.empty()) {
    throw InvalidArgument(
        "validation data cannot be assembled before training standardizers are fitted");
  }
  if (training.input_scaler.channels() != layout.size()) {
    throw InvalidArgument("probe count differs from the training standardizer");
  }
  std::vector<RawRun> raw = build_all(runs, layout, mode);
  return scale(raw, runs, mode, training.input_scaler, training.output_scaler);
}

// ---------------------------------------------------------------------------
// Persistence

std::optional<DataFormat> parse_data_format(std::string_view text) {
  if (text == "text") return DataFormat::kText;
  if (text == "binary") return DataFormat::kBinary;
  return std::nullopt;
}

std::string to_string(DataFormat format) {
  return format == DataFormat::kText ? "text" : "binary";
}

namespace {

std::string run_stem(std::string_view split, std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04zu", index);
  return std::string(split) + "_" + buf;
}

std::uint64_t to_little(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
    return r;
  }
}

}  // namespace

void write_matrix(const fs::path& path, const Eigen::MatrixXd& m, DataFormat format) {
  if (format == DataFormat::kText) {
    auto out = text::open_out(path);
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        if (c) out << ' ';
        out << text::fmt(m(r, c));
      }
      out << '\n';
    }
    if (!out) throw IoError("failed writing " + path.string());
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const std::uint64_t bits = to_little(std::bit_cast<std::uint64_t>(m(r, c)));
      out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
    }
  }
  if (!out) throw IoError("failed writing " + path.string());
}

Eigen::MatrixXd read_matrix(const fs::path& path, Eigen::Index rows, Eigen::Index cols,
                            DataFormat format) {
  Eigen::MatrixXd m(rows, cols);
  if (format == DataFormat::kText) {
    auto in = text::open_in(path);
    std::string line;
    for (Eigen::Index r = 0; r < rows; ++r) {
      text::require_line(in, line, path.string());
      const auto f = text::split_ws(line);
      if (static_cast<Eigen::Index>(f.size()) != cols) {
        throw IoError(path.string() + ": expected " + std::to_string(cols) + " columns");
      }
      for (Eigen::Index c = 0; c < cols; ++c) {
        m(r, c) = text::parse_double(f[static_cast<std::size_t>(c)], "tensor value");
      }
    }
    return m;
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      std::uint64_t bits = 0;
      if (!in.read(reinterpret_cast<char*>(&bits), sizeof bits)) {
        throw IoError(path.string() + ": truncated binary tensor");
      }
      m(r, c) = std::bit_cast<double>(to_little(bits));
    }
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw IoError(path.string() + ": binary tensor larger than its declared shape");
  }
  return m;
}

namespace {

template <typename T>
std::string join(const std::vector<T>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ' ';
    if constexpr (std::is_floating_point_v<T>) {
      s += text::fmt(v[i]);
    } else {
      s += std::to_string(v[i]);
    }
  }
  return s;
}

}  // namespace

void save_dataset(const fs::path& dir, const Dataset& data, DataFormat format) {
  data.train.validate();
  data.validation.validate();
  if (data.train.runs() == 0) throw InvalidArgument("cannot save an empty training split");
  fs::create_directories(dir);
  const std::string ext = format == DataFormat::kText ? ".txt" : ".bin";

  auto meta = text::open_out(dir / "meta");
  const DatasetTensors& tr = data.train;
  meta << "shipsi-dataset 1\n"
       << "mode " << to_string(tr.mode) << '\n'
       << "format " << to_string(format) << '\n'
       << "steps " << tr.steps() << '\n'
       << "probes " << tr.probes() << '\n'
       << "outputs " << kDofCount << '\n'
       << "train_runs " << tr.runs() << '\n'
       << "validation_runs " << data.validation.runs() << '\n'
       << "train_seeds " << join(tr.run_seeds) << '\n'
       << "validation_seeds " << join(data.validation.run_seeds) << '\n'
       << "input_mean " << join(tr.input_scaler.mean()) << '\n'
       << "input_std " << join(tr.input_scaler.stddev()) << '\n'
       << "output_mean " << join(tr.output_scaler.mean()) << '\n'
       << "output_std " << join(tr.output_scaler.stddev()) << '\n';
  if (!meta) throw IoError("failed writing dataset meta");

  auto write_split = [&](const DatasetTensors& d, std::string_view split) {
    for (std::size_t m = 0; m < d.runs(); ++m) {
      const std::string stem = run_stem(split, m);
      write_matrix(dir / (stem + ".inputs" + ext), d.inputs[m], format);
      write_matrix(dir / (stem + ".outputs" + ext), d.outputs[m], format);
    }
  };
  write_split(data.train, "train");
  write_split(data.validation, "val");
}

Dataset load_dataset(const fs::path& dir) {
  auto in = text::open_in(dir / "meta");
  std::map<std::string, std::vector<std::string>> kv;
  std::string line;
  text::require_line(in, line, "dataset meta");
  if (line != "shipsi-dataset 1") throw IoError("unsupported dataset meta version");
  while (std::getline(in, line)) {
    const auto f = text::split_ws(line);
    if (f.empty()) continue;
    std::vector<std::string> vals;
    for (std::size_t i = 1; i < f.size(); ++i) vals.emplace_back(f[i]);
    kv[std::string(f[0])] = std::move(vals);
  }
  auto get = [&](const std::string& key) -> const std::vector<std::string>& {
    auto it = kv.find(key);
    if (it == kv.end()) throw IoError("dataset meta is missing '" + key + "'");
    return it->second;
  };
  auto scalar = [&](const std::string& key) -> const std::string& {
    const auto& v = get(key);
    if (v.size() != 1) throw IoError("dataset meta '" + key + "' must hold one value");
    return v.front();
  };
  auto count = [&](const std::string& key) {
    return static_cast<std::size_t>(text::parse_double(scalar(key), key));
  };
  auto doubles = [&](const std::string& key) {
    std::vector<double> out;
    for (const auto& s : get(key)) out.push_back(text::parse_double(s, key));
    return out;
  };
  auto seeds = [&](const std::string& key, std::size_t n) {
    std::vector<std::uint64_t> out;
    auto it = kv.find(key);
    if (it != kv.end()) {
      for (const auto& s : it->second) out.push_back(std::stoull(s));
    }
    if (out.size() != n) throw IoError("dataset meta '" + key + "' has the wrong length");
    return out;
  };

  const auto mode = parse_run_mode(scalar("mode"));
  if (!mode) throw IoError("dataset meta has an unknown mode");
  const auto format = parse_data_format(scalar("format"));
  if (!format) throw IoError("dataset meta has an unknown format");
  const std::size_t steps = count("steps");
  const std::size_t probes = count("probes");
  if (count("outputs") != kDofCount) throw IoError("dataset must have 6 outputs");
  const std::size_t n_train = count("train_runs");
  const std::size_t n_val = count("validation_runs");

  Standardizer in_scaler(doubles("input_mean"), doubles("input_std"));
  Standardizer out_scaler(doubles("output_mean"), doubles("output_std"));
  if (in_scaler.channels() != probes || out_scaler.channels() != kDofCount) {
    throw IoError("dataset standardizer widths disagree with declared shapes");
  }

  const std::string ext = *format == DataFormat::kText ? ".txt" : ".bin";
  auto read_split = [&](std::string_view split, std::size_t n,
                        std::vector<std::uint64_t> run_seeds) {
    DatasetTensors d;
    d.mode = *mode;
    d.input_scaler = in_scaler;
    d.output_scaler = out_scaler;
    d.run_seeds = std::move(run_seeds);
    for (std::size_t m = 0; m < n; ++m) {
      const std::string stem = run_stem(split, m);
      d.inputs.push_back(read_matrix(dir / (stem + ".inputs" + ext),
                                     static_cast<Eigen::Index>(steps),
                                     static_cast<Eigen::Index>(probes), *format));
      d.outputs.push_back(read_matrix(dir / (stem + ".outputs" + ext),
                                      static_cast<Eigen::Index>(steps),
                                      static_cast<Eigen::Index>(kDofCount), *format));
    }
    return d;
  };
  Dataset data;
  data.train = read_split("train", n_train, seeds("train_seeds", n_train));
  data.validation = read_split("val", n_val, seeds("validation_seeds", n_val));
  return data;
}

}  // namespace shipsi

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

#include "core/checkpoint.hpp"

#include <istream>
#include <map>
#include <ostream>
#include <string>

#include "core/textio.hpp"

namespace shipsi {

namespace {

constexpr const char* kMagic = "shipsi-checkpoint 1";
constexpr const char* kInitScheme = "uniform-fan-in";

using Fields = std::map<std::string, std::vector<std::string>>;

void put_list(std::ostream& out, const char* key, const std::vector<double>& v) {
  out << key;
  for (double x : v) out << ' ' << text::fmt(x);
  out << '\n';
}

const std::vector<std::string>& field(const Fields& f, const std::string& key) {
  auto it = f.find(key);
  if (it == f.end()) throw IoError("checkpoint is missing '" + key + "'");
  return it->second;
}

const std::string& scalar(const Fields& f, const std::string& key) {
  const auto& v = field(f, key);
  if (v.size() != 1) throw IoError("checkpoint field '" + key + "' must hold one value");
  return v.front();
}

std::size_t to_size(const std::string& s, const std::string& what) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw IoError("cannot parse " + what + " from '" + s + "'");
  }
  return v;
}

std::uint64_t to_u64(const std::string& s, const std::string& what) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw IoError("cannot parse " + what + " from '" + s + "'");
  }
  return v;
}

std::vector<double> to_doubles(const std::vector<std::string>& v, const std::string& what) {
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& s : v) out.push_back(text::parse_double(s, what));
  return out;
}

Standardizer scaler_from(const Fields& f, const std::string& prefix) {
  auto mean = to_doubles(field(f, prefix + "_mean"), prefix + "_mean");
  auto sd = to_doubles(field(f, prefix + "_std"), prefix + "_std");
  if (mean.size() != sd.size()) throw IoError("checkpoint " + prefix + " scaler lengths differ");
  if (mean.empty()) return {};
  return Standardizer(std::move(mean), std::move(sd));
}

void write_tensor(std::ostream& out, const std::string& name, const Eigen::MatrixXd& m) {
  out << "tensor " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ' ';
      out << text::fmt(m(i, j));
    }
    out << '\n';
  }
}

void read_tensor(std::istream& in, const std::string& name, Eigen::Index rows, Eigen::Index cols,
                 double* dst_colmajor) {
  std::string line;
  text::require_line(in, line, "tensor " + name);
  const auto head = text::split_ws(line);
  if (head.size() != 4 || head[0] != "tensor" || head[1] != name) {
    throw IoError("expected tensor '" + name + "', found '" + line + "'");
  }
  const auto r = to_size(std::string(head[2]), name + " rows");
  const auto c = to_size(std::string(head[3]), name + " cols");
  if (static_cast<Eigen::Index>(r) != rows || static_cast<Eigen::Index>(c) != cols) {
    throw IoError("tensor '" + name + "' is " + std::to_string(r) + "x" + std::to_string(c) +
                  ", expected " + std::to_string(rows) + "x" + std::to_string(cols));
  }
  for (Eigen::Index i = 0; i < rows; ++i) {
    text::require_line(in, line, "tensor " + name);
    const auto cells = text::split_ws(line);
    if (static_cast<Eigen::Index>(cells.size()) != cols) {
      throw IoError("tensor '" + name + "' row " + std::to_string(i) + " has wrong width");
    }
    for (Eigen::Index j = 0; j < cols; ++j) {
      dst_colmajor[j * rows + i] = text::parse_double(cells[static_cast<std::size_t>(j)], name);
    }
  }
}

}  // namespace

void write_checkpoint(std::ostream& out, const LstmModel& model) {
  model.validate();
  out << kMagic << '\n';
  out << "mode " << to_string(model.mode) << '\n';
  out << "layers " << model.layer_count() << '\n';
  out << "units " << model.units() << '\n';
  out << "inputs " << model.inputs() << '\n';
  out << "outputs " << model.outputs() << '\n';
  out << "steps " << model.steps << '\n';
  out << "dropout " << text::fmt(model.dropout_rate) << '\n';
  out << "mask " << to_string(model.mask_mode) << '\n';
  out << "init_seed " << model.init_seed << '\n';
  out << "init_scheme " << kInitScheme << '\n';
  out << "forget_bias " << text::fmt(model.forget_bias) << '\n';
  out << "probes";
  for (const auto& o : model.layout.offsets) out << ' ' << text::fmt(o.x()) << ' ' << text::fmt(o.y());
  out << '\n';
  put_list(out, "input_mean", model.input_scaler.mean());
  put_list(out, "input_std", model.input_scaler.stddev());
  put_list(out, "output_mean", model.output_scaler.mean());
  put_list(out, "output_std", model.output_scaler.stddev());

  const auto names = model.params.tensor_names();
  std::size_t k = 0;
  for (const auto& l : model.params.layers) {
    write_tensor(out, names[k++], l.weights);
    write_tensor(out, names[k++], l.bias);
  }
  write_tensor(out, names[k++], model.params.dense_weights);
  write_tensor(out, names[k], model.params.dense_bias);
  if (!out) throw IoError("failed writing checkpoint");
}

LstmModel read_checkpoint(std::istream& in) {
  std::string line;
  text::require_line(in, line, "checkpoint header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kMagic) throw IoError("not a shipsi checkpoint (header '" + line + "')");

  Fields f;
  while (in.peek() != 't' && std::getline(in, line)) {
    const auto tok = text::split_ws(line);
    if (tok.empty()) continue;
    auto& v = f[std::string(tok[0])];
    for (std::size_t i = 1; i < tok.size(); ++i) v.emplace_back(tok[i]);
  }

  const auto mode = parse_run_mode(scalar(f, "mode"));
  if (!mode) throw IoError("checkpoint has unknown mode '" + scalar(f, "mode") + "'");
  const auto mask = parse_mask_mode(scalar(f, "mask"));
  if (!mask) throw IoError("checkpoint has unknown mask mode '" + scalar(f, "mask") + "'");
  if (scalar(f, "init_scheme") != kInitScheme) {
    throw IoError("checkpoint has unknown init scheme '" + scalar(f, "init_scheme") + "'");
  }
  const auto layers = to_size(scalar(f, "layers"), "layers");
  const auto units = static_cast<Eigen::Index>(to_size(scalar(f, "units"), "units"));
  const auto inputs = static_cast<Eigen::Index>(to_size(scalar(f, "inputs"), "inputs"));
  const auto outputs = static_cast<Eigen::Index>(to_size(scalar(f, "outputs"), "outputs"));
  if (layers == 0 || units == 0 || inputs == 0 || outputs == 0) {
    throw IoError("checkpoint dimensions must be positive");
  }

  LstmModel m;
  m.mode = *mode;
  m.mask_mode = *mask;
  m.steps = to_size(scalar(f, "steps"), "steps");
  m.dropout_rate = text::parse_double(scalar(f, "dropout"), "dropout");
  m.init_seed = to_u64(scalar(f, "init_seed"), "init_seed");
  m.forget_bias = text::parse_double(scalar(f, "forget_bias"), "forget_bias");
  const auto probes = to_doubles(field(f, "probes"), "probes");
  if (probes.size() % 2 != 0) throw IoError("checkpoint probe list must hold (x, y) pairs");
  for (std::size_t i = 0; i < probes.size(); i += 2) {
    m.layout.offsets.emplace_back(probes[i], probes[i + 1]);
  }
  m.input_scaler = scaler_from(f, "input");
  m.output_scaler = scaler_from(f, "output");

  const auto names = [&] {
    LstmParams shape;
    shape.layers.resize(layers);
    return shape.tensor_names();
  }();
  std::size_t k = 0;
  Eigen::Index in_dim = inputs;
  for (std::size_t l = 0; l < layers; ++l) {
    LstmLayerParams p;
    p.weights.resize(4 * units, units + in_dim);
    p.bias.resize(4 * units);
    read_tensor(in, names[k++], p.weights.rows(), p.weights.cols(), p.weights.data());
    read_tensor(in, names[k++], p.bias.size(), 1, p.bias.data());
    m.params.layers.push_back(std::move(p));
    in_dim = units;
  }
  m.params.dense_weights.resize(outputs, units);
  m.params.dense_bias.resize(outputs);
  read_tensor(in, names[k++], outputs, units, m.params.dense_weights.data());
  read_tensor(in, names[k], outputs, 1, m.params.dense_bias.data());

  if (!m.layout.offsets.empty() && static_cast<Eigen::Index>(m.layout.size()) != inputs) {
    throw IoError("checkpoint probe count does not match its input width");
  }
  if (!m.input_scaler.empty() && static_cast<Eigen::Index>(m.input_scaler.channels()) != inputs) {
    throw IoError("checkpoint input scaler width does not match its input width");
  }
  if (!m.output_scaler.empty() &&
      static_cast<Eigen::Index>(m.output_scaler.channels()) != outputs) {
    throw IoError("checkpoint output scaler width does not match its output width");
  }
  try {
    m.validate();
  } catch (const Error& e) {
    throw IoError(std::string("invalid checkpoint: ") + e.what());
  }
  return m;
}

void save_checkpoint(const std::filesystem::path& path, const LstmModel& model) {
  auto out = text::open_out(path);
  write_checkpoint(out, model);
}

LstmModel load_checkpoint(const std::filesystem::path& path) {
  auto in = text::open_in(path);
  return read_checkpoint(in);
}

void write_loss_history(std::ostream& out, const std::vector<double>& losses) {
  out << "epoch,loss\n";
  for (std::size_t i = 0; i < losses.size(); ++i) out << i + 1 << ',' << text::fmt(losses[i]) << '\n';
  if (!out) throw IoError("failed writing loss history");
}

std::vector<double> read_loss_history(std::istream& in) {
  std::string line;
  text::require_line(in, line, "loss history header");
  std::vector<double> out;
  while (std::getline(in, line)) {
    const auto tok = text::split_ws(line);
    if (tok.empty()) continue;
    if (tok.size() != 2) throw IoError("malformed loss history row '" + line + "'");
    out.push_back(text::parse_double(tok[1], "loss"));
  }
  return out;
}

}  // namespace shipsi

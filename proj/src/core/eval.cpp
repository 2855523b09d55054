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

#include "core/eval.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include "core/error.hpp"
#include "core/textio.hpp"

namespace shipsi {

namespace {

void check_pair(std::span<const double> y, std::span<const double> yhat) {
  if (y.empty()) throw InvalidArgument("error metrics need at least one sample");
  if (y.size() != yhat.size()) throw InvalidArgument("error metrics need equal-length series");
}

std::size_t to_size(std::string_view s, std::string_view what) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw IoError("cannot parse " + std::string(what) + " from '" + std::string(s) + "'");
  }
  return v;
}

std::size_t dof_index(std::string_view name, const std::array<std::string, kDofCount>& dof) {
  for (std::size_t i = 0; i < kDofCount; ++i) {
    if (dof[i] == name) return i;
  }
  throw IoError("unknown degree of freedom '" + std::string(name) + "'");
}

}  // namespace

double l2_error(std::span<const double> y, std::span<const double> yhat) {
  check_pair(y, yhat);
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += (y[i] - yhat[i]) * (y[i] - yhat[i]);
  return std::sqrt(s / static_cast<double>(y.size()));
}

double linf_error(std::span<const double> y, std::span<const double> yhat) {
  check_pair(y, yhat);
  double m = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) m = std::max(m, std::abs(y[i] - yhat[i]));
  return m;
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw InvalidArgument("quantiles need at least one value");
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("quantile level must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

Quantiles error_quantiles(std::span<const double> values) {
  std::vector<double> v(values.begin(), values.end());
  return {quantile(v, 0.25), quantile(v, 0.5), quantile(v, 0.75)};
}

RunError evaluate_run(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& prediction) {
  if (truth.rows() != prediction.rows() || truth.cols() != static_cast<Eigen::Index>(kDofCount) ||
      prediction.cols() != static_cast<Eigen::Index>(kDofCount)) {
    throw InvalidArgument("evaluation needs matching T x 6 matrices");
  }
  RunError e;
  for (std::size_t c = 0; c < kDofCount; ++c) {
    const Eigen::VectorXd y = truth.col(static_cast<Eigen::Index>(c));
    const Eigen::VectorXd p = prediction.col(static_cast<Eigen::Index>(c));
    std::span<const double> ys(y.data(), static_cast<std::size_t>(y.size()));
    std::span<const double> ps(p.data(), static_cast<std::size_t>(p.size()));
    e.l2[c] = l2_error(ys, ps);
    e.linf[c] = linf_error(ys, ps);
  }
  return e;
}

// ---------------------------------------------------------------------------

void Binning::validate() const {
  if (bins == 0) throw InvalidArgument("a histogram needs at least one bin");
  if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw InvalidArgument("histogram range must be finite and non-empty");
  }
}

double freedman_diaconis_width(std::span<const double> samples) {
  if (samples.size() < 2) throw InvalidArgument("binning needs at least two samples");
  std::vector<double> v(samples.begin(), samples.end());
  const double iqr = quantile(v, 0.75) - quantile(v, 0.25);
  return 2.0 * iqr / std::cbrt(static_cast<double>(samples.size()));
}

Binning shared_binning(std::span<const double> reference, std::span<const double> other) {
  double width = freedman_diaconis_width(reference);
  auto [rmin, rmax] = std::minmax_element(reference.begin(), reference.end());
  double lo = *rmin, hi = *rmax;
  for (double v : other) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (!(hi > lo)) hi = lo + 1.0;
  if (!(width > 0.0)) width = (hi - lo);
  Binning b;
  b.bins = static_cast<std::size_t>(std::max(1.0, std::ceil((hi - lo) / width)));
  b.lo = lo;
  b.hi = lo + width * static_cast<double>(b.bins);
  return b;
}

Pdf pdf_estimate(std::span<const double> samples, const Binning& binning) {
  binning.validate();
  if (samples.size() < 2) throw InvalidArgument("a density estimate needs at least two samples");
  Pdf p;
  p.binning = binning;
  p.density.assign(binning.bins, 0.0);
  std::size_t kept = 0;
  const double w = binning.width();
  for (double v : samples) {
    if (!(v >= binning.lo && v <= binning.hi)) continue;
    auto i = static_cast<std::size_t>((v - binning.lo) / w);
    if (i >= binning.bins) i = binning.bins - 1;
    p.density[i] += 1.0;
    ++kept;
  }
  if (kept == 0) throw InvalidArgument("no samples fall inside the histogram range");
  for (double& d : p.density) d /= static_cast<double>(kept) * w;
  return p;
}

Pdf pdf_estimate(std::span<const double> samples, std::size_t bins, double lo, double hi) {
  return pdf_estimate(samples, Binning{lo, hi, bins});
}

double pdf_l1_distance(const Pdf& p, const Pdf& q) {
  if (!(p.binning == q.binning) || p.density.size() != q.density.size()) {
    throw InvalidArgument("density comparison needs identical binning");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < p.density.size(); ++i) s += std::abs(p.density[i] - q.density[i]);
  return s * p.binning.width();
}

double pdf_tail_l1_distance(const Pdf& p, const Pdf& q, double mean, double sigma, double k) {
  if (!(p.binning == q.binning) || p.density.size() != q.density.size()) {
    throw InvalidArgument("density comparison needs identical binning");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < p.density.size(); ++i) {
    const double c = p.binning.center(i);
    if (std::abs(c - mean) > k * sigma) s += std::abs(p.density[i] - q.density[i]);
  }
  return s * p.binning.width();
}

// ---------------------------------------------------------------------------

void ConvergenceTable::add_cell(std::size_t probes, std::size_t runs,
                                std::span<const RunError> errors,
                                const std::array<std::string, kDofCount>& dof) {
  for (const char* metric : {"L2", "Linf"}) {
    const bool l2 = metric[1] == '2';
    for (std::size_t c = 0; c < kDofCount; ++c) {
      std::vector<double> v;
      v.reserve(errors.size());
      for (const auto& e : errors) v.push_back(l2 ? e.l2[c] : e.linf[c]);
      rows.push_back({probes, runs, dof[c], metric, error_quantiles(v)});
    }
  }
}

const TableRow* ConvergenceTable::find(std::size_t probes, std::size_t runs,
                                       const std::string& dof, const std::string& metric) const {
  for (const auto& r : rows) {
    if (r.probes == probes && r.runs == runs && r.dof == dof && r.metric == metric) return &r;
  }
  return nullptr;
}

void write_table(std::ostream& out, const ConvergenceTable& table) {
  out << "probes,runs,dof,metric,q25,median,q75\n";
  for (const auto& [k, m] : table.invalid) out << "# invalid " << k << ' ' << m << '\n';
  for (const auto& r : table.rows) {
    out << r.probes << ',' << r.runs << ',' << r.dof << ',' << r.metric << ','
        << text::fmt(r.q.q25) << ',' << text::fmt(r.q.median) << ',' << text::fmt(r.q.q75)
        << '\n';
  }
  if (!out) throw IoError("failed writing table");
}

ConvergenceTable read_table(std::istream& in) {
  ConvergenceTable t;
  std::string line;
  text::require_line(in, line, "table header");
  while (std::getline(in, line)) {
    const auto f = text::split_ws(line);
    if (f.empty()) continue;
    if (f[0] == "#") {
      if (f.size() == 4 && f[1] == "invalid") {
        t.invalid.emplace_back(to_size(f[2], "probes"), to_size(f[3], "runs"));
      }
      continue;
    }
    if (f.size() != 7) throw IoError("table rows need 7 fields: '" + line + "'");
    TableRow r;
    r.probes = to_size(f[0], "probes");
    r.runs = to_size(f[1], "runs");
    r.dof = std::string(f[2]);
    r.metric = std::string(f[3]);
    r.q = {text::parse_double(f[4], "q25"), text::parse_double(f[5], "median"),
           text::parse_double(f[6], "q75")};
    t.rows.push_back(std::move(r));
  }
  return t;
}

void write_run_errors(std::ostream& out, std::span<const RunError> errors,
                      const std::array<std::string, kDofCount>& dof) {
  out << "run,seed,dof,l2,linf\n";
  for (const auto& e : errors) {
    for (std::size_t c = 0; c < kDofCount; ++c) {
      out << e.run << ',' << e.seed << ',' << dof[c] << ',' << text::fmt(e.l2[c]) << ','
          << text::fmt(e.linf[c]) << '\n';
    }
  }
  if (!out) throw IoError("failed writing run errors");
}

std::vector<RunError> read_run_errors(std::istream& in,
                                      const std::array<std::string, kDofCount>& dof) {
  std::vector<RunError> out;
  std::string line;
  text::require_line(in, line, "run error header");
  while (std::getline(in, line)) {
    const auto f = text::split_ws(line);
    if (f.empty()) continue;
    if (f.size() != 5) throw IoError("run error rows need 5 fields: '" + line + "'");
    const std::size_t run = to_size(f[0], "run");
    if (out.empty() || out.back().run != run) {
      out.emplace_back();
      out.back().run = run;
      out.back().seed = to_size(f[1], "seed");
    }
    const std::size_t c = dof_index(f[2], dof);
    out.back().l2[c] = text::parse_double(f[3], "l2");
    out.back().linf[c] = text::parse_double(f[4], "linf");
  }
  return out;
}

}  // namespace shipsi

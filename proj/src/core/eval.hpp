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

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "core/dataset.hpp"

namespace shipsi {

// Root-mean-square difference between two equal-length series.
double l2_error(std::span<const double> y, std::span<const double> yhat);
// Largest absolute difference between two equal-length series.
double linf_error(std::span<const double> y, std::span<const double> yhat);

struct Quantiles {
  double q25 = 0.0;
  double median = 0.0;
  double q75 = 0.0;
  bool operator==(const Quantiles&) const = default;
};

// Quantile with linear interpolation between order statistics
// (position p * (n - 1) in the sorted sample).
double quantile(std::vector<double> values, double p);
Quantiles error_quantiles(std::span<const double> values);

// Per-DoF errors of one validation run, physical units.
struct RunError {
  std::size_t run = 0;
  std::uint64_t seed = 0;
  std::array<double, kDofCount> l2{};
  std::array<double, kDofCount> linf{};
};

// Column-wise errors of a T x 6 prediction against the truth.
RunError evaluate_run(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& prediction);

// ---------------------------------------------------------------------------
// Histograms

struct Binning {
  double lo = 0.0;
  double hi = 1.0;
  std::size_t bins = 1;

  double width() const { return (hi - lo) / static_cast<double>(bins); }
  double center(std::size_t i) const { return lo + (static_cast<double>(i) + 0.5) * width(); }
  void validate() const;
  bool operator==(const Binning&) const = default;
};

// 2 * IQR / n^(1/3). Zero when the interquartile range is zero.
double freedman_diaconis_width(std::span<const double> samples);

// Freedman-Diaconis width of `reference`, over a range covering both sets.
Binning shared_binning(std::span<const double> reference, std::span<const double> other);

// Normalized histogram: densities whose sum times the bin width is 1.
// Samples outside [lo, hi] are dropped before normalizing.
struct Pdf {
  Binning binning;
  std::vector<double> density;
};

Pdf pdf_estimate(std::span<const double> samples, const Binning& binning);
Pdf pdf_estimate(std::span<const double> samples, std::size_t bins, double lo, double hi);

// Integral of |p - q|; lies in [0, 2]. Throws on differing binning.
double pdf_l1_distance(const Pdf& p, const Pdf& q);
// Same integral restricted to bins whose centre lies beyond mean +- k sigma.
double pdf_tail_l1_distance(const Pdf& p, const Pdf& q, double mean, double sigma,
                            double k = 2.0);

// ---------------------------------------------------------------------------
// Study tables

struct TableRow {
  std::size_t probes = 0;
  std::size_t runs = 0;
  std::string dof;
  std::string metric;  // "L2" or "Linf"
  Quantiles q;
  bool operator==(const TableRow&) const = default;
};

// Quantile summaries over a validation set, one row per (cell, DoF, metric).
struct ConvergenceTable {
  std::vector<TableRow> rows;
  // Cells whose training failed, as (probes, runs).
  std::vector<std::pair<std::size_t, std::size_t>> invalid;

  // Adds the six L2 rows and six Linf rows of one grid cell.
  void add_cell(std::size_t probes, std::size_t runs, std::span<const RunError> errors,
                const std::array<std::string, kDofCount>& dof);
  const TableRow* find(std::size_t probes, std::size_t runs, const std::string& dof,
                       const std::string& metric) const;
  bool operator==(const ConvergenceTable&) const = default;
};

// `probes,runs,dof,metric,q25,median,q75`, 17 significant digits. Invalid
// cells are listed as `# invalid probes runs` comment lines.
void write_table(std::ostream& out, const ConvergenceTable& table);
ConvergenceTable read_table(std::istream& in);

// `run,seed,dof,l2,linf` rows.
void write_run_errors(std::ostream& out, std::span<const RunError> errors,
                      const std::array<std::string, kDofCount>& dof);
std::vector<RunError> read_run_errors(std::istream& in,
                                      const std::array<std::string, kDofCount>& dof);

}  // namespace shipsi

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

#include "core/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "core/checkpoint.hpp"
#include "core/error.hpp"
#include "core/parallel.hpp"
#include "core/rng.hpp"
#include "core/textio.hpp"

namespace shipsi {

namespace fs = std::filesystem;

namespace {

void say(const Logger& log, const std::string& msg) {
  if (log) log(msg);
}

std::string numbered(const char* prefix, std::size_t i, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s%04zu%s", prefix, i, ext);
  return buf;
}

// Refuses to reuse a non-empty directory unless forced.
void prepare_dir(const fs::path& dir, bool force) {
  if (fs::exists(dir) && !fs::is_directory(dir)) {
    throw IoError(dir.string() + " exists and is not a directory");
  }
  if (fs::exists(dir) && !fs::is_empty(dir) && !force) {
    throw IoError(dir.string() + " is not empty; pass --force to overwrite");
  }
  fs::create_directories(dir);
}

void refuse_existing(const fs::path& file, bool force) {
  if (fs::exists(file) && !force) {
    throw IoError(file.string() + " exists; pass --force to overwrite");
  }
}

// Writes through a temporary file so readers never see a partial file.
template <typename Fn>
void write_atomically(const fs::path& path, Fn&& body) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    auto out = text::open_out(tmp);
    body(out);
    out.flush();
    if (!out) throw IoError("failed writing " + tmp.string());
  }
  fs::rename(tmp, path);
}

Eigen::MatrixXd restandardize(const Eigen::MatrixXd& x, const Standardizer& from,
                              const Standardizer& to) {
  if (from == to) return x;
  return to.apply(from.invert(x));
}

std::uint64_t cell_seed(std::uint64_t seed, std::size_t probes, std::size_t runs) {
  return derive_seed(seed, 0xce11 + probes, runs);
}

std::uint64_t validation_mc_seed(std::uint64_t seed, std::size_t run) {
  return derive_seed(seed, 0x7a11d, run);
}

}  // namespace

// ---------------------------------------------------------------------------

WaveComponents run_waves(const ExperimentConfig& config, std::uint64_t run_seed) {
  return discretize_spectrum(config.spectrum, config.components, config.omega_min(),
                             config.omega_max(), derive_seed(run_seed, 0x3a4e));
}

RunSet simulate_runs(const ExperimentConfig& config, std::uint64_t first_seed, std::size_t count) {
  RunSet set;
  set.seeds.resize(count);
  set.runs.resize(count);
  set.waves.resize(count);
  SimulationOptions opts = config.simulation();
  opts.initial.yaw = config.pid.desired_heading;
  parallel_for(count, [&](std::size_t i) {
    const std::uint64_t seed = first_seed + i;
    set.seeds[i] = seed;
    set.waves[i] = run_waves(config, seed);
    set.runs[i] = simulate(config.vessel, config.pid, set.waves[i], opts);
    set.runs[i].seed = seed;
  });
  return set;
}

EncounterFrame training_frame(const ExperimentConfig& config, const RunSet& train, std::size_t m) {
  if (m == 0 || m > train.size()) throw InvalidArgument("frame needs 1..pool-size training runs");
  return estimate_frame(std::span<const Trajectory>(train.runs.data(), m), config.frame_yaw);
}

Dataset build_dataset(const ExperimentConfig& config, const RunSet& train, std::size_t m,
                      const RunSet& validation, std::size_t probes) {
  if (m == 0 || m > train.size()) throw InvalidArgument("requested more training runs than simulated");
  const ProbeLayout layout = probe_layout(probes, config.span());
  const bool estimated = config.frame_source == FrameSource::kEstimated;

  EncounterFrame shared;
  if (estimated) shared = training_frame(config, train, m);
  std::vector<EncounterFrame> own;
  if (!estimated) {
    for (std::size_t i = 0; i < m; ++i) own.push_back(actual_frame(train.runs[i]));
    for (const auto& r : validation.runs) own.push_back(actual_frame(r));
  }
  auto frame_of = [&](std::size_t i) -> const EncounterFrame* {
    return estimated ? &shared : &own[i];
  };

  std::vector<RunSource> tr, va;
  for (std::size_t i = 0; i < m; ++i) tr.push_back({&train.runs[i], &train.waves[i], frame_of(i)});
  for (std::size_t j = 0; j < validation.size(); ++j) {
    va.push_back({&validation.runs[j], &validation.waves[j], frame_of(m + j)});
  }
  Dataset d;
  d.train = assemble_training(tr, layout, config.mode);
  if (!va.empty()) d.validation = assemble_validation(va, layout, config.mode, d.train);
  return d;
}

// ---------------------------------------------------------------------------

void cmd_generate(const ExperimentConfig& config, const fs::path& out, bool force,
                  const Logger& log) {
  config.validate();
  prepare_dir(out, force);
  fs::remove_all(out / "runs");
  fs::remove_all(out / "dataset");
  fs::create_directories(out / "runs");

  say(log, "simulating " + std::to_string(config.train_runs) + " training and " +
               std::to_string(config.validation_runs) + " validation runs");
  const RunSet train = simulate_runs(config, config.train_seed, config.train_runs);
  const RunSet val = simulate_runs(config, config.validation_seed, config.validation_runs);

  auto write_run = [&](const Trajectory& r, const WaveComponents& w, std::size_t index) {
    auto t = text::open_out(out / "runs" / numbered("run_", index, ".traj"));
    write_trajectory(t, r);
    auto c = text::open_out(out / "runs" / numbered("run_", index, ".waves"));
    write_components(c, w);
  };
  for (std::size_t i = 0; i < train.size(); ++i) write_run(train.runs[i], train.waves[i], i);
  for (std::size_t j = 0; j < val.size(); ++j) {
    write_run(val.runs[j], val.waves[j], train.size() + j);
  }

  {
    auto f = text::open_out(out / "frame.csv");
    write_frame(f, training_frame(config, train, train.size()));
  }
  say(log, "assembling dataset with " + std::to_string(config.probes) + " probes");
  save_dataset(out / "dataset", build_dataset(config, train, train.size(), val, config.probes),
               config.format);
  auto c = text::open_out(out / "config.txt");
  emit_config(c, config);
}

TrainResult cmd_train(const ExperimentConfig& config, const fs::path& dataset_dir,
                      const fs::path& out, bool force, const Logger& log) {
  config.validate();
  const Dataset data = load_dataset(dataset_dir);
  if (data.train.probes() != config.probes) {
    throw ConfigError("probes.count: dataset has " + std::to_string(data.train.probes()) +
                      " probes but the config asks for " + std::to_string(config.probes));
  }
  if (data.train.mode != config.mode) {
    throw ConfigError("run.mode: dataset was built for " + to_string(data.train.mode));
  }
  fs::create_directories(out);
  refuse_existing(out / "model.ckpt", force);
  refuse_existing(out / "loss.csv", force);

  say(log, "training on " + std::to_string(data.train.runs()) + " runs");
  TrainResult r = train(data.train, config.net, [&](std::size_t epoch, double loss) {
    if (epoch == 1 || epoch % 25 == 0 || epoch == config.net.epochs) {
      say(log, "epoch " + std::to_string(epoch) + " loss " + text::fmt(loss));
    }
  });
  r.model.layout = probe_layout(config.probes, config.span());
  write_atomically(out / "model.ckpt", [&](std::ostream& o) { write_checkpoint(o, r.model); });
  write_atomically(out / "loss.csv", [&](std::ostream& o) { write_loss_history(o, r.loss_history); });
  return r;
}

PredictResult cmd_predict(const PredictRequest& req) {
  if (req.samples == 0) throw InvalidArgument("--samples must be at least 1");
  if (!req.out.empty()) refuse_existing(req.out, req.force);
  const LstmModel model = load_checkpoint(req.checkpoint);
  if (model.layout.size() != model.inputs()) {
    throw InvalidArgument("checkpoint has no probe layout matching its " +
                          std::to_string(model.inputs()) + " inputs");
  }
  Trajectory run = [&] {
    auto in = text::open_in(req.run);
    return read_trajectory(in);
  }();
  fs::path waves_path = req.waves;
  if (waves_path.empty()) waves_path = fs::path(req.run).replace_extension(".waves");
  const WaveComponents waves = [&] {
    auto in = text::open_in(waves_path);
    return read_components(in);
  }();
  EncounterFrame frame;
  if (req.actual_frame) {
    frame = actual_frame(run);
  } else {
    fs::path fp = req.frame;
    if (fp.empty()) fp = req.run.parent_path().parent_path() / "frame.csv";
    auto in = text::open_in(fp);
    frame = read_frame(in);
  }
  if (frame.t != run.t) throw InvalidArgument("frame and run use different time grids");

  const Eigen::MatrixXd x = model.input_scaler.apply(probe_elevations(waves, frame, model.layout));
  PredictResult res;
  res.t = run.t;
  res.ensemble = mc_predict(model, x, req.samples, req.seed);
  res.track = integrate_velocities(res.ensemble.mean, model.mode,
                                   {run.x.front(), run.y.front(), run.yaw.front()}, run.dt);

  if (!req.out.empty()) {
    if (req.out.has_parent_path()) fs::create_directories(req.out.parent_path());
    const auto names = dof_names(model.mode);
    const Eigen::MatrixXd lo = res.ensemble.lower(), hi = res.ensemble.upper();
    write_atomically(req.out, [&](std::ostream& o) {
      o << 't';
      for (const auto& n : names) o << ' ' << n << "_mean " << n << "_std " << n << "_lo " << n << "_hi";
      o << " x y yaw\n";
      for (std::size_t i = 0; i < res.t.size(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        o << text::fmt(res.t[i]);
        for (Eigen::Index c = 0; c < res.ensemble.mean.cols(); ++c) {
          o << ' ' << text::fmt(res.ensemble.mean(r, c)) << ' ' << text::fmt(res.ensemble.std(r, c))
            << ' ' << text::fmt(lo(r, c)) << ' ' << text::fmt(hi(r, c));
        }
        o << ' ' << text::fmt(res.track.x[i]) << ' ' << text::fmt(res.track.y[i]) << ' '
          << text::fmt(res.track.yaw[i]) << '\n';
      }
    });
  }
  return res;
}

std::vector<RunError> cmd_evaluate(const ExperimentConfig& config, const fs::path& checkpoint,
                                   const fs::path& dataset_dir, const fs::path& out, bool force,
                                   const Logger& log) {
  const LstmModel model = load_checkpoint(checkpoint);
  const Dataset data = load_dataset(dataset_dir);
  const DatasetTensors& val = data.validation;
  if (val.runs() == 0) throw InvalidArgument("dataset has no validation split");
  if (val.probes() != model.inputs()) {
    throw InvalidArgument("dataset has " + std::to_string(val.probes()) +
                          " probes but the model expects " + std::to_string(model.inputs()));
  }
  fs::create_directories(out);
  refuse_existing(out / "errors.csv", force);
  refuse_existing(out / "summary.csv", force);

  say(log, "evaluating " + std::to_string(val.runs()) + " validation runs");
  std::vector<RunError> errors(val.runs());
  std::vector<Eigen::MatrixXd> truth(val.runs()), pred(val.runs());
  for (std::size_t v = 0; v < val.runs(); ++v) {
    const Eigen::MatrixXd x = restandardize(val.inputs[v], val.input_scaler, model.input_scaler);
    pred[v] = mc_predict(model, x, config.predict_samples, validation_mc_seed(config.predict_seed, v)).mean;
    truth[v] = val.output_scaler.invert(val.outputs[v]);
    errors[v] = evaluate_run(truth[v], pred[v]);
    errors[v].run = v;
    errors[v].seed = val.run_seeds[v];
  }
  const auto names = dof_names(model.mode);
  ConvergenceTable table;
  table.add_cell(model.inputs(), data.train.runs(), errors, names);
  write_atomically(out / "errors.csv", [&](std::ostream& o) { write_run_errors(o, errors, names); });
  write_atomically(out / "summary.csv", [&](std::ostream& o) { write_table(o, table); });
  write_atomically(out / "pdf_summary.csv", [&](std::ostream& o) {
    o << "dof,bins,l1,tail_l1\n";
    for (std::size_t c = 0; c < kDofCount; ++c) {
      std::vector<double> a, b;
      for (std::size_t v = 0; v < truth.size(); ++v) {
        const auto cc = static_cast<Eigen::Index>(c);
        for (Eigen::Index t = 0; t < truth[v].rows(); ++t) {
          a.push_back(truth[v](t, cc));
          b.push_back(pred[v](t, cc));
        }
      }
      const PdfComparison cmp = compare_pdfs(a, b);
      o << names[c] << ',' << cmp.oracle.binning.bins << ',' << text::fmt(cmp.l1) << ','
        << text::fmt(cmp.tail_l1) << '\n';
    }
  });
  return errors;
}

// ---------------------------------------------------------------------------

std::string to_string(StudyKind kind) {
  return kind == StudyKind::kConvergence ? "convergence" : "frame-ablation";
}

std::optional<StudyKind> parse_study_kind(std::string_view text) {
  if (text == "convergence") return StudyKind::kConvergence;
  if (text == "frame-ablation") return StudyKind::kFrameAblation;
  return std::nullopt;
}

const CellResult* StudyResult::cell(std::size_t probes, std::size_t runs, FrameSource source) const {
  for (const auto& c : cells) {
    if (c.probes == probes && c.runs == runs && c.source == source) return &c;
  }
  return nullptr;
}

PdfComparison compare_pdfs(std::span<const double> oracle, std::span<const double> model) {
  PdfComparison c;
  const Binning b = shared_binning(oracle, model);
  c.oracle = pdf_estimate(oracle, b);
  c.model = pdf_estimate(model, b);
  c.l1 = pdf_l1_distance(c.oracle, c.model);
  double mean = 0.0, var = 0.0;
  for (double v : oracle) mean += v;
  mean /= static_cast<double>(oracle.size());
  for (double v : oracle) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / static_cast<double>(oracle.size()));
  c.tail_l1 = pdf_tail_l1_distance(c.oracle, c.model, mean, sd, 2.0);
  return c;
}

namespace {

struct CellJob {
  std::size_t probes, runs;
  FrameSource source;
  fs::path dir;
};

void write_predictions(const fs::path& path, const std::vector<Eigen::MatrixXd>& mean,
                       const std::vector<Eigen::MatrixXd>& std) {
  const Eigen::Index t = mean.front().rows(), c = mean.front().cols();
  Eigen::MatrixXd all(static_cast<Eigen::Index>(mean.size()) * t, 2 * c);
  for (std::size_t v = 0; v < mean.size(); ++v) {
    all.block(static_cast<Eigen::Index>(v) * t, 0, t, c) = mean[v];
    all.block(static_cast<Eigen::Index>(v) * t, c, t, c) = std[v];
  }
  fs::path tmp = path;
  tmp += ".tmp";
  write_matrix(tmp, all, DataFormat::kBinary);
  fs::rename(tmp, path);
}

void read_predictions(const fs::path& path, std::size_t runs, Eigen::Index steps,
                      std::vector<Eigen::MatrixXd>& mean, std::vector<Eigen::MatrixXd>& std) {
  const auto c = static_cast<Eigen::Index>(kDofCount);
  const Eigen::MatrixXd all =
      read_matrix(path, static_cast<Eigen::Index>(runs) * steps, 2 * c, DataFormat::kBinary);
  mean.clear();
  std.clear();
  for (std::size_t v = 0; v < runs; ++v) {
    mean.push_back(all.block(static_cast<Eigen::Index>(v) * steps, 0, steps, c));
    std.push_back(all.block(static_cast<Eigen::Index>(v) * steps, c, steps, c));
  }
}

CellResult run_cell(const ExperimentConfig& base, const CellJob& job, const RunSet& train,
                    const RunSet& val, const Logger& log) {
  CellResult cell;
  cell.probes = job.probes;
  cell.runs = job.runs;
  cell.source = job.source;
  const auto names = dof_names(base.mode);
  const std::string label = to_string(job.source) + " frame, " + std::to_string(job.probes) +
                            " probes, " + std::to_string(job.runs) + " runs";

  const fs::path errors_path = job.dir / "errors.csv";
  const fs::path pred_path = job.dir / "predictions.bin";
  const fs::path failed_path = job.dir / "failed.txt";
  if (fs::exists(failed_path)) {
    auto in = text::open_in(failed_path);
    std::getline(in, cell.failure);
    return cell;
  }
  if (fs::exists(errors_path) && fs::exists(pred_path)) {
    auto in = text::open_in(errors_path);
    cell.errors = read_run_errors(in, names);
    read_predictions(pred_path, val.size(), static_cast<Eigen::Index>(base.steps()), cell.mean,
                     cell.std);
    if (fs::exists(job.dir / "loss.csv")) {
      auto l = text::open_in(job.dir / "loss.csv");
      cell.loss_history = read_loss_history(l);
    }
    cell.valid = cell.errors.size() == val.size();
    if (cell.valid) {
      say(log, "cell " + label + ": cached");
      return cell;
    }
  }
  fs::create_directories(job.dir);

  ExperimentConfig cfg = base;
  cfg.frame_source = job.source;
  const Dataset data = build_dataset(cfg, train, job.runs, val, job.probes);
  TrainOptions opts = cfg.net;
  // Same initialization for every frame source of a cell.
  opts.seed = cell_seed(cfg.net.seed, job.probes, job.runs);
  say(log, "cell " + label + ": training");
  TrainResult tr;
  try {
    tr = shipsi::train(data.train, opts);
  } catch (const DivergenceError& e) {
    cell.failure = e.what();
    auto f = text::open_out(failed_path);
    f << cell.failure << '\n';
    say(log, "cell " + label + ": " + cell.failure);
    return cell;
  }
  tr.model.layout = probe_layout(job.probes, cfg.span());
  cell.loss_history = tr.loss_history;
  write_atomically(job.dir / "model.ckpt", [&](std::ostream& o) { write_checkpoint(o, tr.model); });
  write_atomically(job.dir / "loss.csv",
                   [&](std::ostream& o) { write_loss_history(o, tr.loss_history); });

  cell.errors.resize(val.size());
  cell.mean.resize(val.size());
  cell.std.resize(val.size());
  for (std::size_t v = 0; v < val.size(); ++v) {
    const PredictionEnsemble ens = mc_predict(tr.model, data.validation.inputs[v],
                                              cfg.predict_samples,
                                              validation_mc_seed(cfg.predict_seed, v));
    cell.mean[v] = ens.mean;
    cell.std[v] = ens.std;
    cell.errors[v] = evaluate_run(build_outputs(val.runs[v], cfg.mode), ens.mean);
    cell.errors[v].run = v;
    cell.errors[v].seed = val.seeds[v];
  }
  write_predictions(pred_path, cell.mean, cell.std);
  write_atomically(errors_path, [&](std::ostream& o) { write_run_errors(o, cell.errors, names); });
  cell.valid = true;
  say(log, "cell " + label + ": done");
  return cell;
}

void export_history(const fs::path& path, const StudyResult& s, const CellResult& cell,
                    std::size_t run, std::size_t dof, const std::string& title) {
  write_atomically(path, [&](std::ostream& o) {
    o << "# " << title << ", validation run " << run << ", seed " << s.validation_seeds[run]
      << '\n';
    o << "t,truth,mean,std,lo,hi\n";
    const auto c = static_cast<Eigen::Index>(dof);
    for (std::size_t i = 0; i < s.t.size(); ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      const double m = cell.mean[run](r, c), sd = cell.std[run](r, c);
      o << text::fmt(s.t[i]) << ',' << text::fmt(s.truth[run](r, c)) << ',' << text::fmt(m) << ','
        << text::fmt(sd) << ',' << text::fmt(m - kBandSigmas * sd) << ','
        << text::fmt(m + kBandSigmas * sd) << '\n';
    }
  });
}

void export_figures(const fs::path& out, const StudyResult& s, const CellResult& cell) {
  const auto names = dof_names(s.mode);
  fs::create_directories(out / "histories");
  write_atomically(out / "pdf_summary.csv", [&](std::ostream& o) {
    o << "probes,runs,dof,bins,l1,tail_l1\n";
    for (std::size_t c = 0; c < kDofCount; ++c) {
      std::vector<double> a, b;
      const auto cc = static_cast<Eigen::Index>(c);
      for (std::size_t v = 0; v < s.truth.size(); ++v) {
        for (Eigen::Index t = 0; t < s.truth[v].rows(); ++t) {
          a.push_back(s.truth[v](t, cc));
          b.push_back(cell.mean[v](t, cc));
        }
      }
      const PdfComparison cmp = compare_pdfs(a, b);
      o << cell.probes << ',' << cell.runs << ',' << names[c] << ',' << cmp.oracle.binning.bins
        << ',' << text::fmt(cmp.l1) << ',' << text::fmt(cmp.tail_l1) << '\n';
      write_atomically(out / ("pdf_" + names[c] + ".csv"), [&](std::ostream& p) {
        p << "center,oracle,model\n";
        for (std::size_t i = 0; i < cmp.oracle.density.size(); ++i) {
          p << text::fmt(cmp.oracle.binning.center(i)) << ',' << text::fmt(cmp.oracle.density[i])
            << ',' << text::fmt(cmp.model.density[i]) << '\n';
        }
      });
    }
  });

  for (std::size_t c = 0; c < kDofCount; ++c) {
    for (const bool l2 : {true, false}) {
      auto metric = [&](const RunError& e) { return l2 ? e.l2[c] : e.linf[c]; };
      const auto [lo, hi] = std::minmax_element(
          cell.errors.begin(), cell.errors.end(),
          [&](const RunError& a, const RunError& b) { return metric(a) < metric(b); });
      const std::string m = l2 ? "l2" : "linf";
      export_history(out / "histories" / ("best_" + m + "_" + names[c] + ".csv"), s, cell,
                     lo->run, c, "best by " + m);
      export_history(out / "histories" / ("worst_" + m + "_" + names[c] + ".csv"), s, cell,
                     hi->run, c, "worst by " + m);
    }
  }
}

}  // namespace

StudyResult run_study(const ExperimentConfig& config, StudyKind kind, const fs::path& out,
                      const Logger& log) {
  config.validate();
  fs::create_directories(out / "cells");
  {
    // Cached cells are only valid for the configuration that produced them.
    // Grid and frame source do not change a cell, so they are left out.
    ExperimentConfig key = config;
    key.study_probes = {1};
    key.study_runs = {1};
    key.frame_source = FrameSource::kEstimated;
    std::ostringstream now;
    emit_config(now, key);
    const fs::path stamp = out / "cells" / "key.txt";
    if (fs::exists(stamp)) {
      auto in = text::open_in(stamp);
      std::ostringstream before;
      before << in.rdbuf();
      if (before.str() != now.str()) {
        throw ConfigError("study directory " + out.string() +
                          " was produced by a different configuration");
      }
    } else {
      write_atomically(stamp, [&](std::ostream& o) { o << now.str(); });
    }
    write_atomically(out / "config.txt", [&](std::ostream& o) { emit_config(o, config); });
  }

  std::vector<FrameSource> sources{config.frame_source};
  if (kind == StudyKind::kFrameAblation) sources = {FrameSource::kEstimated, FrameSource::kActual};
  const std::size_t pool = *std::max_element(config.study_runs.begin(), config.study_runs.end());

  say(log, "simulating " + std::to_string(pool) + " training and " +
               std::to_string(config.validation_runs) + " validation runs");
  const RunSet train = simulate_runs(config, config.train_seed, pool);
  const RunSet val = simulate_runs(config, config.validation_seed, config.validation_runs);

  StudyResult s;
  s.mode = config.mode;
  s.validation_seeds = val.seeds;
  s.t = val.runs.front().t;
  for (const auto& r : val.runs) s.truth.push_back(build_outputs(r, config.mode));
  {
    write_atomically(out / "validation_seeds.txt", [&](std::ostream& o) {
      for (auto seed : val.seeds) o << seed << '\n';
    });
  }

  std::vector<CellJob> jobs;
  for (FrameSource src : sources) {
    for (std::size_t k : config.study_probes) {
      for (std::size_t m : config.study_runs) {
        jobs.push_back({k, m, src,
                        out / "cells" /
                            (to_string(src) + "-p" + std::to_string(k) + "-r" + std::to_string(m))});
      }
    }
  }
  s.cells.resize(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t i) { s.cells[i] = run_cell(config, jobs[i], train, val, log); });

  const auto names = dof_names(config.mode);
  for (FrameSource src : sources) {
    ConvergenceTable table;
    for (const auto& c : s.cells) {
      if (c.source != src) continue;
      if (c.valid) {
        table.add_cell(c.probes, c.runs, c.errors, names);
      } else {
        table.invalid.emplace_back(c.probes, c.runs);
      }
    }
    const std::string file =
        kind == StudyKind::kConvergence ? "table.csv" : "table_" + to_string(src) + ".csv";
    write_atomically(out / file, [&](std::ostream& o) { write_table(o, table); });
    s.tables.emplace_back(src, std::move(table));
  }

  const std::size_t kmax = *std::max_element(config.study_probes.begin(), config.study_probes.end());
  if (const CellResult* big = s.cell(kmax, pool, sources.front()); big && big->valid) {
    export_figures(out, s, *big);
  }
  return s;
}

ConvergenceTable convergence_study(const ExperimentConfig& config, const fs::path& out,
                                   const Logger& log) {
  return run_study(config, StudyKind::kConvergence, out, log).tables.front().second;
}

std::pair<ConvergenceTable, ConvergenceTable> frame_ablation(const ExperimentConfig& config,
                                                             const fs::path& out,
                                                             const Logger& log) {
  StudyResult s = run_study(config, StudyKind::kFrameAblation, out, log);
  return {s.tables[0].second, s.tables[1].second};
}

}  // namespace shipsi

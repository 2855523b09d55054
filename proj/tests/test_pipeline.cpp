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

#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"

#include "core/checkpoint.hpp"
#include "core/error.hpp"
#include "core/pipeline.hpp"

using namespace shipsi;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("shipsi_pipe_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig tiny() {
  ExperimentConfig c;
  c.train_runs = 2;
  c.validation_runs = 1;
  c.duration = 20;
  c.components = 60;
  c.probes = 3;
  c.net.units = 4;
  c.net.layers = 2;
  c.net.epochs = 3;
  c.predict_samples = 4;
  return c;
}

std::size_t count_files(const fs::path& dir, const std::string& ext) {
  std::size_t n = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ext) ++n;
  }
  return n;
}

}  // namespace

TEST_SUITE("pipeline") {
  TEST_CASE("generate writes runs, frame and dataset deterministically") {
    auto c = tiny();
    c.duration = 120;
    const auto a = scratch("gen_a"), b = scratch("gen_b");
    cmd_generate(c, a, false);
    CHECK(count_files(a / "runs", ".traj") == 3);
    CHECK(count_files(a / "runs", ".waves") == 3);
    CHECK(fs::exists(a / "frame.csv"));
    CHECK(fs::exists(a / "dataset" / "meta"));
    const auto d = load_dataset(a / "dataset");
    CHECK(d.train.runs() == 2);
    CHECK(d.validation.runs() == 1);
    CHECK(d.train.steps() == 240);
    CHECK(d.validation.run_seeds.front() == c.validation_seed);

    CHECK_THROWS_AS(cmd_generate(c, a, false), IoError);
    cmd_generate(c, b, false);
    for (const auto& e : fs::recursive_directory_iterator(a)) {
      if (!e.is_regular_file()) continue;
      CHECK(slurp(e.path()) == slurp(b / fs::relative(e.path(), a)));
    }
    cmd_generate(c, a, true);
    CHECK(slurp(a / "frame.csv") == slurp(b / "frame.csv"));
    fs::remove_all(a);
    fs::remove_all(b);
  }

  TEST_CASE("train, predict and evaluate") {
    auto c = tiny();
    const auto dir = scratch("train");
    cmd_generate(c, dir, false);

    SUBCASE("zero epochs leaves the initialization") {
      auto z = c;
      z.net.epochs = 0;
      const auto r = cmd_train(z, dir / "dataset", dir / "m0", false);
      CHECK(r.loss_history.empty());
      const auto init = initialize_model(3, 4, 2, kDofCount, z.net.dropout, z.net.seed,
                                         z.net.forget_bias);
      const auto saved = load_checkpoint(dir / "m0" / "model.ckpt");
      const auto a = saved.params.tensors(), b = init.params.tensors();
      REQUIRE(a.size() == b.size());
      for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(std::equal(a[i].begin(), a[i].end(), b[i].begin(), b[i].end()));
      }
    }

    SUBCASE("checkpoint, loss history and predictions") {
      const auto r = cmd_train(c, dir / "dataset", dir / "m", false);
      CHECK(r.loss_history.size() == 3);
      std::ifstream lh(dir / "m" / "loss.csv");
      CHECK(read_loss_history(lh) == r.loss_history);
      CHECK_THROWS_AS(cmd_train(c, dir / "dataset", dir / "m", false), IoError);

      const auto reloaded = load_checkpoint(dir / "m" / "model.ckpt");
      const auto d = load_dataset(dir / "dataset");
      CHECK((forward(reloaded, d.train.inputs[0]) - forward(r.model, d.train.inputs[0]))
                .cwiseAbs()
                .maxCoeff() <= 1e-15);

      PredictRequest req;
      req.checkpoint = dir / "m" / "model.ckpt";
      req.run = dir / "runs" / "run_0002.traj";
      req.samples = 1;
      req.seed = 5;
      req.out = dir / "p1.txt";
      const auto one = cmd_predict(req);
      CHECK(one.ensemble.std.cwiseAbs().maxCoeff() == 0.0);

      req.samples = 6;
      req.out = dir / "p6a.txt";
      const auto six = cmd_predict(req);
      req.out = dir / "p6b.txt";
      cmd_predict(req);
      CHECK(slurp(dir / "p6a.txt") == slurp(dir / "p6b.txt"));
      CHECK_THROWS_AS(cmd_predict(req), IoError);

      // Columns: t, then mean std lo hi per DoF, then x y yaw.
      std::ifstream in(dir / "p6a.txt");
      std::string header;
      std::getline(in, header);
      CHECK(header.rfind("t surge_vel_mean surge_vel_std surge_vel_lo surge_vel_hi", 0) == 0);
      std::vector<double> row;
      double v;
      std::string line;
      std::getline(in, line);
      std::istringstream ls(line);
      while (ls >> v) row.push_back(v);
      REQUIRE(row.size() == 1 + 4 * 6 + 3);
      for (int k = 0; k < 6; ++k) {
        const double m = row[1 + 4 * k], s = row[2 + 4 * k];
        CHECK(row[3 + 4 * k] == doctest::Approx(m - 5 * s).epsilon(1e-15));
        CHECK(row[4 + 4 * k] == doctest::Approx(m + 5 * s).epsilon(1e-15));
      }
      CHECK(row.back() == six.track.yaw.front());

      const auto errs = cmd_evaluate(c, dir / "m" / "model.ckpt", dir / "dataset", dir / "eval", false);
      REQUIRE(errs.size() == 1);
      for (std::size_t k = 0; k < kDofCount; ++k) CHECK(errs[0].linf[k] >= errs[0].l2[k]);
      CHECK(fs::exists(dir / "eval" / "summary.csv"));
      CHECK(fs::exists(dir / "eval" / "pdf_summary.csv"));
    }

    SUBCASE("shape mismatch with the config") {
      auto wrong = c;
      wrong.probes = 9;
      CHECK_THROWS_AS(cmd_train(wrong, dir / "dataset", dir / "mw", false), ConfigError);
    }
    fs::remove_all(dir);
  }

  TEST_CASE("predict rejects a probe-count mismatch") {
    auto c = tiny();
    const auto dir = scratch("mismatch");
    cmd_generate(c, dir, false);
    cmd_train(c, dir / "dataset", dir / "m", false);
    auto model = load_checkpoint(dir / "m" / "model.ckpt");
    model.layout = probe_layout(5, 100.0);
    save_checkpoint(dir / "bad.ckpt", model);
    // Loading checks the layout against the input width.
    PredictRequest req;
    req.checkpoint = dir / "bad.ckpt";
    req.run = dir / "runs" / "run_0000.traj";
    CHECK_THROWS_AS(cmd_predict(req), IoError);
    fs::remove_all(dir);
  }

  TEST_CASE("study grid, exports and resume") {
    auto c = tiny();
    c.validation_runs = 3;
    c.net.epochs = 2;
    c.study_probes = {1, 3, 5};
    c.study_runs = {2, 3, 4};
    const auto dir = scratch("study");
    const auto s = run_study(c, StudyKind::kConvergence, dir);
    CHECK(count_files(dir / "cells", ".ckpt") == 9);
    CHECK(fs::exists(dir / "table.csv"));
    CHECK(s.tables.front().second.rows.size() == 9 * 6 * 2);
    for (const auto& row : s.tables.front().second.rows) {
      CHECK(row.q.q25 <= row.q.median);
      CHECK(row.q.median <= row.q.q75);
    }
    for (const auto& cell : s.cells) {
      for (std::size_t v = 0; v < cell.errors.size(); ++v) {
        CHECK(cell.errors[v].seed == s.validation_seeds[v]);
        for (std::size_t k = 0; k < kDofCount; ++k) CHECK(cell.errors[v].linf[k] >= cell.errors[v].l2[k]);
      }
    }

    // Best/worst exports match argmin/argmax of the largest cell's errors.
    const auto* big = s.cell(5, 4, FrameSource::kEstimated);
    REQUIRE(big != nullptr);
    std::size_t best = 0;
    for (std::size_t v = 1; v < big->errors.size(); ++v) {
      if (big->errors[v].l2[2] < big->errors[best].l2[2]) best = v;
    }
    std::ifstream h(dir / "histories" / "best_l2_heave.csv");
    std::string first;
    std::getline(h, first);
    CHECK(first.find("validation run " + std::to_string(best) + ",") != std::string::npos);
    CHECK(count_files(dir / "histories", ".csv") == 24);

    const std::string table = slurp(dir / "table.csv");
    // Interrupted cells lose their completion marker; a rerun finishes them.
    fs::remove(dir / "cells" / "estimated-p3-r3" / "errors.csv");
    fs::remove_all(dir / "cells" / "estimated-p5-r4");
    fs::remove(dir / "table.csv");
    run_study(c, StudyKind::kConvergence, dir);
    CHECK(slurp(dir / "table.csv") == table);

    auto other = c;
    other.net.units = 5;
    CHECK_THROWS_AS(run_study(other, StudyKind::kConvergence, dir), ConfigError);
    fs::remove_all(dir);
  }

  TEST_CASE("frame ablation degenerates without horizontal wave forcing") {
    // Course keeping would leave surge, sway and yaw constant; a turn keeps
    // every channel alive while all tracks stay identical.
    auto c = tiny();
    c.mode = RunMode::kTurningCircle;
    c.validation_runs = 2;
    c.net.epochs = 2;
    c.study_probes = {3};
    c.study_runs = {2};
    c.vessel.surge_slope_gain = 0;
    c.vessel.added_resistance = 0;
    c.vessel.sway_slope_gain = 0;
    c.vessel.sway_drift = 0;
    c.vessel.yaw_slope_gain = 0;
    c.vessel.yaw_drift = 0;
    const auto dir = scratch("ablation");
    const auto [est, act] = frame_ablation(c, dir);
    CHECK(est.rows == act.rows);
    CHECK(fs::exists(dir / "table_estimated.csv"));
    CHECK(fs::exists(dir / "table_actual.csv"));
    fs::remove_all(dir);
  }

  TEST_CASE("study kinds") {
    CHECK(parse_study_kind("frame-ablation") == StudyKind::kFrameAblation);
    CHECK(!parse_study_kind("sweep").has_value());
  }
}

// Copyright (c) 2026, The TGVFM-lite Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "test_util.hpp"
#include "tgvfm/core/errors.hpp"
#include "tgvfm/harness/experiments.hpp"
#include "tgvfm/harness/report.hpp"

using namespace tgvfm;
using namespace tgvfm::harness;
namespace fs = std::filesystem;

namespace {

RunConfig tiny_config() {
  RunConfig c;
  auto& s = c.data.scene;
  s.height = s.width = 16;
  s.n_frames = 8;
  s.n_objects = 2;
  s.min_size = 4;
  s.max_size = 6;
  s.min_speed = 1.0;
  s.max_speed = 2.0;
  c.data.input = InputKind::Clean;
  c.data.train_sequences = 8;
  c.data.eval_sequences = 2;
  c.backbone.image_height = c.backbone.image_width = 16;
  c.backbone.patch_size = 4;
  c.backbone.channels = 8;
  c.backbone.n_heads = 2;
  c.backbone.n_blocks = 2;
  c.backbone.decoder_channels = 4;
  c.train.iterations = 10;
  c.train.clip_length = 3;
  c.train.loss_frames = 2;
  c.train.log_every = 2;
  c.train.checkpoint_every = 3;
  c.optim.lr = 1e-3;
  return c;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("tgvfm_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { if (!std::getenv("KEEP")) fs::remove_all(path); }
  std::string sub(const std::string& s) const { return (path / s).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

/// metrics.log with wall-clock fields removed.
std::vector<std::string> stripped_log(const std::string& path) {
  std::vector<std::string> out;
  for (auto r : read_metrics(path)) {
    r.wall_ms = 0.0;
    out.push_back(r.to_json());
  }
  return out;
}

}  // namespace

TEST_CASE("run config text round trip and validation") {
  RunConfig c = tiny_config();
  c.tcfb.order = {tcfb::Stage::Cross, tcfb::Stage::LTA, tcfb::Stage::Window};
  c.data.scene.min_speed = 1.25;
  const std::string text = to_text(c);
  CHECK(to_text(from_text(text)) == text);
  CHECK(text.find("config_version = 1") != std::string::npos);

  CHECK_THROWS_AS(from_text("not_a_key = 3\n"), ConfigError);
  CHECK_THROWS_AS(from_text("config_version = 7\n").validate(), ConfigError);
  RunConfig r;
  CHECK_THROWS_AS(r.validate(), ConfigError);  // reconstruction input without an E2VID checkpoint
  RunConfig d = tiny_config();
  d.mode = Mode::Distilled;
  CHECK_THROWS_AS(d.validate(), ConfigError);
  RunConfig e = tiny_config();
  e.backbone.image_width = 32;
  CHECK_THROWS_AS(e.validate(), ConfigError);

  KeyValues o;
  o.set("train.iterations", "77");
  CHECK(with_overrides(c, o).train.iterations == 77);
  o.set("train.iterationz", "1");
  CHECK_THROWS_AS(with_overrides(c, o), ConfigError);
}

TEST_CASE("dataset splits, determinism and cache") {
  RunConfig c = tiny_config();
  const Dataset a = build_dataset(c), b = build_dataset(c);
  REQUIRE(a.train.size() == 8);
  REQUIRE(a.eval.size() == 2);
  CHECK(a.train[0].steps() == 7);
  CHECK(a.train[3].input[2].vec() == b.train[3].input[2].vec());
  CHECK(a.train[0].input[0].vec() != a.eval[0].input[0].vec());

  TempDir tmp("cache");
  c.data.input = InputKind::Reconstruction;
  c.e2vid.checkpoint = "init";
  c.e2vid.preset = "B0";
  c.data.train_sequences = 2;
  c.data.eval_sequences = 1;
  c.data.cache_dir = tmp.sub("c");
  const Dataset fresh = build_dataset(c);
  REQUIRE(fs::exists(tmp.sub("c/dataset-" + fresh.key + ".dsc")));
  const Dataset cached = build_dataset(c);
  for (int k = 0; k < fresh.train[1].steps(); ++k) CHECK(fresh.train[1].input[k].vec() == cached.train[1].input[k].vec());
  CHECK(fresh.train[1].input[0].vec() != fresh.train[1].clean[0].vec());

  c.e2vid.checkpoint = tmp.sub("missing.e2v");
  c.data.cache_dir.clear();
  CHECK_THROWS_AS(build_dataset(c), IoError);
}

TEST_CASE("zero-init TCFB matches the plain model at iteration 0") {
  TempDir tmp("iter0");
  RunConfig with = tiny_config();
  with.train.iterations = 1;
  RunConfig without = with;
  without.backbone.n_tcfb_sites = 0;
  const Dataset data = build_dataset(with);
  const auto a = run_training(with, data, tmp.sub("with"));
  const auto b = run_training(without, data, tmp.sub("without"));
  REQUIRE(a.log.front().iteration == 0);
  CHECK(a.log.front().values == b.log.front().values);
  CHECK(a.log.front().values.at("loss") == b.log.front().values.at("loss"));
  CHECK(a.log.front().values.count("eval.miou") == 1);
}

TEST_CASE("same seed gives identical metrics; resume reproduces the uninterrupted run") {
  TempDir tmp("determinism");
  const RunConfig c = tiny_config();
  const Dataset data = build_dataset(c);
  const auto a = run_training(c, data, tmp.sub("a"));
  const auto b = run_training(c, data, tmp.sub("b"));
  CHECK(a.finalized);
  CHECK(stripped_log(tmp.sub("a/metrics.log")) == stripped_log(tmp.sub("b/metrics.log")));
  CHECK(a.final_metrics == b.final_metrics);

  RunOptions halt;
  halt.halt_after = 7;
  const auto partial = run_training(c, data, tmp.sub("r"), halt);
  CHECK_FALSE(partial.finalized);
  CHECK_FALSE(load_record(tmp.sub("r/record.json")).finalized);
  CHECK(fs::exists(RunPaths{tmp.sub("r")}.state()));
  CHECK_THROWS_AS(emit_report({partial}, tmp.sub("rep")), ContractError);
  // A killed writer can leave a torn line behind.
  {
    std::ofstream os(tmp.sub("r/metrics.log"), std::ios::app);
    os << "{\"iteration\": 8, \"wall";
  }
  const auto resumed = run_training(c, data, tmp.sub("r"));
  CHECK(resumed.finalized);
  CHECK(stripped_log(tmp.sub("r/metrics.log")) == stripped_log(tmp.sub("a/metrics.log")));
  for (const auto& [k, v] : a.final_metrics) CHECK(std::abs(resumed.final_metrics.at(k) - v) <= 1e-6);
  CHECK_FALSE(fs::exists(RunPaths{tmp.sub("r")}.state()));
}

TEST_CASE("different seeds give different runs") {
  TempDir tmp("seeds");
  RunConfig c = tiny_config();
  c.train.iterations = 4;
  const Dataset data = build_dataset(c);
  const auto a = run_training(c, data, tmp.sub("a"));
  c.seed = 1;
  const auto b = run_training(c, data, tmp.sub("b"));
  CHECK(a.log.front().values.at("loss") != b.log.front().values.at("loss"));
}

TEST_CASE("toy segmentation training improves MIoU over 2,000 iterations") {
  TempDir tmp("progress");
  RunConfig c = tiny_config();
  c.train.iterations = 2000;
  c.train.log_every = 500;
  c.train.checkpoint_every = 0;
  c.backbone.n_tcfb_sites = 0;
  const Dataset data = build_dataset(c);
  const auto r = run_training(c, data, tmp.sub("run"));
  const double initial = r.log.front().values.at("eval.miou");
  const double final = r.final_metrics.at("eval.miou");
  INFO("initial " << initial << " final " << final);
  CHECK(final > initial);
  const auto curve = r.loss_curve();
  CHECK(curve.back().second < curve.front().second);
}

TEST_CASE("depth task trains and reports the depth metric suite") {
  TempDir tmp("depth");
  RunConfig c = tiny_config();
  c.task = Task::Depth;
  c.train.iterations = 4;
  const Dataset data = build_dataset(c);
  const auto r = run_training(c, data, tmp.sub("run"));
  for (const char* k : {"eval.delta1", "eval.delta2", "eval.delta3", "eval.rel", "eval.rms", "eval.rms_log"}) {
    CHECK(r.final_metrics.count(k) == 1);
  }
  CHECK(r.final_metrics.at("eval.delta1") <= r.final_metrics.at("eval.delta2"));
}

TEST_CASE("distillation") {
  TempDir tmp("distill");
  RunConfig teacher_cfg = tiny_config();
  teacher_cfg.train.iterations = 0;
  const Dataset data = build_dataset(teacher_cfg);
  const auto teacher = run_training(teacher_cfg, data, tmp.sub("teacher"));

  SUBCASE("missing teacher is a configuration error") {
    RunConfig c = tiny_config();
    c.mode = Mode::Distilled;
    c.teacher_checkpoint = tmp.sub("nope.tgv");
    CHECK_THROWS_AS(train_distilled(c, data, tmp.sub("s")), ConfigError);
    CHECK_THROWS_AS(train_supervised(c, data, tmp.sub("s")), ConfigError);
  }
  SUBCASE("teacher equal to the student init with zero learning rate keeps the loss constant") {
    RunConfig c = tiny_config();
    c.mode = Mode::Distilled;
    c.teacher_checkpoint = teacher.artifacts.at("model");
    c.optim.lr = 0.0;
    c.train.eval_every = 2;
    const auto r = train_distilled(c, data, tmp.sub("s"));
    std::vector<double> evals;
    for (const auto& m : r.log) {
      if (m.values.count("eval.distill_loss")) evals.push_back(m.values.at("eval.distill_loss"));
    }
    REQUIRE(evals.size() >= 3);
    for (double v : evals) CHECK(v == evals.front());
  }
  SUBCASE("student on one sequence moves toward the teacher") {
    RunConfig t = tiny_config();
    t.train.iterations = 200;
    t.train.checkpoint_every = 0;
    const auto trained = run_training(t, data, tmp.sub("teacher2"));
    RunConfig c = tiny_config();
    c.mode = Mode::Distilled;
    c.seed = 5;
    c.teacher_checkpoint = trained.artifacts.at("model");
    c.data.train_sequences = 1;
    c.data.eval_sequences = 1;
    c.train.iterations = 300;
    c.train.checkpoint_every = 0;
    c.train.log_every = 50;
    const Dataset one = build_dataset(c);
    const auto r = train_distilled(c, one, tmp.sub("s1"));
    const auto& first = r.log.front().values;
    const auto& last = r.final_metrics;
    CHECK(last.at("eval.distill_loss") < first.at("eval.distill_loss"));
    CHECK(last.at("eval.disagreement") < first.at("eval.disagreement"));
  }
}

TEST_CASE("ablation table structure") {
  TempDir tmp("ablation");
  RunConfig c = tiny_config();
  c.train.iterations = 2;
  c.train.checkpoint_every = 0;
  const Dataset data = build_dataset(c);
  ExperimentOptions o;
  o.pretrain_iterations = 2;
  const auto table = run_ablation(c, data, tmp.sub("abl"), o);
  REQUIRE(table.size() == 8);
  CHECK(table.front().row.name == "baseline");
  CHECK(table.front().improvement == 0.0);
  int with_tcfb = 0;
  for (const auto& e : table) with_tcfb += e.row.tcfb;
  CHECK(with_tcfb == 7);
  for (const auto& e : table) {
    if (e.row.dfgm) CHECK((e.row.lta || e.row.dsa));
  }
  write_ablation_table(table, tmp.sub("abl/ablation.tsv"));
  const std::string tsv = slurp(tmp.sub("abl/ablation.tsv"));
  CHECK(std::count(tsv.begin(), tsv.end(), '\n') == 9);

  // Rerunning reuses the finalized runs.
  const auto again = run_ablation(c, data, tmp.sub("abl"), o);
  for (std::size_t i = 0; i < table.size(); ++i) CHECK(again[i].miou == table[i].miou);
}

TEST_CASE("memory sweep echoes k and keeps everything else fixed") {
  TempDir tmp("sweep");
  RunConfig c = tiny_config();
  c.train.iterations = 2;
  c.train.checkpoint_every = 0;
  const Dataset data = build_dataset(c);
  const auto table = sweep_memory_k(c, {1, 3}, data, tmp.sub("sw"), {}, 1);
  REQUIRE(table.size() == 2);
  CHECK(table[0].k == 1);
  CHECK(table[1].k == 3);
  KeyValues a = KeyValues::parse(table[0].runs[0].config_text), b = KeyValues::parse(table[1].runs[0].config_text);
  for (const auto& [k, v] : a.entries()) {
    if (k == "tcfb.k") continue;
    CHECK(b.get(k) == v);
  }
  CHECK(table[0].latency_ms > 0.0);
  CHECK_THROWS_AS(sweep_memory_k(c, {}, data, tmp.sub("sw"), {}), ConfigError);

  // The default-k run has the ablation's full-row config and is found next door.
  ExperimentOptions o;
  const auto full = run_ablation(c, data, tmp.sub("sw"), o);
  CHECK(full.back().runs[0].name == "k3-s0");
}

TEST_CASE("report tables and plots") {
  TempDir tmp("report");
  RunConfig c = tiny_config();
  c.train.iterations = 3;
  const Dataset data = build_dataset(c);
  const auto r = run_training(c, data, tmp.sub("run"));
  const auto files = emit_report({load_record(tmp.sub("run/record.json"))}, tmp.sub("rep1"));
  emit_report({load_record(tmp.sub("run/record.json"))}, tmp.sub("rep2"));
  const std::string table = slurp(tmp.sub("rep1/runs.tsv"));
  CHECK(std::count(table.begin(), table.end(), '\n') == 2);
  CHECK(table == slurp(tmp.sub("rep2/runs.tsv")));
  const std::string png = tmp.sub("rep1/run.loss.png");
  CHECK(fs::file_size(png) > 0);
  CHECK(slurp(png) == slurp(tmp.sub("rep2/run.loss.png")));
  CHECK_THROWS_AS(emit_report({}, tmp.sub("rep3")), ContractError);
}

TEST_CASE("metrics records round trip") {
  MetricRecord m;
  m.iteration = 12;
  m.wall_ms = 3.5;
  m.values["loss"] = 0.1234567890123456789;
  m.values["eval.iou.x"] = std::nan("");
  const auto back = MetricRecord::from_json(m.to_json());
  CHECK(back.iteration == 12);
  CHECK(back.values.at("loss") == m.values.at("loss"));
  CHECK(std::isnan(back.values.at("eval.iou.x")));
}

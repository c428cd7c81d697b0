// Copyright (c) 2026, The TGVFM-lite Authors
// SPDX-License-Identifier: Apache-2.0

#include "tgvfm/harness/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>

#include "tgvfm/core/checkpoint.hpp"
#include "tgvfm/core/errors.hpp"
#include "tgvfm/core/ops.hpp"
#include "tgvfm/core/optim.hpp"
#include "tgvfm/events/scene.hpp"
#include "tgvfm/objectives/losses.hpp"
#include "tgvfm/objectives/metrics.hpp"

namespace tgvfm::harness {

namespace fs = std::filesystem;
using backbone::TGVFM;
using Clock = std::chrono::steady_clock;

namespace {

constexpr const char* kStateMagic = "TGVS";

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

/// [K, H, W] logits to [HW, K] rows.
Var logits_rows(const Var& logits) {
  const int k = logits.dim(0);
  return ops::transpose(ops::reshape(logits, {k, logits.dim(1) * logits.dim(2)}));
}

std::vector<int> argmax_rows(const Tensor& rows) {
  const int n = rows.dim(0), k = rows.dim(1);
  std::vector<int> out(n);
  for (int i = 0; i < n; ++i) {
    const double* r = rows.data() + static_cast<std::size_t>(i) * k;
    out[i] = static_cast<int>(std::max_element(r, r + k) - r);
  }
  return out;
}

std::string state_text(long long next_iteration, long long adam_steps, double wall_ms) {
  KeyValues kv;
  kv.set("next_iteration", std::to_string(next_iteration));
  kv.set("adam_steps", std::to_string(adam_steps));
  kv.set("wall_ms", std::to_string(wall_ms));
  return kv.to_text();
}

void save_state(const RunPaths& paths, const TGVFM& model, const Adam& adam, long long next_iteration,
                double wall_ms) {
  TensorArchive a;
  a.magic = kStateMagic;
  a.dtype = TensorDType::F64;
  a.config_text = state_text(next_iteration, adam.steps(), wall_ms);
  for (const auto& [name, v] : model.params().unique()) a.tensors.emplace_back("param/" + name, v.value());
  for (const auto& s : adam.slots()) {
    a.tensors.emplace_back("adam.m/" + s.name, s.m);
    a.tensors.emplace_back("adam.v/" + s.name, s.v);
  }
  const std::string tmp = paths.state() + ".tmp";
  write_archive(tmp, a);
  fs::rename(tmp, paths.state());
}

struct Resumed {
  long long next_iteration = 0;
  double wall_ms = 0.0;
};

Resumed load_state(const RunPaths& paths, TGVFM& model, Adam& adam) {
  const TensorArchive a = read_archive(paths.state(), kStateMagic);
  const KeyValues kv = KeyValues::parse(a.config_text);
  for (auto& [name, v] : model.params().unique()) {
    const Tensor& t = a.find("param/" + name);
    if (t.shape() != v.shape()) throw IoError(paths.state() + ": shape mismatch for " + name);
    Var h = v;
    h.mutable_value() = t;
  }
  for (auto& s : adam.slots()) {
    s.m = a.find("adam.m/" + s.name);
    s.v = a.find("adam.v/" + s.name);
  }
  adam.set_steps(kv.integer("adam_steps", 0));
  return {kv.integer("next_iteration", 0), kv.real("wall_ms", 0.0)};
}

/// Loss of one supervised or distilled frame.
Var frame_loss(const RunConfig& config, const backbone::ModelOutput& out, const Sequence& seq, int step,
               const backbone::ModelOutput* teacher) {
  if (config.mode == Mode::Supervised) {
    if (config.task == Task::Seg) return objectives::ce_loss_logits(logits_rows(out.seg_logits), seq.labels[step]);
    return objectives::silog_loss(out.depth, seq.depth[step]);
  }
  if (config.task == Task::Seg) {
    const Tensor teacher_probs = ops::softmax_rows(logits_rows(teacher->seg_logits)).value();
    return objectives::distill_seg_l1(ops::softmax_rows(logits_rows(out.seg_logits)), teacher_probs);
  }
  return objectives::silog_loss(out.depth, teacher->depth.value());
}

}  // namespace

std::map<std::string, double> evaluate(const TGVFM& model, const std::vector<Sequence>& sequences, Task task,
                                       const TGVFM* teacher) {
  NoGradGuard no_grad;
  const int n_classes = model.config().n_classes;
  objectives::ConfusionMatrix cm(n_classes);
  objectives::DepthAccumulator depth;
  double distill_sum = 0.0;
  std::size_t disagree = 0, pixels = 0, frames = 0;
  for (const auto& seq : sequences) {
    auto banks = model.reset_banks();
    auto tbanks = teacher ? teacher->reset_banks() : backbone::BankSet{};
    for (int k = 0; k < seq.steps(); ++k) {
      const auto out = model.forward_frame(seq.input[k], banks);
      if (task == Task::Seg) {
        cm.add(argmax_rows(logits_rows(out.seg_logits).value()), seq.labels[k]);
      } else {
        depth.add(out.depth.value(), seq.depth[k]);
      }
      if (teacher) {
        const auto t = teacher->forward_frame(seq.clean[k], tbanks);
        if (task == Task::Seg) {
          const Var sp = ops::softmax_rows(logits_rows(out.seg_logits));
          const Tensor tp = ops::softmax_rows(logits_rows(t.seg_logits)).value();
          distill_sum += objectives::distill_seg_l1(sp, tp).value().item();
          const auto a = argmax_rows(sp.value()), b = argmax_rows(tp);
          for (std::size_t i = 0; i < a.size(); ++i) disagree += a[i] != b[i];
          pixels += a.size();
        } else {
          distill_sum += objectives::silog_loss(out.depth, t.depth.value()).value().item();
        }
      }
      ++frames;
    }
  }
  std::map<std::string, double> m;
  if (task == Task::Seg) {
    const auto r = objectives::miou(cm);
    m["eval.miou"] = 100.0 * r.mean;
    const auto& names = events::scene_class_names();
    for (int c = 0; c < n_classes; ++c) {
      const std::string name = c < static_cast<int>(names.size()) ? names[c] : std::to_string(c);
      m["eval.iou." + name] = 100.0 * r.per_class[c];
    }
  } else {
    const auto r = depth.result();
    m["eval.delta1"] = r.delta1;
    m["eval.delta2"] = r.delta2;
    m["eval.delta3"] = r.delta3;
    m["eval.rel"] = r.rel;
    m["eval.rms"] = r.rms;
    m["eval.rms_log"] = r.rms_log;
  }
  if (teacher && frames > 0) {
    m["eval.distill_loss"] = distill_sum / static_cast<double>(frames);
    if (task == Task::Seg) m["eval.disagreement"] = static_cast<double>(disagree) / static_cast<double>(pixels);
  }
  return m;
}

double measure_latency_ms(const TGVFM& model, const std::vector<Sequence>& sequences, int repeats) {
  NoGradGuard no_grad;
  std::vector<double> per_frame;
  for (int r = 0; r < std::max(1, repeats); ++r) {
    std::size_t frames = 0;
    const auto t0 = Clock::now();
    for (const auto& seq : sequences) {
      auto banks = model.reset_banks();
      for (const auto& f : seq.input) {
        model.forward_frame(f, banks);
        ++frames;
      }
    }
    per_frame.push_back(ms_since(t0) / static_cast<double>(std::max<std::size_t>(frames, 1)));
  }
  std::sort(per_frame.begin(), per_frame.end());
  return per_frame[per_frame.size() / 2];
}

void init_from_checkpoint(TGVFM& model, const std::string& path) {
  const TensorArchive a = read_archive(path, "TGV1");
  for (auto& [name, v] : model.params().unique()) {
    const bool is_tcfb = name.rfind("tcfb.", 0) == 0;
    if (!a.has(name)) {
      if (is_tcfb) continue;
      throw IoError(path + ": init checkpoint lacks '" + name + "'");
    }
    const Tensor& t = a.find(name);
    if (t.shape() != v.shape()) throw IoError(path + ": shape mismatch for '" + name + "'");
    Var h = v;
    h.mutable_value() = t;
  }
}

RunRecord run_training(const RunConfig& config, const Dataset& data, const std::string& run_dir,
                       const RunOptions& options) {
  config.validate();
  if (data.train.empty() || data.eval.empty()) {
    throw IoError("dataset is empty; generate it first (`tgvfm simulate`) or check data.train_sequences");
  }
  const RunPaths paths{run_dir};
  fs::create_directories(paths.checkpoints());
  const std::string text = to_text(config);
  {
    std::ofstream os(paths.config(), std::ios::trunc);
    os << text;
  }

  TGVFM model(config.backbone, config.tcfb, config.seed);
  if (!config.init_checkpoint.empty()) init_from_checkpoint(model, config.init_checkpoint);
  std::optional<TGVFM> teacher;
  if (config.mode == Mode::Distilled) {
    if (!fs::exists(config.teacher_checkpoint)) {
      throw ConfigError("teacher checkpoint '" + config.teacher_checkpoint +
                        "' not found; train a teacher with data.input = clean first");
    }
    teacher.emplace(TGVFM::load(config.teacher_checkpoint));
  }

  Adam adam(model.params(), AdamOptions{config.optim.lr, config.optim.beta1, config.optim.beta2, config.optim.eps, 0.0});
  long long start = 0;
  double wall_offset = 0.0;
  if (options.resume && fs::exists(paths.state())) {
    const Resumed r = load_state(paths, model, adam);
    start = r.next_iteration;
    wall_offset = r.wall_ms;
    truncate_metrics(paths.metrics(), start);
  } else {
    fs::remove(paths.metrics());
    fs::remove(paths.record());
  }

  RunRecord record;
  record.name = fs::path(run_dir).filename().string();
  record.config_text = text;
  const auto t0 = Clock::now();
  auto wall = [&] { return wall_offset + ms_since(t0); };
  const TGVFM* teacher_ptr = teacher ? &*teacher : nullptr;
  const auto& tc = config.train;

  for (long long it = start; it < tc.iterations; ++it) {
    const bool log_now = it % tc.log_every == 0 || it == tc.iterations - 1;
    const bool eval_now = it == 0 || (tc.eval_every > 0 && it % tc.eval_every == 0);
    MetricRecord rec;
    rec.iteration = it;
    if (eval_now) rec.values = evaluate(model, data.eval, config.task, teacher_ptr);

    std::vector<Var> losses;
    for (int b = 0; b < tc.batch; ++b) {
      auto rng = rng_for(config.seed, "batch." + std::to_string(it) + "." + std::to_string(b));
      const Sequence& seq = data.train[rng() % data.train.size()];
      const int start_step = static_cast<int>(rng() % static_cast<std::uint64_t>(seq.steps() - tc.clip_length + 1));
      auto banks = model.reset_banks();
      auto tbanks = teacher ? teacher->reset_banks() : backbone::BankSet{};
      for (int t = 0; t < tc.clip_length; ++t) {
        const int step = start_step + t;
        std::optional<backbone::ModelOutput> tout;
        if (teacher) {
          NoGradGuard g;
          tout = teacher->forward_frame(seq.clean[step], tbanks);
        }
        if (t < tc.clip_length - tc.loss_frames) {
          NoGradGuard g;
          model.forward_frame(seq.input[step], banks);
          continue;
        }
        const auto out = model.forward_frame(seq.input[step], banks);
        losses.push_back(frame_loss(config, out, seq, step, tout ? &*tout : nullptr));
      }
    }
    Var total = losses.front();
    for (std::size_t i = 1; i < losses.size(); ++i) total = ops::add(total, losses[i]);
    const Var loss = ops::scale(total, 1.0 / static_cast<double>(losses.size()));
    const double loss_value = loss.value().item();
    if (!std::isfinite(loss_value)) throw ContractError("training diverged at iteration " + std::to_string(it));
    backward(loss);
    adam.step();
    adam.zero_grad();

    if (log_now || eval_now) {
      rec.values["loss"] = loss_value;
      rec.wall_ms = wall();
      append_metric(paths.metrics(), rec);
      if (options.on_log) options.on_log(it, loss_value);
    }
    const long long done = it + 1;
    if (tc.checkpoint_every > 0 && done % tc.checkpoint_every == 0 && done < tc.iterations) {
      save_state(paths, model, adam, done, wall());
    }
    if (options.halt_after >= 0 && done >= options.halt_after && done < tc.iterations) {
      record.log = read_metrics(paths.metrics());
      record.artifacts["state"] = paths.state();
      save_record(paths.record(), record);
      return record;
    }
  }

  MetricRecord fin;
  fin.iteration = tc.iterations;
  fin.values = evaluate(model, data.eval, config.task, teacher_ptr);
  fin.wall_ms = wall();
  append_metric(paths.metrics(), fin);
  model.save(paths.model());

  record.log = read_metrics(paths.metrics());
  record.final_metrics = fin.values;
  record.timing["wall_ms"] = fin.wall_ms;
  record.artifacts["model"] = paths.model();
  record.artifacts["metrics"] = paths.metrics();
  record.artifacts["config"] = paths.config();
  record.finalized = true;
  save_record(paths.record(), record);
  fs::remove(paths.state());
  return record;
}

RunRecord train_supervised(const RunConfig& config, const Dataset& data, const std::string& run_dir,
                           const RunOptions& options) {
  if (config.mode != Mode::Supervised) throw ConfigError("train_supervised needs mode = supervised");
  return run_training(config, data, run_dir, options);
}

RunRecord train_distilled(const RunConfig& config, const Dataset& data, const std::string& run_dir,
                          const RunOptions& options) {
  if (config.mode != Mode::Distilled) throw ConfigError("train_distilled needs mode = distilled");
  return run_training(config, data, run_dir, options);
}

}  // namespace tgvfm::harness

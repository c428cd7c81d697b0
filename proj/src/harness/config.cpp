// Copyright (c) 2026, The TGVFM-lite Authors
// SPDX-License-Identifier: Apache-2.0

#include "tgvfm/harness/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "tgvfm/core/errors.hpp"

namespace tgvfm::harness {

namespace {

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string flag(bool b) { return b ? "true" : "false"; }

}  // namespace

std::string task_name(Task t) { return t == Task::Seg ? "seg" : "depth"; }
std::string mode_name(Mode m) { return m == Mode::Supervised ? "supervised" : "distilled"; }
std::string input_name(InputKind k) { return k == InputKind::Reconstruction ? "reconstruction" : "clean"; }

void RunConfig::validate() const {
  if (config_version != kConfigVersion) {
    throw ConfigError("config_version " + std::to_string(config_version) + " is not supported (expected " +
                      std::to_string(kConfigVersion) + ")");
  }
  if (data.train_sequences < 1) throw ConfigError("data.train_sequences must be >= 1");
  if (data.eval_sequences < 1) throw ConfigError("data.eval_sequences must be >= 1");
  if (data.eval_offset < static_cast<std::uint64_t>(data.train_sequences)) {
    throw ConfigError("data.eval_offset overlaps the training split");
  }
  if (data.voxel_bins < 2) throw ConfigError("data.voxel_bins must be >= 2");
  if (data.contrast_threshold <= 0.0) throw ConfigError("data.contrast_threshold must be > 0");
  if (data.scene.height != backbone.image_height || data.scene.width != backbone.image_width) {
    throw ConfigError("data.scene resolution must match backbone.image_height/width");
  }
  if (data.input == InputKind::Reconstruction && e2vid.checkpoint.empty()) {
    throw ConfigError("e2vid.checkpoint is required for reconstruction input (train one with `tgvfm e2vid-train`, "
                      "or use \"init\" for an untrained network)");
  }
  backbone.validate();
  tcfb.validate();
  backbone::site_blocks(backbone, tcfb);
  if (mode == Mode::Distilled && teacher_checkpoint.empty()) {
    throw ConfigError("distilled mode needs teacher_checkpoint");
  }
  if (optim.lr < 0.0) throw ConfigError("optim.lr must be >= 0");
  if (train.iterations < 0 || train.batch < 1) throw ConfigError("train.iterations >= 0 and train.batch >= 1 required");
  if (train.clip_length < 1 || train.clip_length > data.scene.n_frames - 1) {
    throw ConfigError("train.clip_length must be in [1, data.scene.n_frames - 1]");
  }
  if (train.loss_frames < 1 || train.loss_frames > train.clip_length) {
    throw ConfigError("train.loss_frames must be in [1, train.clip_length]");
  }
  if (train.log_every < 1 || train.eval_every < 0 || train.checkpoint_every < 0) {
    throw ConfigError("train.log_every >= 1, eval_every >= 0 and checkpoint_every >= 0 required");
  }
}

KeyValues to_kv(const RunConfig& c) {
  KeyValues kv;
  kv.set("config_version", std::to_string(c.config_version));
  kv.set("seed", std::to_string(c.seed));
  kv.set("task", task_name(c.task));
  kv.set("mode", mode_name(c.mode));

  kv.set("data.scene_seed", std::to_string(c.data.scene_seed));
  kv.set("data.train_sequences", std::to_string(c.data.train_sequences));
  kv.set("data.eval_sequences", std::to_string(c.data.eval_sequences));
  kv.set("data.eval_offset", std::to_string(c.data.eval_offset));
  kv.set("data.input", input_name(c.data.input));
  kv.set("data.contrast_threshold", num(c.data.contrast_threshold));
  kv.set("data.voxel_bins", std::to_string(c.data.voxel_bins));
  kv.set("data.cache_dir", c.data.cache_dir);
  const auto& s = c.data.scene;
  kv.set("data.scene.height", std::to_string(s.height));
  kv.set("data.scene.width", std::to_string(s.width));
  kv.set("data.scene.n_frames", std::to_string(s.n_frames));
  kv.set("data.scene.n_objects", std::to_string(s.n_objects));
  kv.set("data.scene.frame_period_ms", num(s.frame_period_ms));
  kv.set("data.scene.background_level", num(s.background_level));
  kv.set("data.scene.background_jitter", num(s.background_jitter));
  kv.set("data.scene.min_size", num(s.min_size));
  kv.set("data.scene.max_size", num(s.max_size));
  kv.set("data.scene.min_speed", num(s.min_speed));
  kv.set("data.scene.max_speed", num(s.max_speed));
  kv.set("data.scene.min_intensity", num(s.min_intensity));
  kv.set("data.scene.max_intensity", num(s.max_intensity));
  kv.set("data.scene.background_depth", num(s.background_depth));
  kv.set("data.scene.min_depth", num(s.min_depth));
  kv.set("data.scene.max_depth", num(s.max_depth));
  kv.set("data.scene.depth_invalid_fraction", num(s.depth_invalid_fraction));
  kv.set("data.scene.static_scene", flag(s.static_scene));

  kv.set("e2vid.checkpoint", c.e2vid.checkpoint);
  kv.set("e2vid.preset", c.e2vid.preset);
  kv.set("e2vid.seed", std::to_string(c.e2vid.seed));

  backbone::write_config(kv, "backbone", c.backbone);
  tcfb::write_config(kv, "tcfb", c.tcfb);

  kv.set("optim.lr", num(c.optim.lr));
  kv.set("optim.beta1", num(c.optim.beta1));
  kv.set("optim.beta2", num(c.optim.beta2));
  kv.set("optim.eps", num(c.optim.eps));

  kv.set("train.iterations", std::to_string(c.train.iterations));
  kv.set("train.batch", std::to_string(c.train.batch));
  kv.set("train.clip_length", std::to_string(c.train.clip_length));
  kv.set("train.loss_frames", std::to_string(c.train.loss_frames));
  kv.set("train.log_every", std::to_string(c.train.log_every));
  kv.set("train.eval_every", std::to_string(c.train.eval_every));
  kv.set("train.checkpoint_every", std::to_string(c.train.checkpoint_every));

  kv.set("init_checkpoint", c.init_checkpoint);
  kv.set("teacher_checkpoint", c.teacher_checkpoint);
  return kv;
}

RunConfig from_kv(const KeyValues& kv) {
  const KeyValues defaults = to_kv(RunConfig{});
  std::set<std::string> known;
  for (const auto& [k, v] : defaults.entries()) known.insert(k);
  for (const auto& [k, v] : kv.entries()) {
    if (!known.count(k)) throw ConfigError("unknown config key '" + k + "'");
  }

  RunConfig c;
  auto u64 = [&](const std::string& key, std::uint64_t fallback) {
    return kv.has(key) ? static_cast<std::uint64_t>(std::stoull(kv.get(key))) : fallback;
  };
  auto i32 = [&](const std::string& key, int fallback) { return static_cast<int>(kv.integer(key, fallback)); };

  c.config_version = i32("config_version", kConfigVersion);
  c.seed = u64("seed", c.seed);
  const std::string task = kv.str("task", "seg");
  if (task != "seg" && task != "depth") throw ConfigError("task must be seg or depth, got '" + task + "'");
  c.task = task == "seg" ? Task::Seg : Task::Depth;
  const std::string mode = kv.str("mode", "supervised");
  if (mode != "supervised" && mode != "distilled") {
    throw ConfigError("mode must be supervised or distilled, got '" + mode + "'");
  }
  c.mode = mode == "supervised" ? Mode::Supervised : Mode::Distilled;

  auto& d = c.data;
  d.scene_seed = u64("data.scene_seed", d.scene_seed);
  d.train_sequences = i32("data.train_sequences", d.train_sequences);
  d.eval_sequences = i32("data.eval_sequences", d.eval_sequences);
  d.eval_offset = u64("data.eval_offset", d.eval_offset);
  const std::string input = kv.str("data.input", "reconstruction");
  if (input != "reconstruction" && input != "clean") {
    throw ConfigError("data.input must be reconstruction or clean, got '" + input + "'");
  }
  d.input = input == "clean" ? InputKind::Clean : InputKind::Reconstruction;
  d.contrast_threshold = kv.real("data.contrast_threshold", d.contrast_threshold);
  d.voxel_bins = i32("data.voxel_bins", d.voxel_bins);
  d.cache_dir = kv.str("data.cache_dir", d.cache_dir);
  auto& s = d.scene;
  s.height = i32("data.scene.height", s.height);
  s.width = i32("data.scene.width", s.width);
  s.n_frames = i32("data.scene.n_frames", s.n_frames);
  s.n_objects = i32("data.scene.n_objects", s.n_objects);
  s.frame_period_ms = kv.real("data.scene.frame_period_ms", s.frame_period_ms);
  s.background_level = kv.real("data.scene.background_level", s.background_level);
  s.background_jitter = kv.real("data.scene.background_jitter", s.background_jitter);
  s.min_size = kv.real("data.scene.min_size", s.min_size);
  s.max_size = kv.real("data.scene.max_size", s.max_size);
  s.min_speed = kv.real("data.scene.min_speed", s.min_speed);
  s.max_speed = kv.real("data.scene.max_speed", s.max_speed);
  s.min_intensity = kv.real("data.scene.min_intensity", s.min_intensity);
  s.max_intensity = kv.real("data.scene.max_intensity", s.max_intensity);
  s.background_depth = kv.real("data.scene.background_depth", s.background_depth);
  s.min_depth = kv.real("data.scene.min_depth", s.min_depth);
  s.max_depth = kv.real("data.scene.max_depth", s.max_depth);
  s.depth_invalid_fraction = kv.real("data.scene.depth_invalid_fraction", s.depth_invalid_fraction);
  s.static_scene = kv.flag("data.scene.static_scene", s.static_scene);

  c.e2vid.checkpoint = kv.str("e2vid.checkpoint", c.e2vid.checkpoint);
  c.e2vid.preset = kv.str("e2vid.preset", c.e2vid.preset);
  c.e2vid.seed = u64("e2vid.seed", c.e2vid.seed);

  c.backbone = backbone::read_config(kv, "backbone");
  c.tcfb = tcfb::read_config(kv, "tcfb");

  c.optim.lr = kv.real("optim.lr", c.optim.lr);
  c.optim.beta1 = kv.real("optim.beta1", c.optim.beta1);
  c.optim.beta2 = kv.real("optim.beta2", c.optim.beta2);
  c.optim.eps = kv.real("optim.eps", c.optim.eps);

  auto& t = c.train;
  t.iterations = i32("train.iterations", t.iterations);
  t.batch = i32("train.batch", t.batch);
  t.clip_length = i32("train.clip_length", t.clip_length);
  t.loss_frames = i32("train.loss_frames", t.loss_frames);
  t.log_every = i32("train.log_every", t.log_every);
  t.eval_every = i32("train.eval_every", t.eval_every);
  t.checkpoint_every = i32("train.checkpoint_every", t.checkpoint_every);

  c.init_checkpoint = kv.str("init_checkpoint", c.init_checkpoint);
  c.teacher_checkpoint = kv.str("teacher_checkpoint", c.teacher_checkpoint);
  return c;
}

std::string to_text(const RunConfig& config) { return to_kv(config).to_text(); }

RunConfig from_text(const std::string& text) { return from_kv(KeyValues::parse(text)); }

RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config file " + path);
  std::ostringstream os;
  os << is.rdbuf();
  return from_text(os.str());
}

RunConfig with_overrides(const RunConfig& base, const KeyValues& overrides) {
  KeyValues kv = to_kv(base);
  for (const auto& [k, v] : overrides.entries()) {
    if (!kv.has(k)) throw ConfigError("unknown config key '" + k + "'");
    kv.set(k, v);
  }
  return from_kv(kv);
}

}  // namespace tgvfm::harness

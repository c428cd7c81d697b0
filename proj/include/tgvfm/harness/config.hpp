// Copyright (c) 2026, The TGVFM-lite Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>

#include "tgvfm/backbone/backbone.hpp"
#include "tgvfm/e2vid/config.hpp"
#include "tgvfm/events/scene.hpp"
#include "tgvfm/tcfb/tcfb.hpp"

namespace tgvfm::harness {

inline constexpr int kConfigVersion = 1;

enum class Task { Seg, Depth };
enum class Mode { Supervised, Distilled };
/// What the backbone sees: E2VID reconstructions of the events or the clean
/// generator frames (used for distillation teachers).
enum class InputKind { Reconstruction, Clean };

struct DataConfig {
  std::uint64_t scene_seed = 1;
  int train_sequences = 256;
  int eval_sequences = 32;
  /// Scene index of the first held-out sequence; the train split starts at 0.
  std::uint64_t eval_offset = 1000000;
  InputKind input = InputKind::Reconstruction;
  double contrast_threshold = 0.2;
  int voxel_bins = 5;
  events::SceneConfig scene;
  /// Directory for cached datasets; empty disables the disk cache.
  std::string cache_dir;
};

struct E2VIDSource {
  /// E2V1 checkpoint; "init" uses a freshly initialised `preset` network.
  std::string checkpoint;
  std::string preset = "B0";
  std::uint64_t seed = 0;
};

struct OptimConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct TrainConfig {
  int iterations = 2000;
  int batch = 2;
  /// Consecutive frames per clip; banks start empty at the clip start.
  int clip_length = 6;
  /// Trailing frames of the clip that carry the loss; the rest only warm the banks.
  int loss_frames = 2;
  int log_every = 100;
  /// Held-out evaluation cadence in iterations; 0 evaluates at 0 and at the end only.
  int eval_every = 0;
  int checkpoint_every = 500;
};

struct RunConfig {
  int config_version = kConfigVersion;
  std::uint64_t seed = 0;
  Task task = Task::Seg;
  Mode mode = Mode::Supervised;
  DataConfig data;
  E2VIDSource e2vid;
  backbone::BackboneConfig backbone;
  tcfb::TCFBConfig tcfb;
  OptimConfig optim;
  TrainConfig train;
  /// TGV1 checkpoint whose tensors initialise matching parameters by name.
  std::string init_checkpoint;
  /// Frozen teacher (TGV1) for distilled mode.
  std::string teacher_checkpoint;

  /// Throws ConfigError with the offending key.
  void validate() const;
};

std::string task_name(Task t);
std::string mode_name(Mode m);
std::string input_name(InputKind k);

KeyValues to_kv(const RunConfig& config);
/// Unknown keys are rejected so that typos do not silently fall back.
RunConfig from_kv(const KeyValues& kv);
std::string to_text(const RunConfig& config);
RunConfig from_text(const std::string& text);
RunConfig load_config(const std::string& path);

/// Applies `key = value` overrides on top of a config.
RunConfig with_overrides(const RunConfig& base, const KeyValues& overrides);

}  // namespace tgvfm::harness

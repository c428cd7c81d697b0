// Copyright (c) 2026, The TGVFM-lite Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tgvfm/core/tensor.hpp"

namespace tgvfm::events {

/// Class indices produced by the generator.
enum SceneClass : int {
  kBackground = 0,
  kBox = 1,
  kDiscMovingRight = 2,  ///< direction-coded: disc whose recent x displacement is positive
  kDiscMovingLeft = 3,   ///< direction-coded: same shape, negative displacement
  kNumSceneClasses = 4,
};

const std::vector<std::string>& scene_class_names();

struct LabelMap {
  int height = 0;
  int width = 0;
  std::vector<int> labels;

  int at(int y, int x) const { return labels[static_cast<std::size_t>(y) * width + x]; }
};

/// Frames are [H, W] intensities in [0, 1]; depth maps are [H, W] metres with 0 = invalid.
struct SceneSequence {
  std::vector<Tensor> frames;
  std::vector<LabelMap> seg_labels;
  std::vector<Tensor> depth_maps;
  double frame_period_ms = 50.0;
  int n_classes = kNumSceneClasses;

  int height() const { return frames.empty() ? 0 : frames.front().dim(0); }
  int width() const { return frames.empty() ? 0 : frames.front().dim(1); }
  int n_frames() const { return static_cast<int>(frames.size()); }
};

enum class ObjectKind { Box, Disc };

/// Initial placement of one object. (x, y) is the top-left of its bounding
/// box in pixels; velocity is in pixels per frame.
struct ObjectSpec {
  ObjectKind kind = ObjectKind::Box;
  double x = 0.0;
  double y = 0.0;
  double size = 8.0;
  double vx = 0.0;
  double vy = 0.0;
  double intensity = 0.8;
  double depth = 10.0;
};

struct SceneConfig {
  int height = 64;
  int width = 64;
  int n_frames = 12;
  int n_objects = 3;
  double frame_period_ms = 50.0;
  double background_level = 0.3;
  /// Random background levels are drawn from background_level +- background_jitter.
  double background_jitter = 0.05;
  double min_size = 10.0;
  double max_size = 16.0;
  double min_speed = 1.5;
  double max_speed = 3.0;
  double min_intensity = 0.6;
  double max_intensity = 0.9;
  double background_depth = 30.0;
  double min_depth = 4.0;
  double max_depth = 20.0;
  /// Fraction of pixels per frame whose depth is marked invalid (0).
  double depth_invalid_fraction = 0.0;
  bool static_scene = false;
  /// When non-empty these replace the random objects (n_objects is ignored).
  std::vector<ObjectSpec> objects;
};

/// Deterministic synthetic sequence. Throws ConfigError for resolution below
/// 16x16, fewer than 8 frames, or no objects.
SceneSequence generate_scene(std::uint64_t seed, const SceneConfig& config);

/// Frames replaced by 1 - I; labels and depth untouched.
SceneSequence invert_intensities(const SceneSequence& scene);

}  // namespace tgvfm::events

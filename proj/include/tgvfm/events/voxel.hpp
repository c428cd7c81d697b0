// Copyright (c) 2026, The TGVFM-lite Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>

#include "tgvfm/core/tensor.hpp"
#include "tgvfm/events/event.hpp"
#include "tgvfm/events/scene.hpp"

namespace tgvfm::events {

inline constexpr int kDefaultVoxelBins = 5;
inline constexpr double kDefaultWindowMs = 50.0;

/// bins is stored channel-first, [C, H, W].
struct VoxelGrid {
  Tensor bins;
  double window_ms = kDefaultWindowMs;

  int channels() const { return bins.dim(0); }
  int height() const { return bins.dim(1); }
  int width() const { return bins.dim(2); }
};

/// Splats each event's polarity between the two temporal bins adjacent to
/// t* = (t - t0) / window * (C - 1). Throws RangeError for events outside
/// [t0, t0 + window) or outside the sensor, ConfigError for C < 2.
VoxelGrid encode_voxel_grid(std::span<const Event> events, SensorSize sensor, std::int64_t t0_us,
                            double window_ms = kDefaultWindowMs, int channels = kDefaultVoxelBins);

/// One grid per inter-frame interval: entry k-1 covers [t_{k-1}, t_k) and
/// pairs with frame k. The window equals the scene's frame period.
std::vector<VoxelGrid> encode_frame_windows(const EventStream& stream, const SceneSequence& scene,
                                            int channels = kDefaultVoxelBins);

}  // namespace tgvfm::events

// Copyright (c) 2026, The TGVFM-lite Authors
// SPDX-License-Identifier: Apache-2.0

#include "tgvfm/events/voxel.hpp"

#include <cmath>
#include <string>

#include "tgvfm/core/errors.hpp"
#include "tgvfm/events/simulator.hpp"

namespace tgvfm::events {

VoxelGrid encode_voxel_grid(std::span<const Event> events, SensorSize sensor, std::int64_t t0_us, double window_ms,
                            int channels) {
  if (channels < 2) throw ConfigError("voxel grid needs at least 2 bins");
  if (!(window_ms > 0.0)) throw ConfigError("voxel window must be positive");
  if (sensor.height <= 0 || sensor.width <= 0) throw ConfigError("voxel grid needs a positive sensor size");

  VoxelGrid grid;
  grid.window_ms = window_ms;
  grid.bins = Tensor::zeros(Shape{channels, sensor.height, sensor.width});
  const double window_us = window_ms * 1000.0;
  for (const Event& e : events) {
    const double dt = static_cast<double>(e.t - t0_us);
    if (dt < 0.0 || dt >= window_us) {
      throw RangeError("event at t=" + std::to_string(e.t) + " outside window starting at " + std::to_string(t0_us));
    }
    if (e.x < 0 || e.x >= sensor.width || e.y < 0 || e.y >= sensor.height) {
      throw RangeError("event at (" + std::to_string(e.x) + "," + std::to_string(e.y) + ") outside sensor");
    }
    const double ts = dt / window_us * (channels - 1);
    const int lo = static_cast<int>(std::floor(ts));
    const double frac = ts - lo;
    grid.bins.at(lo, e.y, e.x) += e.p * (1.0 - frac);
    if (frac > 0.0 && lo + 1 < channels) grid.bins.at(lo + 1, e.y, e.x) += e.p * frac;
  }
  return grid;
}

std::vector<VoxelGrid> encode_frame_windows(const EventStream& stream, const SceneSequence& scene, int channels) {
  std::vector<VoxelGrid> out;
  for (int k = 1; k < scene.n_frames(); ++k) {
    const std::int64_t t0 = frame_time_us(scene, k - 1), t1 = frame_time_us(scene, k);
    out.push_back(encode_voxel_grid(stream.window(t0, t1), stream.sensor, t0, (t1 - t0) / 1000.0, channels));
  }
  return out;
}

}  // namespace tgvfm::events

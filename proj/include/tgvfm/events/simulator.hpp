// Copyright (c) 2026, The TGVFM-lite Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "tgvfm/events/event.hpp"
#include "tgvfm/events/scene.hpp"

namespace tgvfm::events {

/// Offset inside log(I + eps).
inline constexpr double kLogEps = 1e-3;
inline constexpr double kDefaultContrastThreshold = 0.2;

/// Frame k sits at k * frame_period. Each pixel keeps a reference level;
/// whenever the linearly interpolated log intensity reaches the next multiple
/// of the threshold an event is emitted and the reference moves there.
/// Throws ConfigError when threshold <= 0.
EventStream simulate_events(const SceneSequence& scene, double contrast_threshold = kDefaultContrastThreshold);

/// Microsecond timestamp of frame k.
std::int64_t frame_time_us(const SceneSequence& scene, int k);

}  // namespace tgvfm::events

// Copyright (c) 2026, The TGVFM-lite Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace tgvfm::events {

struct Event {
  std::int64_t t = 0;  ///< microseconds
  int x = 0;
  int y = 0;
  int p = 1;  ///< +1 or -1

  friend bool operator==(const Event&, const Event&) = default;
};

/// Stream order: (t, y, x, p) ascending.
bool event_less(const Event& a, const Event& b);

struct SensorSize {
  int height = 0;
  int width = 0;

  friend bool operator==(const SensorSize&, const SensorSize&) = default;
};

struct EventStream {
  std::vector<Event> events;
  SensorSize sensor;

  /// Throws ContractError on out-of-bounds coordinates, bad polarity,
  /// negative or unsorted timestamps.
  void validate() const;

  /// Events with t0 <= t < t1 (stream must be sorted).
  std::span<const Event> window(std::int64_t t0, std::int64_t t1) const;
};

}  // namespace tgvfm::events

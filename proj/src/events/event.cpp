// Copyright (c) 2026, The TGVFM-lite Authors
// SPDX-License-Identifier: Apache-2.0

#include "tgvfm/events/event.hpp"

#include <algorithm>
#include <string>
#include <tuple>

#include "tgvfm/core/errors.hpp"

namespace tgvfm::events {

bool event_less(const Event& a, const Event& b) {
  return std::tie(a.t, a.y, a.x, a.p) < std::tie(b.t, b.y, b.x, b.p);
}

void EventStream::validate() const {
  for (std::size_t i = 0; i < events.size(); ++i) {
    const Event& e = events[i];
    if (e.x < 0 || e.x >= sensor.width || e.y < 0 || e.y >= sensor.height) {
      throw ContractError("event " + std::to_string(i) + " outside sensor bounds");
    }
    if (e.p != 1 && e.p != -1) throw ContractError("event " + std::to_string(i) + " has polarity " + std::to_string(e.p));
    if (e.t < 0) throw ContractError("event " + std::to_string(i) + " has negative timestamp");
    if (i > 0 && event_less(e, events[i - 1])) throw ContractError("event stream not sorted at " + std::to_string(i));
  }
}

std::span<const Event> EventStream::window(std::int64_t t0, std::int64_t t1) const {
  auto lo = std::lower_bound(events.begin(), events.end(), t0, [](const Event& e, std::int64_t t) { return e.t < t; });
  auto hi = std::lower_bound(lo, events.end(), t1, [](const Event& e, std::int64_t t) { return e.t < t; });
  return {events.data() + (lo - events.begin()), static_cast<std::size_t>(hi - lo)};
}

}  // namespace tgvfm::events

// Copyright (c) 2026, The TGVFM-lite Authors
// SPDX-License-Identifier: Apache-2.0

#include "tgvfm/events/simulator.hpp"

#include <algorithm>
#include <cmath>

#include "tgvfm/core/errors.hpp"

namespace tgvfm::events {

std::int64_t frame_time_us(const SceneSequence& scene, int k) {
  return static_cast<std::int64_t>(std::llround(k * scene.frame_period_ms * 1000.0));
}

EventStream simulate_events(const SceneSequence& scene, double contrast_threshold) {
  if (!(contrast_threshold > 0.0)) throw ConfigError("contrast threshold must be positive");
  EventStream out;
  out.sensor = {scene.height(), scene.width()};
  const int h = scene.height(), w = scene.width(), n = scene.n_frames();
  if (n == 0) return out;

  // Reference level is base + m * threshold, kept as an integer offset so
  // crossing levels do not drift with repeated addition.
  const std::size_t npix = static_cast<std::size_t>(h) * w;
  std::vector<double> base(npix);
  std::vector<long long> m(npix, 0);
  for (std::size_t i = 0; i < npix; ++i) base[i] = std::log(scene.frames[0][i] + kLogEps);

  const double tol = 1e-12;
  for (int k = 0; k + 1 < n; ++k) {
    const std::int64_t t_a = frame_time_us(scene, k), t_b = frame_time_us(scene, k + 1);
    const double span = static_cast<double>(t_b - t_a);
    for (std::size_t i = 0; i < npix; ++i) {
      const double l0 = std::log(scene.frames[k][i] + kLogEps);
      const double l1 = std::log(scene.frames[k + 1][i] + kLogEps);
      const double delta = l1 - l0;
      if (delta == 0.0) continue;
      const int pol = delta > 0.0 ? 1 : -1;
      const double offset = base[i] - l0;
      while (true) {
        const long long next = m[i] + pol;
        const double rel = offset + static_cast<double>(next) * contrast_threshold;  // next level minus l0
        if (pol > 0 ? rel > delta + tol : rel < delta - tol) break;
        m[i] = next;
        const double frac = std::clamp(rel / delta, 0.0, 1.0);
        std::int64_t t = t_a + static_cast<std::int64_t>(std::floor(frac * span));
        t = std::clamp(t, t_a, t_b - 1);
        out.events.push_back({t, static_cast<int>(i % w), static_cast<int>(i / w), pol});
      }
    }
  }
  std::sort(out.events.begin(), out.events.end(), event_less);
  return out;
}

}  // namespace tgvfm::events

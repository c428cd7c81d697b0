// Copyright (c) 2026, The TGVFM-lite Authors
// SPDX-License-Identifier: Apache-2.0

#include "tgvfm/events/scene.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "tgvfm/core/errors.hpp"

namespace tgvfm::events {

const std::vector<std::string>& scene_class_names() {
  static const std::vector<std::string> names{"background", "box", "disc_right", "disc_left"};
  return names;
}

namespace {

struct ObjectState {
  ObjectSpec spec;
  std::vector<double> xs;  // per-frame top-left x, for the direction label
};

void advance(ObjectSpec& o, int width, int height) {
  auto bounce = [](double& pos, double& vel, double limit) {
    pos += vel;
    if (pos < 0.0) {
      pos = -pos;
      vel = -vel;
    } else if (pos > limit) {
      pos = 2.0 * limit - pos;
      vel = -vel;
    }
  };
  bounce(o.x, o.vx, std::max(0.0, width - o.size));
  bounce(o.y, o.vy, std::max(0.0, height - o.size));
}

bool covers(const ObjectSpec& o, double px, double py) {
  if (o.kind == ObjectKind::Box) return px >= o.x && px < o.x + o.size && py >= o.y && py < o.y + o.size;
  const double r = 0.5 * o.size;
  const double dx = px - (o.x + r), dy = py - (o.y + r);
  return dx * dx + dy * dy < r * r;
}

int label_of(const ObjectState& s, int frame) {
  if (s.spec.kind == ObjectKind::Box) return kBox;
  // Net x displacement across the last three frames (t-2 .. t); falls back to
  // the current velocity sign when there is no history or no net motion.
  const int from = std::max(0, frame - 2);
  double dx = s.xs[frame] - s.xs[from];
  if (dx == 0.0) dx = s.spec.vx;
  return dx >= 0.0 ? kDiscMovingRight : kDiscMovingLeft;
}

std::vector<ObjectSpec> random_objects(std::mt19937_64& rng, const SceneConfig& c) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  auto uni = [&](double lo, double hi) { return lo + (hi - lo) * u01(rng); };
  std::vector<ObjectSpec> objs;
  for (int i = 0; i < c.n_objects; ++i) {
    ObjectSpec o;
    // Alternate kinds so every scene carries the direction-coded class.
    o.kind = (i % 2 == 0) ? ObjectKind::Disc : ObjectKind::Box;
    o.size = std::round(uni(c.min_size, c.max_size));
    o.x = std::floor(uni(0.0, std::max(1.0, c.width - o.size)));
    o.y = std::floor(uni(0.0, std::max(1.0, c.height - o.size)));
    if (!c.static_scene) {
      const double speed = uni(c.min_speed, c.max_speed);
      o.vx = u01(rng) < 0.5 ? -speed : speed;
      o.vy = uni(-0.5 * c.max_speed, 0.5 * c.max_speed);
    }
    o.intensity = uni(c.min_intensity, c.max_intensity);
    o.depth = uni(c.min_depth, c.max_depth);
    objs.push_back(o);
  }
  return objs;
}

}  // namespace

SceneSequence generate_scene(std::uint64_t seed, const SceneConfig& config) {
  if (config.height < 16 || config.width < 16) {
    throw ConfigError("scene resolution must be at least 16x16, got " + std::to_string(config.height) + "x" +
                      std::to_string(config.width));
  }
  if (config.n_frames < 8) throw ConfigError("scene needs at least 8 frames");
  if (config.objects.empty() && config.n_objects <= 0) throw ConfigError("scene needs at least one object");
  if (config.frame_period_ms <= 0.0) throw ConfigError("frame period must be positive");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double background =
      config.objects.empty() ? config.background_level + config.background_jitter * (2.0 * u01(rng) - 1.0)
                             : config.background_level;

  std::vector<ObjectState> states;
  for (const auto& spec : config.objects.empty() ? random_objects(rng, config) : config.objects) {
    states.push_back({spec, {}});
  }
  // Painter's order: far objects first.
  std::stable_sort(states.begin(), states.end(),
                   [](const ObjectState& a, const ObjectState& b) { return a.spec.depth > b.spec.depth; });

  SceneSequence seq;
  seq.frame_period_ms = config.frame_period_ms;
  const int h = config.height, w = config.width;
  std::mt19937_64 mask_rng(seed ^ 0x9e3779b97f4a7c15ULL);
  for (int f = 0; f < config.n_frames; ++f) {
    if (f > 0) {
      for (auto& s : states) advance(s.spec, w, h);
    }
    for (auto& s : states) s.xs.push_back(s.spec.x);

    Tensor frame(Shape{h, w}, background);
    Tensor depth(Shape{h, w}, config.background_depth);
    LabelMap labels{h, w, std::vector<int>(static_cast<std::size_t>(h) * w, kBackground)};
    for (const auto& s : states) {
      const int label = label_of(s, f);
      const int y0 = std::max(0, static_cast<int>(std::floor(s.spec.y)));
      const int y1 = std::min(h, static_cast<int>(std::ceil(s.spec.y + s.spec.size)) + 1);
      const int x0 = std::max(0, static_cast<int>(std::floor(s.spec.x)));
      const int x1 = std::min(w, static_cast<int>(std::ceil(s.spec.x + s.spec.size)) + 1);
      for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) {
          if (!covers(s.spec, x + 0.5, y + 0.5)) continue;
          frame.at(y, x) = s.spec.intensity;
          depth.at(y, x) = s.spec.depth;
          labels.labels[static_cast<std::size_t>(y) * w + x] = label;
        }
      }
    }
    if (config.depth_invalid_fraction > 0.0) {
      for (auto& d : depth.vec())
        if (u01(mask_rng) < config.depth_invalid_fraction) d = 0.0;
    }
    seq.frames.push_back(std::move(frame));
    seq.depth_maps.push_back(std::move(depth));
    seq.seg_labels.push_back(std::move(labels));
  }
  return seq;
}

SceneSequence invert_intensities(const SceneSequence& scene) {
  SceneSequence out = scene;
  for (auto& f : out.frames)
    for (auto& v : f.vec()) v = 1.0 - v;
  return out;
}

}  // namespace tgvfm::events

// Copyright (c) 2026, The TGVFM-lite Authors
// SPDX-License-Identifier: Apache-2.0

#include "tgvfm/events/scene_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "tgvfm/core/errors.hpp"
#include "tgvfm/core/image_io.hpp"

namespace tgvfm::events {

namespace fs = std::filesystem;

namespace {

std::string numbered(const std::string& stem, int k) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s_%04d.png", stem.c_str(), k);
  return buf;
}

Raster to_raster(const Tensor& t, double scale, int bit_depth) {
  Raster r{t.dim(1), t.dim(0), 1, bit_depth, {}};
  const double hi = bit_depth == 16 ? 65535.0 : 255.0;
  r.samples.reserve(t.numel());
  for (double v : t.vec()) r.samples.push_back(static_cast<std::uint16_t>(std::clamp(std::round(v * scale), 0.0, hi)));
  return r;
}

}  // namespace

void write_scene_archive(const std::string& dir, const SceneSequence& scene) {
  fs::create_directories(dir);
  nlohmann::json manifest;
  manifest["format"] = "scene v1";
  manifest["height"] = scene.height();
  manifest["width"] = scene.width();
  manifest["n_frames"] = scene.n_frames();
  manifest["frame_period_ms"] = scene.frame_period_ms;
  manifest["class_names"] = scene_class_names();
  manifest["intensity_scale"] = 65535;
  manifest["depth_unit"] = "mm";
  for (int k = 0; k < scene.n_frames(); ++k) {
    write_png((fs::path(dir) / numbered("frame", k)).string(), to_raster(scene.frames[k], 65535.0, 16));
    write_png((fs::path(dir) / numbered("depth", k)).string(), to_raster(scene.depth_maps[k], 1000.0, 16));
    const LabelMap& lm = scene.seg_labels[k];
    Raster lr{lm.width, lm.height, 1, 8, {}};
    lr.samples.assign(lm.labels.begin(), lm.labels.end());
    write_png((fs::path(dir) / numbered("label", k)).string(), lr);
  }
  std::ofstream os(fs::path(dir) / "manifest.json");
  if (!os) throw IoError("cannot write manifest in " + dir);
  os << manifest.dump(2) << '\n';
}

SceneSequence read_scene_archive(const std::string& dir) {
  std::ifstream is(fs::path(dir) / "manifest.json");
  if (!is) throw IoError("no manifest.json in " + dir);
  nlohmann::json manifest;
  try {
    is >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("bad manifest in " + dir + ": " + e.what());
  }
  if (manifest.value("format", "") != "scene v1") throw IoError("unsupported scene archive format in " + dir);

  SceneSequence scene;
  scene.frame_period_ms = manifest.at("frame_period_ms").get<double>();
  scene.n_classes = static_cast<int>(manifest.at("class_names").size());
  const int n = manifest.at("n_frames").get<int>();
  auto load = [&](const std::string& stem, int k, double scale) {
    Raster r = read_png((fs::path(dir) / numbered(stem, k)).string());
    if (r.channels != 1) throw IoError(stem + " image must be single-channel");
    Tensor t(Shape{r.height, r.width});
    for (std::size_t i = 0; i < t.numel(); ++i) t[i] = r.samples[i] / scale;
    return t;
  };
  for (int k = 0; k < n; ++k) {
    scene.frames.push_back(load("frame", k, 65535.0));
    scene.depth_maps.push_back(load("depth", k, 1000.0));
    Raster lr = read_png((fs::path(dir) / numbered("label", k)).string());
    scene.seg_labels.push_back({lr.height, lr.width, std::vector<int>(lr.samples.begin(), lr.samples.end())});
  }
  return scene;
}

}  // namespace tgvfm::events

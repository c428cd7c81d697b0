// Copyright (c) 2026, The TGVFM-lite Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "tgvfm/e2vid/model.hpp"
#include "tgvfm/events/scene.hpp"

namespace tgvfm::e2vid {

/// Supplies scene sequences by index; index -> scene must be deterministic.
class SceneSource {
 public:
  virtual ~SceneSource() = default;
  virtual events::SceneSequence scene(std::uint64_t index) const = 0;
};

/// Scenes generated on the fly from (seed, index).
class SyntheticSceneSource : public SceneSource {
 public:
  SyntheticSceneSource(std::uint64_t seed, events::SceneConfig config) : seed_(seed), config_(std::move(config)) {}
  events::SceneSequence scene(std::uint64_t index) const override;

 private:
  std::uint64_t seed_;
  events::SceneConfig config_;
};

/// Scene archives found under a directory (each subdirectory with a
/// manifest.json, or the directory itself); index wraps around.
class ArchiveSceneSource : public SceneSource {
 public:
  explicit ArchiveSceneSource(const std::string& dir);
  events::SceneSequence scene(std::uint64_t index) const override;
  std::size_t size() const { return scenes_.size(); }

 private:
  std::vector<events::SceneSequence> scenes_;
};

/// `synthetic[:seed]` or a directory of scene archives.
std::unique_ptr<SceneSource> open_scene_source(const std::string& where, const events::SceneConfig& synthetic_config);

/// Voxel windows of a scene paired with the frames they end on.
struct VoxelSequence {
  std::vector<events::VoxelGrid> voxels;  ///< voxels[k] ends at frames[k]
  std::vector<Tensor> frames;             ///< [H, W] targets
};
VoxelSequence voxelize(const events::SceneSequence& scene, double contrast_threshold, int bins);

struct TrainOptions {
  int iterations = 5000;
  int batch = 2;
  int unroll = 8;
  double lr = 1e-4;
  /// Random square crop used for training; 0 trains on the full frame.
  int crop = 0;
  double contrast_threshold = 0.2;
  std::uint64_t seed = 0;
  int log_every = 100;
};

struct TrainLog {
  std::vector<double> losses;  ///< per iteration
};

TrainLog train(E2VIDModel& model, const SceneSource& source, const TrainOptions& opts,
               const std::function<void(int, double)>& on_log = {});

struct EvalResult {
  double ssim = 0.0;             ///< mean over sequences and frames
  double ssim_reset_state = 0.0; ///< same with the state zeroed every step
  int sequences = 0;
  int frames = 0;
};

/// Held-out evaluation: scenes first_index .. first_index + count - 1.
EvalResult evaluate(const E2VIDModel& model, const SceneSource& source, std::uint64_t first_index, int count,
                    double contrast_threshold = 0.2);

}  // namespace tgvfm::e2vid

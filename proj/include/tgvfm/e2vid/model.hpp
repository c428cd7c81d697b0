// Copyright (c) 2026, The TGVFM-lite Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tgvfm/core/params.hpp"
#include "tgvfm/e2vid/config.hpp"
#include "tgvfm/events/voxel.hpp"

namespace tgvfm::e2vid {

/// Per encoder stage hidden map [ch, H/2^(i+1), W/2^(i+1)]; `cell` is only
/// populated for ConvLSTM.
struct RecurrentState {
  std::vector<Var> hidden;
  std::vector<Var> cell;

  RecurrentState detached() const;
};

/// Throws ConfigError unless H and W are positive multiples of 2^stages.
RecurrentState init_state(const E2VIDConfig& config, int height, int width);

/// U-Net: 5x5 head, stride-2 5x5 encoders each followed by a 3x3 recurrent
/// cell, residual bottleneck, additive skips with nearest x2 + 5x5 decoders,
/// 1x1 sigmoid prediction over (decoder + head) features.
class E2VIDModel {
 public:
  E2VIDModel(E2VIDConfig config, std::uint64_t seed);

  const E2VIDConfig& config() const { return config_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  RecurrentState init_state(int height, int width) const { return e2vid::init_state(config_, height, width); }

  struct Step {
    Var frame;  ///< [1, H, W] in [0, 1]
    RecurrentState state;
  };
  /// voxel is [C, H, W]. Throws ContractError when it does not match the
  /// configured bins or the state resolution.
  Step step(const Var& voxel, const RecurrentState& state) const;

  /// Inference over a whole sequence from a zero state; with reset_state the
  /// state is zeroed before every step. Returns [H, W] frames.
  std::vector<Tensor> reconstruct(const std::vector<events::VoxelGrid>& voxels, bool reset_state = false) const;

  /// E2V1 container: config echo and f32 parameters.
  void save(const std::string& path) const;
  static E2VIDModel load(const std::string& path);

 private:
  Var conv(const std::string& prefix, const Var& x, int stride, int pad) const;
  E2VIDConfig config_;
  ParamStore params_;
};

}  // namespace tgvfm::e2vid

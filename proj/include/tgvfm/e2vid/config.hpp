// Copyright (c) 2026, The TGVFM-lite Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace tgvfm::e2vid {

enum class CellType { ConvGRU, ConvLSTM };

std::string cell_name(CellType cell);

struct E2VIDConfig {
  std::string preset = "B0";
  CellType cell = CellType::ConvGRU;
  int base_channels = 12;
  std::vector<int> encoder_channels{24, 48};
  int n_residual_blocks = 1;
  int in_channels = 5;  ///< voxel bins

  int n_stages() const { return static_cast<int>(encoder_channels.size()); }

  std::string to_text() const;
  /// Inverse of to_text(); throws ConfigError on unknown or missing fields.
  static E2VIDConfig from_text(const std::string& text);
};

/// B0..B4 from the published architecture table. Throws ConfigError for
/// anything else (B5 has no table row and is not provided).
E2VIDConfig preset(const std::string& name);
const std::vector<std::string>& preset_names();

/// Name, shape and fan-in of one learnable tensor.
struct ParamSpec {
  std::string name;
  std::vector<int> shape;
  int fan_in = 0;
  bool is_bias = false;
};

/// Every learnable tensor the network instantiates, in creation order.
std::vector<ParamSpec> param_specs(const E2VIDConfig& config);
std::size_t param_count(const E2VIDConfig& config);

}  // namespace tgvfm::e2vid

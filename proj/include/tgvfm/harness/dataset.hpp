// Copyright (c) 2026, The TGVFM-lite Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "tgvfm/harness/config.hpp"

namespace tgvfm::harness {

/// One scene as seen by the backbone. Step k corresponds to scene frame k + 1,
/// the first frame with a complete event window before it.
struct Sequence {
  std::vector<Tensor> input;  ///< backbone input per step, [H, W]
  std::vector<Tensor> clean;  ///< generator frame per step, [H, W]
  std::vector<std::vector<int>> labels;
  std::vector<Tensor> depth;  ///< 0 marks invalid

  int steps() const { return static_cast<int>(input.size()); }
};

struct Dataset {
  std::vector<Sequence> train;
  std::vector<Sequence> eval;
  std::string key;  ///< content key of the data and E2VID configuration
};

/// Builds both splits. Reconstructions are rounded to 32-bit floats so that
/// cached and freshly computed datasets are identical; with data.cache_dir set
/// they are stored there and reused.
Dataset build_dataset(const RunConfig& config);

/// Key of the parts of a config that determine the dataset.
std::string dataset_key(const RunConfig& config);

}  // namespace tgvfm::harness

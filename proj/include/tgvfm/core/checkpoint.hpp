// Copyright (c) 2026, The TGVFM-lite Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "tgvfm/core/tensor.hpp"

namespace tgvfm {

enum class TensorDType : unsigned { F32 = 0, F64 = 1 };

/// In-memory image of a versioned tensor container:
///   magic[4] | u32 format_version | u32 len + config text |
///   u32 dtype | u32 count | count x (u32 len + name | u32 rank | u32 dims[rank] | data)
/// All integers and floats little-endian.
struct TensorArchive {
  std::string magic;
  unsigned format_version = 1;
  std::string config_text;
  TensorDType dtype = TensorDType::F32;
  std::vector<std::pair<std::string, Tensor>> tensors;

  const Tensor& find(const std::string& name) const;
  bool has(const std::string& name) const;
};

void write_archive(const std::string& path, const TensorArchive& archive);
/// Throws IoError on missing file, wrong magic, or truncation.
TensorArchive read_archive(const std::string& path, const std::string& expected_magic);

}  // namespace tgvfm

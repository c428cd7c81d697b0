// Copyright (c) 2026, The TGVFM-lite Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace tgvfm {

/// Single-channel 8/16-bit or 3-channel 8-bit raster, row-major.
struct Raster {
  int width = 0;
  int height = 0;
  int channels = 1;
  int bit_depth = 8;
  std::vector<std::uint16_t> samples;
};

void write_png(const std::string& path, const Raster& img);
Raster read_png(const std::string& path);

}  // namespace tgvfm

// Copyright (c) 2026, The TGVFM-lite Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "tgvfm/events/scene.hpp"

namespace tgvfm::events {

/// Directory layout: frame_NNNN.png (16-bit gray, I * 65535), label_NNNN.png
/// (8-bit class index), depth_NNNN.png (16-bit millimetres, 0 = invalid) and
/// manifest.json with frame period, resolution and class names.
void write_scene_archive(const std::string& dir, const SceneSequence& scene);
SceneSequence read_scene_archive(const std::string& dir);

}  // namespace tgvfm::events

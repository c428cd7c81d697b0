// Copyright (c) 2026, The TGVFM-lite Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "tgvfm/events/event.hpp"

namespace tgvfm::events {

/// Text: "evt v1 H W" header, then "t x y p" per line.
void write_events_text(const std::string& path, const EventStream& stream);
/// Binary: "EVT1", u32 H, u32 W, u64 count, then (u64 t, u16 x, u16 y, i8 p) records, little-endian.
void write_events_binary(const std::string& path, const EventStream& stream);

/// Detects the variant from the leading bytes. Throws IoError on malformed input.
EventStream read_events(const std::string& path);

}  // namespace tgvfm::events

// Copyright (c) 2026, The TGVFM-lite Authors
// SPDX-License-Identifier: Apache-2.0

#include "tgvfm/events/event_io.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <sstream>

#include "tgvfm/core/errors.hpp"

namespace tgvfm::events {

namespace {

template <typename T>
void put_le(std::ostream& os, T v) {
  std::array<char, sizeof(T)> buf{};
  auto u = static_cast<std::make_unsigned_t<T>>(v);
  for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<char>((u >> (8 * i)) & 0xff);
  os.write(buf.data(), buf.size());
}

template <typename T>
T get_le(std::istream& is, const std::string& path) {
  std::array<unsigned char, sizeof(T)> buf{};
  if (!is.read(reinterpret_cast<char*>(buf.data()), buf.size())) throw IoError("truncated event file " + path);
  std::make_unsigned_t<T> u = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) u |= static_cast<std::make_unsigned_t<T>>(buf[i]) << (8 * i);
  return static_cast<T>(u);
}

EventStream read_text(std::istream& is, const std::string& path) {
  EventStream s;
  std::string line;
  std::getline(is, line);
  {
    std::istringstream hs(line);
    std::string tag, version;
    if (!(hs >> tag >> version >> s.sensor.height >> s.sensor.width) || tag != "evt" || version != "v1") {
      throw IoError("bad event text header in " + path);
    }
  }
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    Event e;
    if (!(ls >> e.t >> e.x >> e.y >> e.p)) throw IoError(path + ":" + std::to_string(lineno) + ": malformed event");
    s.events.push_back(e);
  }
  return s;
}

EventStream read_binary(std::istream& is, const std::string& path) {
  EventStream s;
  s.sensor.height = static_cast<int>(get_le<std::uint32_t>(is, path));
  s.sensor.width = static_cast<int>(get_le<std::uint32_t>(is, path));
  const auto count = get_le<std::uint64_t>(is, path);
  s.events.reserve(static_cast<std::size_t>(count));
  for (std::uint64_t i = 0; i < count; ++i) {
    Event e;
    e.t = static_cast<std::int64_t>(get_le<std::uint64_t>(is, path));
    e.x = get_le<std::uint16_t>(is, path);
    e.y = get_le<std::uint16_t>(is, path);
    e.p = get_le<std::int8_t>(is, path);
    s.events.push_back(e);
  }
  return s;
}

}  // namespace

void write_events_text(const std::string& path, const EventStream& stream) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path + " for writing");
  os << "evt v1 " << stream.sensor.height << ' ' << stream.sensor.width << '\n';
  for (const Event& e : stream.events) os << e.t << ' ' << e.x << ' ' << e.y << ' ' << (e.p > 0 ? "+1" : "-1") << '\n';
  if (!os) throw IoError("write failed for " + path);
}

void write_events_binary(const std::string& path, const EventStream& stream) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path + " for writing");
  os.write("EVT1", 4);
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(stream.sensor.height));
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(stream.sensor.width));
  put_le<std::uint64_t>(os, stream.events.size());
  for (const Event& e : stream.events) {
    put_le<std::uint64_t>(os, static_cast<std::uint64_t>(e.t));
    put_le<std::uint16_t>(os, static_cast<std::uint16_t>(e.x));
    put_le<std::uint16_t>(os, static_cast<std::uint16_t>(e.y));
    put_le<std::int8_t>(os, static_cast<std::int8_t>(e.p));
  }
  if (!os) throw IoError("write failed for " + path);
}

EventStream read_events(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  char magic[4] = {};
  is.read(magic, 4);
  EventStream s;
  if (is.gcount() == 4 && std::memcmp(magic, "EVT1", 4) == 0) {
    s = read_binary(is, path);
  } else {
    is.clear();
    is.seekg(0);
    s = read_text(is, path);
  }
  try {
    s.validate();
  } catch (const ContractError& e) {
    throw IoError(path + ": " + e.what());
  }
  return s;
}

}  // namespace tgvfm::events

// Copyright (c) 2026, The TGVFM-lite Authors
// SPDX-License-Identifier: Apache-2.0

#include "tgvfm/core/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>

namespace tgvfm {

namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

class Writer {
 public:
  explicit Writer(std::ofstream& os) : os_(os) {}
  void u32(std::uint32_t v) { raw(&v, sizeof v); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    raw(s.data(), s.size());
  }
  void raw(const void* p, std::size_t n) { os_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n)); }

 private:
  std::ofstream& os_;
};

class Reader {
 public:
  Reader(std::ifstream& is, std::string path) : is_(is), path_(std::move(path)) {}
  std::uint32_t u32() {
    std::uint32_t v = 0;
    raw(&v, sizeof v);
    return v;
  }
  std::string str() {
    const std::uint32_t n = u32();
    if (n > (1u << 28)) throw IoError(path_ + ": implausible string length");
    std::string s(n, '\0');
    raw(s.data(), n);
    return s;
  }
  void raw(void* p, std::size_t n) {
    is_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!is_) throw IoError(path_ + ": truncated archive");
  }

 private:
  std::ifstream& is_;
  std::string path_;
};

}  // namespace

const Tensor& TensorArchive::find(const std::string& name) const {
  for (const auto& [n, t] : tensors)
    if (n == name) return t;
  throw IoError("archive has no tensor named '" + name + "'");
}

bool TensorArchive::has(const std::string& name) const {
  for (const auto& [n, t] : tensors)
    if (n == name) return true;
  return false;
}

void write_archive(const std::string& path, const TensorArchive& archive) {
  if (archive.magic.size() != 4) throw ContractError("archive magic must be 4 bytes");
  const std::filesystem::path tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open " + tmp.string() + " for writing");
    Writer w(os);
    w.raw(archive.magic.data(), 4);
    w.u32(archive.format_version);
    w.str(archive.config_text);
    w.u32(static_cast<std::uint32_t>(archive.dtype));
    w.u32(static_cast<std::uint32_t>(archive.tensors.size()));
    for (const auto& [name, t] : archive.tensors) {
      w.str(name);
      w.u32(static_cast<std::uint32_t>(t.rank()));
      for (int d : t.shape()) w.u32(static_cast<std::uint32_t>(d));
      if (archive.dtype == TensorDType::F32) {
        std::vector<float> buf(t.vec().begin(), t.vec().end());
        w.raw(buf.data(), buf.size() * sizeof(float));
      } else {
        w.raw(t.data(), t.numel() * sizeof(double));
      }
    }
    if (!os) throw IoError("write failed for " + tmp.string());
  }
  // Rename so a crash mid-write never leaves a torn checkpoint behind.
  std::filesystem::rename(tmp, path);
}

TensorArchive read_archive(const std::string& path, const std::string& expected_magic) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open checkpoint " + path);
  Reader r(is, path);
  TensorArchive a;
  a.magic.resize(4);
  r.raw(a.magic.data(), 4);
  if (a.magic != expected_magic) {
    throw IoError(path + ": expected magic " + expected_magic + ", found '" + a.magic + "'");
  }
  a.format_version = r.u32();
  if (a.format_version != 1) throw IoError(path + ": unsupported format version " + std::to_string(a.format_version));
  a.config_text = r.str();
  const std::uint32_t dt = r.u32();
  if (dt > 1) throw IoError(path + ": unknown dtype tag");
  a.dtype = static_cast<TensorDType>(dt);
  const std::uint32_t count = r.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = r.str();
    const std::uint32_t rank = r.u32();
    if (rank > 8) throw IoError(path + ": implausible tensor rank");
    Shape shape(rank);
    for (auto& d : shape) d = static_cast<int>(r.u32());
    Tensor t(shape);
    if (a.dtype == TensorDType::F32) {
      std::vector<float> buf(t.numel());
      r.raw(buf.data(), buf.size() * sizeof(float));
      for (std::size_t k = 0; k < buf.size(); ++k) t[k] = buf[k];
    } else {
      r.raw(t.data(), t.numel() * sizeof(double));
    }
    a.tensors.emplace_back(std::move(name), std::move(t));
  }
  return a;
}

}  // namespace tgvfm

// Copyright (c) 2026, The TGVFM-lite Authors
// SPDX-License-Identifier: Apache-2.0

#include "tgvfm/core/image_io.hpp"

#include <png.h>

#include <cstdio>
#include <memory>

#include "tgvfm/core/errors.hpp"

namespace tgvfm {

namespace {
struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;
}  // namespace

void write_png(const std::string& path, const Raster& img) {
  if (img.channels != 1 && img.channels != 3) throw ContractError("write_png: 1 or 3 channels only");
  if (img.bit_depth != 8 && img.bit_depth != 16) throw ContractError("write_png: bit depth must be 8 or 16");
  if (img.samples.size() != static_cast<std::size_t>(img.width) * img.height * img.channels) {
    throw ContractError("write_png: sample count does not match geometry");
  }
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw IoError("cannot open " + path + " for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw IoError("libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("libpng write error on " + path);
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, img.width, img.height, img.bit_depth,
               img.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const int bytes = img.bit_depth / 8;
  std::vector<png_byte> row(static_cast<std::size_t>(img.width) * img.channels * bytes);
  for (int y = 0; y < img.height; ++y) {
    for (int i = 0; i < img.width * img.channels; ++i) {
      const std::uint16_t s = img.samples[static_cast<std::size_t>(y) * img.width * img.channels + i];
      if (bytes == 1) {
        row[i] = static_cast<png_byte>(s);
      } else {
        row[2 * i] = static_cast<png_byte>(s >> 8);  // PNG stores 16-bit samples big-endian
        row[2 * i + 1] = static_cast<png_byte>(s & 0xff);
      }
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

Raster read_png(const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw IoError("cannot open " + path);
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("libpng read error on " + path);
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);
  Raster img;
  img.width = static_cast<int>(png_get_image_width(png, info));
  img.height = static_cast<int>(png_get_image_height(png, info));
  img.bit_depth = png_get_bit_depth(png, info);
  const int color = png_get_color_type(png, info);
  if (color == PNG_COLOR_TYPE_GRAY) {
    img.channels = 1;
  } else if (color == PNG_COLOR_TYPE_RGB) {
    img.channels = 3;
  } else {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError(path + ": unsupported PNG colour type");
  }
  if (img.bit_depth != 8 && img.bit_depth != 16) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError(path + ": unsupported PNG bit depth");
  }
  const int bytes = img.bit_depth / 8;
  std::vector<png_byte> row(png_get_rowbytes(png, info));
  img.samples.resize(static_cast<std::size_t>(img.width) * img.height * img.channels);
  for (int y = 0; y < img.height; ++y) {
    png_read_row(png, row.data(), nullptr);
    for (int i = 0; i < img.width * img.channels; ++i) {
      img.samples[static_cast<std::size_t>(y) * img.width * img.channels + i] =
          bytes == 1 ? row[i] : static_cast<std::uint16_t>((row[2 * i] << 8) | row[2 * i + 1]);
    }
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

}  // namespace tgvfm

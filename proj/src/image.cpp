#include "voxrf/image.hpp"

#include <png.h>

#include <bit>
#include <cstdio>
#include <cstring>
#include <memory>

namespace voxrf {
namespace {

struct FileCloser {
  void operator()(FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

FilePtr open_or_throw(const std::string& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw IoError("cannot open " + path);
  return f;
}

}  // namespace

void write_png(const std::string& path, const Image& img) {
  if (img.channels != 1 && img.channels != 3)
    throw ValidationError("png output supports 1 or 3 channels, got " + std::to_string(img.channels));
  FilePtr f = open_or_throw(path, "wb");

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("libpng failure while writing " + path);
  }

  png_init_io(png, f.get());
  png_set_IHDR(png, info, img.width, img.height, 8,
               img.channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  std::vector<uint8_t> row(static_cast<std::size_t>(img.width) * img.channels);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < img.channels; ++c) row[x * img.channels + c] = quantize8(img.at(x, y, c));
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

Image read_png(const std::string& path) {
  FilePtr f = open_or_throw(path, "rb");

  uint8_t header[8];
  if (std::fread(header, 1, 8, f.get()) != 8 || png_sig_cmp(header, 0, 8))
    throw IoError(path + " is not a PNG file");

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("libpng failure while reading " + path);
  }

  png_init_io(png, f.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  png_uint_32 w = png_get_image_width(png, info);
  png_uint_32 h = png_get_image_height(png, info);
  int color_type = png_get_color_type(png, info);
  int bit_depth = png_get_bit_depth(png, info);

  if (bit_depth == 16) png_set_strip_16(png);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA)
    png_set_gray_to_rgb(png);
  png_read_update_info(png, info);

  Image img(static_cast<int>(w), static_cast<int>(h), 3);
  std::vector<uint8_t> row(png_get_rowbytes(png, info));
  for (png_uint_32 y = 0; y < h; ++y) {
    png_read_row(png, row.data(), nullptr);
    for (png_uint_32 x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c)
        img.at(static_cast<int>(x), static_cast<int>(y), c) = row[x * 3 + c] / 255.0f;
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

void write_pfm(const std::string& path, const Image& img) {
  if (img.channels != 1 && img.channels != 3)
    throw ValidationError("pfm supports 1 or 3 channels, got " + std::to_string(img.channels));
  static_assert(std::endian::native == std::endian::little, "pfm writer assumes little-endian host");
  FilePtr f = open_or_throw(path, "wb");
  std::string header = std::string(img.channels == 3 ? "PF" : "Pf") + "\n" +
                       std::to_string(img.width) + " " + std::to_string(img.height) + "\n-1.0\n";
  if (std::fwrite(header.data(), 1, header.size(), f.get()) != header.size())
    throw IoError("short write on " + path);
  // Bottom row first per the format.
  for (int y = img.height - 1; y >= 0; --y) {
    const float* row = &img.data[static_cast<std::size_t>(y) * img.width * img.channels];
    std::size_t n = static_cast<std::size_t>(img.width) * img.channels;
    if (std::fwrite(row, sizeof(float), n, f.get()) != n) throw IoError("short write on " + path);
  }
}

Image read_pfm(const std::string& path) {
  FilePtr f = open_or_throw(path, "rb");
  char kind[3] = {};
  int w = 0, h = 0;
  double scale = 0.0;
  if (std::fscanf(f.get(), "%2s %d %d %lf", kind, &w, &h, &scale) != 4)
    throw IoError(path + ": malformed PFM header");
  int channels = std::strcmp(kind, "PF") == 0 ? 3 : (std::strcmp(kind, "Pf") == 0 ? 1 : 0);
  if (channels == 0 || w <= 0 || h <= 0) throw IoError(path + ": malformed PFM header");
  if (scale >= 0) throw IoError(path + ": big-endian PFM not supported");
  int ws = std::fgetc(f.get());
  if (ws != '\n' && ws != ' ' && ws != '\r') throw IoError(path + ": malformed PFM header");

  Image img(w, h, channels);
  for (int y = h - 1; y >= 0; --y) {
    float* row = &img.data[static_cast<std::size_t>(y) * w * channels];
    std::size_t n = static_cast<std::size_t>(w) * channels;
    if (std::fread(row, sizeof(float), n, f.get()) != n) throw IoError(path + ": truncated PFM");
  }
  return img;
}

}  // namespace voxrf

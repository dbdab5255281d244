#include "pairmine/image_io.hpp"

#include <jpeglib.h>
#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <memory>
#include <vector>

#include "pairmine/errors.hpp"

namespace pairmine {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

bool has_png_signature(std::FILE* f) {
  unsigned char sig[8];
  const std::size_t n = std::fread(sig, 1, 8, f);
  std::rewind(f);
  return n == 8 && png_sig_cmp(sig, 0, 8) == 0;
}

RasterImage from_bytes(const std::vector<unsigned char>& bytes, int width,
                       int height, int channels) {
  if (width <= 0 || height <= 0)
    throw DimensionError("decoded image has zero dimension");
  RasterImage img = RasterImage::make(width, height, channels);
  const float k = 1.0f / 255.0f;
  for (std::size_t i = 0; i < bytes.size(); ++i)
    img.data[i] = static_cast<float>(bytes[i]) * k;
  return img;
}

RasterImage decode_png(std::FILE* f, const std::string& path) {
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw DecodeError("libpng init failed: " + path);
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw DecodeError("libpng init failed: " + path);
  }
  std::vector<unsigned char> bytes;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DecodeError("corrupt PNG: " + path);
  }
  png_init_io(png, f);
  png_read_info(png, info);

  const png_uint_32 width = png_get_image_width(png, info);
  const png_uint_32 height = png_get_image_height(png, info);
  const int bit_depth = png_get_bit_depth(png, info);
  const int color_type = png_get_color_type(png, info);

  if (bit_depth == 16) png_set_strip_16(png);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8)
    png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);

  const int channels = png_get_channels(png, info);
  if (channels != 1 && channels != 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DecodeError("unsupported PNG channel layout: " + path);
  }
  const std::size_t stride = png_get_rowbytes(png, info);
  bytes.resize(stride * height);
  rows.resize(height);
  for (png_uint_32 y = 0; y < height; ++y) rows[y] = bytes.data() + y * stride;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  return from_bytes(bytes, static_cast<int>(width), static_cast<int>(height),
                    channels);
}

struct JpegErrorMgr {
  jpeg_error_mgr pub;
  std::jmp_buf jump;
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorMgr*>(cinfo->err);
  std::longjmp(err->jump, 1);
}

// Corrupt-data warnings (truncated scans, bad markers) are rejected after
// decoding, so the default stderr chatter is dropped here.
void jpeg_swallow_message(j_common_ptr) {}

RasterImage decode_jpeg(std::FILE* f, const std::string& path) {
  jpeg_decompress_struct cinfo;
  JpegErrorMgr err;
  std::vector<unsigned char> bytes;  // before setjmp so cleanup always runs
  cinfo.err = jpeg_std_error(&err.pub);
  err.pub.error_exit = jpeg_error_exit;
  err.pub.output_message = jpeg_swallow_message;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    throw DecodeError("corrupt JPEG: " + path);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_stdio_src(&cinfo, f);
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space =
      cinfo.num_components == 1 ? JCS_GRAYSCALE : JCS_RGB;
  jpeg_start_decompress(&cinfo);

  const int width = static_cast<int>(cinfo.output_width);
  const int height = static_cast<int>(cinfo.output_height);
  const int channels = cinfo.output_components;
  if (channels != 1 && channels != 3) {
    jpeg_destroy_decompress(&cinfo);
    throw DecodeError("unsupported JPEG channel layout: " + path);
  }
  const std::size_t stride =
      static_cast<std::size_t>(width) * static_cast<std::size_t>(channels);
  bytes.resize(stride * height);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = bytes.data() + cinfo.output_scanline * stride;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  const long warnings = err.pub.num_warnings;
  jpeg_destroy_decompress(&cinfo);
  // libjpeg pads truncated scans with gray instead of failing; a decoder
  // that returns fabricated pixels would poison mining, so treat any
  // corrupt-data warning as a failure.
  if (warnings > 0) throw DecodeError("corrupt JPEG: " + path);
  return from_bytes(bytes, width, height, channels);
}

}  // namespace

RasterImage decode_image(const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) throw DecodeError("cannot open: " + path);
  if (has_png_signature(f.get())) return decode_png(f.get(), path);

  unsigned char magic[2] = {0, 0};
  const std::size_t n = std::fread(magic, 1, 2, f.get());
  std::rewind(f.get());
  if (n == 2 && magic[0] == 0xFF && magic[1] == 0xD8)
    return decode_jpeg(f.get(), path);
  throw DecodeError("not a PNG or JPEG: " + path);
}

void encode_png(const RasterImage& img, const std::string& path) {
  if (img.width <= 0 || img.height <= 0)
    throw DimensionError("cannot encode empty image");
  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f) throw IoError("cannot open for write: " + path);

  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("libpng init failed: " + path);
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("libpng init failed: " + path);
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("PNG write failed: " + path);
  }
  png_init_io(png, f.get());
  const int color_type =
      img.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB;
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width),
               static_cast<png_uint_32>(img.height), 8, color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  const std::size_t stride =
      static_cast<std::size_t>(img.width) * img.channels;
  std::vector<unsigned char> row(stride);
  for (int y = 0; y < img.height; ++y) {
    for (std::size_t i = 0; i < stride; ++i) {
      const float v = img.data[static_cast<std::size_t>(y) * stride + i];
      const float clamped = std::min(1.0f, std::max(0.0f, v));
      row[i] = static_cast<unsigned char>(std::lround(clamped * 255.0f));
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace pairmine

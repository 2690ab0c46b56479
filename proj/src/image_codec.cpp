#include "ctxaug/image_codec.hpp"

#include <png.h>
// jpeglib.h needs stdio declarations first.
#include <cstdio>
#include <jpeglib.h>

#include <csetjmp>
#include <cstring>
#include <fstream>
#include <memory>
#include <vector>

#include "ctxaug/error.hpp"

namespace ctxaug {
namespace fs = std::filesystem;

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const noexcept {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const fs::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw IoError("cannot open " + path.string());
  return f;
}

bool has_png_signature(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  unsigned char sig[8] = {};
  in.read(reinterpret_cast<char*>(sig), 8);
  return in.gcount() == 8 && png_sig_cmp(sig, 0, 8) == 0;
}

// Decoded PNG rows with the transforms requested by `keep_indices`.
struct PngData {
  int width = 0, height = 0, channels = 0;
  std::vector<std::uint8_t> bytes;
};

[[noreturn]] void png_fail(png_structp png, png_const_charp msg) {
  auto* what = static_cast<std::string*>(png_get_error_ptr(png));
  if (what) *what = msg;
  std::longjmp(png_jmpbuf(png), 1);
}

void png_warn(png_structp, png_const_charp) {}

PngData decode_png(const fs::path& path, bool keep_indices) {
  auto file = open_file(path, "rb");
  std::string error;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &error, png_fail, png_warn);
  if (!png) throw IoError("libpng init failed");
  png_infop info = png_create_info_struct(png);
  PngData out;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw ParseError(path.string() + ": " + error);
  }
  png_init_io(png, file.get());
  png_read_info(png, info);
  const int colour = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);

  if (depth == 16) png_set_strip_16(png);
  if (keep_indices) {
    if (depth < 8) png_set_packing(png);
    if (colour != PNG_COLOR_TYPE_PALETTE && colour != PNG_COLOR_TYPE_GRAY) {
      png_destroy_read_struct(&png, &info, nullptr);
      throw ParseError(path.string() + ": expected a paletted or grey index PNG");
    }
  } else {
    if (colour == PNG_COLOR_TYPE_PALETTE) {
      if (depth < 8) png_set_packing(png);
      png_set_palette_to_rgb(png);
    }
    if (colour == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (colour == PNG_COLOR_TYPE_GRAY || colour == PNG_COLOR_TYPE_GRAY_ALPHA)
      png_set_gray_to_rgb(png);
    png_set_strip_alpha(png);
  }
  png_read_update_info(png, info);
  out.width = static_cast<int>(png_get_image_width(png, info));
  out.height = static_cast<int>(png_get_image_height(png, info));
  out.channels = png_get_channels(png, info);
  const auto rowbytes = png_get_rowbytes(png, info);
  out.bytes.resize(rowbytes * out.height);
  rows.resize(out.height);
  for (int y = 0; y < out.height; ++y) rows[y] = out.bytes.data() + rowbytes * y;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return out;
}

struct JpegError {
  jpeg_error_mgr mgr;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_fail(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegError*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

RgbImage decode_jpeg(const fs::path& path) {
  auto file = open_file(path, "rb");
  jpeg_decompress_struct cinfo;
  JpegError err;
  cinfo.err = jpeg_std_error(&err.mgr);
  err.mgr.error_exit = jpeg_fail;
  RgbImage img;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    throw ParseError(path.string() + ": " + err.message);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_stdio_src(&cinfo, file.get());
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  img = RgbImage(static_cast<int>(cinfo.output_width), static_cast<int>(cinfo.output_height));
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = img.data().data() + static_cast<std::size_t>(cinfo.output_scanline) * img.width() * 3;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return img;
}

void encode_png(const fs::path& path, int width, int height, int colour_type,
                const std::uint8_t* bytes, int channels, const png_color* palette, int palette_size) {
  auto file = open_file(path, "wb");
  std::string error;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &error, png_fail, png_warn);
  if (!png) throw IoError("libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError(path.string() + ": " + error);
  }
  png_init_io(png, file.get());
  png_set_compression_level(png, 6);
  png_set_IHDR(png, info, width, height, 8, colour_type, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  if (palette) png_set_PLTE(png, info, palette, palette_size);
  png_write_info(png, info);
  const std::size_t stride = static_cast<std::size_t>(width) * channels;
  for (int y = 0; y < height; ++y)
    png_write_row(png, const_cast<png_bytep>(bytes + stride * y));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  if (std::fflush(file.get()) != 0) throw IoError("write failed: " + path.string());
}

}  // namespace

RgbImage read_image(const fs::path& path) {
  if (!fs::exists(path)) throw IoError("missing image " + path.string());
  if (!has_png_signature(path)) return decode_jpeg(path);
  PngData d = decode_png(path, false);
  if (d.channels != 3) throw ParseError(path.string() + ": unexpected channel count after conversion");
  RgbImage img(d.width, d.height);
  std::memcpy(img.data().data(), d.bytes.data(), d.bytes.size());
  return img;
}

LabelMap read_index_png(const fs::path& path) {
  if (!fs::exists(path)) throw IoError("missing image " + path.string());
  PngData d = decode_png(path, true);
  if (d.channels != 1) throw ParseError(path.string() + ": index PNG must have one channel");
  LabelMap m(d.width, d.height);
  std::memcpy(m.data().data(), d.bytes.data(), d.bytes.size());
  return m;
}

void write_png(const fs::path& path, const RgbImage& img) {
  encode_png(path, img.width(), img.height(), PNG_COLOR_TYPE_RGB, img.data().data(), 3, nullptr, 0);
}

std::array<std::uint8_t, 3> voc_colour(int index) noexcept {
  std::array<std::uint8_t, 3> c{0, 0, 0};
  int id = index;
  for (int shift = 7; shift >= 0; --shift) {
    c[0] |= static_cast<std::uint8_t>(((id >> 0) & 1) << shift);
    c[1] |= static_cast<std::uint8_t>(((id >> 1) & 1) << shift);
    c[2] |= static_cast<std::uint8_t>(((id >> 2) & 1) << shift);
    id >>= 3;
  }
  return c;
}

void write_index_png(const fs::path& path, const LabelMap& labels) {
  std::array<png_color, 256> palette{};
  for (int i = 0; i < 256; ++i) {
    auto c = voc_colour(i);
    palette[i] = png_color{c[0], c[1], c[2]};
  }
  encode_png(path, labels.width(), labels.height(), PNG_COLOR_TYPE_PALETTE, labels.data().data(), 1,
             palette.data(), 256);
}

}  // namespace ctxaug

#include "peel/image_io.hpp"

#include "peel/errors.hpp"

#include <png.h>
#include <zlib.h>

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <vector>

static_assert(std::endian::native == std::endian::little,
              "PFM and PLY writers assume a little-endian host");

namespace peel {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) {
    throw IoError(path, std::string("cannot open (") + std::strerror(errno) + ")");
  }
  return f;
}

void png_error_handler(png_structp png, png_const_charp message) {
  auto* buffer = static_cast<std::string*>(png_get_error_ptr(png));
  if (buffer) {
    *buffer = message;
  }
  png_longjmp(png, 1);
}

void png_warning_handler(png_structp, png_const_charp) {}

// Writes 8-bit RGB (channels = 3) or 16-bit gray (channels = 1) rows.
void write_png(const std::filesystem::path& path, int width, int height, int channels,
               const std::vector<png_bytep>& rows) {
  FilePtr file = open_file(path, "wb");
  std::string message;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &message, png_error_handler,
                                            png_warning_handler);
  if (!png) {
    throw IoError(path, "png_create_write_struct failed");
  }
  png_infop info = png_create_info_struct(png);
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError(path, "PNG write failed: " + message);
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
               channels == 3 ? 8 : 16, channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  if (channels == 1) {
    png_set_swap(png);
  }
  png_write_image(png, const_cast<png_bytepp>(rows.data()));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  if (std::fflush(file.get()) != 0) {
    throw IoError(path, "write failed");
  }
}

// Reads a PNG converted to 8-bit RGB (want_gray16 = false) or exactly 16-bit gray.
std::vector<unsigned char> read_png(const std::filesystem::path& path, bool want_gray16,
                                    int& width, int& height) {
  FilePtr file = open_file(path, "rb");
  unsigned char signature[8] = {};
  if (std::fread(signature, 1, 8, file.get()) != 8 || png_sig_cmp(signature, 0, 8) != 0) {
    throw ParseError(ParseErrorKind::kMalformedHeader, path, "not a PNG file");
  }
  // Everything touched after setjmp lives on the heap behind a pointer that is never reassigned.
  struct ReadState {
    std::string message;
    std::vector<unsigned char> pixels;
    std::vector<png_bytep> rows;
    bool wrong_type = false;
    png_uint_32 width = 0;
    png_uint_32 height = 0;
  };
  const auto state = std::make_unique<ReadState>();
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &state->message,
                                           png_error_handler, png_warning_handler);
  if (!png) {
    throw IoError(path, "png_create_read_struct failed");
  }
  png_infop info = png_create_info_struct(png);
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw ParseError(ParseErrorKind::kMalformedData, path, "PNG decode failed: " + state->message);
  }
  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  state->width = png_get_image_width(png, info);
  state->height = png_get_image_height(png, info);
  const int bit_depth = png_get_bit_depth(png, info);
  const int color_type = png_get_color_type(png, info);
  const std::size_t bytes_per_pixel = want_gray16 ? 2 : 3;
  if (want_gray16) {
    state->wrong_type = bit_depth != 16 || color_type != PNG_COLOR_TYPE_GRAY;
    png_set_swap(png);
  } else {
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA) {
      png_set_gray_to_rgb(png);
      if (bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    }
    if (bit_depth == 16) png_set_strip_16(png);
    if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_strip_alpha(png);
  }
  if (!state->wrong_type) {
    png_read_update_info(png, info);
    const png_uint_32 w = state->width;
    state->pixels.resize(static_cast<std::size_t>(w) * state->height * bytes_per_pixel);
    state->rows.resize(state->height);
    for (png_uint_32 y = 0; y < state->height; ++y) {
      state->rows[y] = state->pixels.data() + static_cast<std::size_t>(y) * w * bytes_per_pixel;
    }
    png_read_image(png, state->rows.data());
    png_read_end(png, nullptr);
  }
  png_destroy_read_struct(&png, &info, nullptr);
  if (state->wrong_type) {
    throw ParseError(ParseErrorKind::kUnsupported, path, "expected a 16-bit grayscale PNG");
  }
  width = static_cast<int>(state->width);
  height = static_cast<int>(state->height);
  return std::move(state->pixels);
}

}  // namespace

void write_pfm(const std::filesystem::path& path, const Image<float>& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError(path, "cannot open for writing");
  }
  out << "Pf\n" << image.width() << ' ' << image.height() << "\n-1.0\n";
  for (int y = image.height() - 1; y >= 0; --y) {
    out.write(reinterpret_cast<const char*>(&image.at(0, y)),
              static_cast<std::streamsize>(sizeof(float) * image.width()));
  }
  if (!out) {
    throw IoError(path, "write failed");
  }
}

Image<float> read_pfm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError(path, "cannot open");
  }
  auto header_error = [&](const std::string& what) {
    return ParseError(ParseErrorKind::kMalformedHeader, path, what);
  };
  std::string magic;
  if (!(in >> magic)) {
    throw header_error("empty file");
  }
  if (magic == "PF") {
    throw ParseError(ParseErrorKind::kUnsupported, path, "color PFM not supported");
  }
  if (magic != "Pf") {
    throw header_error("bad PFM magic");
  }
  long long width = 0, height = 0;
  std::string scale_text;
  if (!(in >> width >> height >> scale_text) || width < 1 || height < 1) {
    throw header_error("bad PFM dimensions");
  }
  double scale = 0.0;
  try {
    scale = std::stod(scale_text);
  } catch (const std::exception&) {
    throw header_error("bad PFM scale");
  }
  if (scale == 0.0) {
    throw header_error("PFM scale must be nonzero");
  }
  if (scale > 0.0) {
    throw ParseError(ParseErrorKind::kUnsupported, path, "big-endian PFM not supported");
  }
  // Exactly one whitespace byte separates the header from the raster.
  in.get();
  Image<float> image(static_cast<int>(width), static_cast<int>(height));
  for (int y = image.height() - 1; y >= 0; --y) {
    if (!in.read(reinterpret_cast<char*>(&image.at(0, y)),
                 static_cast<std::streamsize>(sizeof(float) * image.width()))) {
      throw ParseError(ParseErrorKind::kCountMismatch, path, "PFM raster truncated");
    }
  }
  return image;
}

void write_png_rgb(const std::filesystem::path& path, const Image<Rgb>& image) {
  static_assert(sizeof(Rgb) == 3);
  std::vector<png_bytep> rows(static_cast<std::size_t>(image.height()));
  for (int y = 0; y < image.height(); ++y) {
    rows[y] = reinterpret_cast<png_bytep>(const_cast<Rgb*>(&image.at(0, y)));
  }
  write_png(path, image.width(), image.height(), 3, rows);
}

Image<Rgb> read_png_rgb(const std::filesystem::path& path) {
  int width = 0, height = 0;
  const std::vector<unsigned char> pixels = read_png(path, false, width, height);
  Image<Rgb> image(width, height);
  std::memcpy(image.data().data(), pixels.data(), pixels.size());
  return image;
}

void write_png_gray16(const std::filesystem::path& path, const Image<std::uint16_t>& image) {
  std::vector<png_bytep> rows(static_cast<std::size_t>(image.height()));
  for (int y = 0; y < image.height(); ++y) {
    rows[y] = reinterpret_cast<png_bytep>(const_cast<std::uint16_t*>(&image.at(0, y)));
  }
  write_png(path, image.width(), image.height(), 1, rows);
}

Image<std::uint16_t> read_png_gray16(const std::filesystem::path& path) {
  int width = 0, height = 0;
  const std::vector<unsigned char> pixels = read_png(path, true, width, height);
  Image<std::uint16_t> image(width, height);
  std::memcpy(image.data().data(), pixels.data(), pixels.size());
  return image;
}

std::uint32_t file_crc32(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError(path, "cannot open");
  }
  uLong crc = crc32(0L, Z_NULL, 0);
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    const auto n = in.gcount();
    if (n > 0) {
      crc = crc32(crc, reinterpret_cast<const Bytef*>(buf.data()), static_cast<uInt>(n));
    }
  }
  return static_cast<std::uint32_t>(crc);
}

}  // namespace peel

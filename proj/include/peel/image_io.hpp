#pragma once

#include "peel/geometry.hpp"
#include "peel/image.hpp"

#include <cstdint>
#include <filesystem>

namespace peel {

/// Grayscale little-endian PFM ("Pf", scale -1.0, rows stored bottom-up).
void write_pfm(const std::filesystem::path& path, const Image<float>& image);

/// Rejects color and big-endian PFM files with ParseError rather than reinterpreting them.
Image<float> read_pfm(const std::filesystem::path& path);

void write_png_rgb(const std::filesystem::path& path, const Image<Rgb>& image);
Image<Rgb> read_png_rgb(const std::filesystem::path& path);

void write_png_gray16(const std::filesystem::path& path, const Image<std::uint16_t>& image);
Image<std::uint16_t> read_png_gray16(const std::filesystem::path& path);

/// CRC-32 (zlib polynomial) of a file's bytes.
std::uint32_t file_crc32(const std::filesystem::path& path);

}  // namespace peel

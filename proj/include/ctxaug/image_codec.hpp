#pragma once

#include <array>
#include <filesystem>

#include "ctxaug/image.hpp"

namespace ctxaug {

/// Reads PNG or JPEG (chosen by file signature) and converts to RGB8.
/// Grey, paletted, 16-bit and alpha inputs are all flattened to RGB8.
RgbImage read_image(const std::filesystem::path& path);

/// Reads a single-channel PNG keeping raw values: palette indices for paletted
/// files, grey levels otherwise (the VOC SegmentationClass/Object convention).
LabelMap read_index_png(const std::filesystem::path& path);

/// Writes an 8-bit RGB PNG. Output bytes depend only on the pixels.
void write_png(const std::filesystem::path& path, const RgbImage& img);

/// Writes a paletted PNG using the Pascal VOC colour map.
void write_index_png(const std::filesystem::path& path, const LabelMap& labels);

/// Pascal VOC colour map entry for `index` (255 is the void/boundary colour).
std::array<std::uint8_t, 3> voc_colour(int index) noexcept;

}  // namespace ctxaug

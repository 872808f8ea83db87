#pragma once

#include <filesystem>

#include "surelet/grid.hpp"

namespace surelet {

/// Reads an 8- or 16-bit grayscale image (binary PGM "P5" or PNG) into a
/// 2D field on the [0, 255] scale. Color PNGs are converted to gray.
SpatialField read_image(const std::filesystem::path& path);

/// Writes an 8-bit image, rounding and clamping to [0, 255]. The format
/// follows the extension (.png, otherwise PGM).
void write_image(const std::filesystem::path& path, const SpatialField& image);

/// Centered size x size window of a 2D field (whole field when size is 0
/// or not smaller than the image).
SpatialField center_crop(const SpatialField& image, std::size_t size);

}  // namespace surelet

#pragma once

#include <filesystem>

#include "ginet/raster.hpp"

namespace ginet::io {

// 8-bit RGB PNG.
void write_png(const raster::Rgb8Image& img, const std::filesystem::path& path);
raster::Rgb8Image read_png(const std::filesystem::path& path);

// Binary PPM (P6).
void write_ppm(const raster::Rgb8Image& img, const std::filesystem::path& path);

// PNG unless the extension is ".ppm".
void write_image(const raster::Rgb8Image& img, const std::filesystem::path& path);

}  // namespace ginet::io

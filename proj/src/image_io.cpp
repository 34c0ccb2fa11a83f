#include "ginet/image_io.hpp"

#include <png.h>

#include <cstdio>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "ginet/error.hpp"

namespace ginet::io {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using File = std::unique_ptr<std::FILE, FileCloser>;

void check_image(const raster::Rgb8Image& img) {
  if (img.pixels.size() != std::size_t(img.height) * img.width * 3 || img.height == 0 ||
      img.width == 0) {
    throw Error(ErrorCode::kShapeMismatch, "image buffer does not match its size");
  }
}

}  // namespace

void write_png(const raster::Rgb8Image& img, const std::filesystem::path& path) {
  check_image(img);
  File f(std::fopen(path.c_str(), "wb"));
  if (!f) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw Error(ErrorCode::kIo, "libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::kIo, "PNG encoding failed for " + path.string());
  }
  png_init_io(png, f.get());
  png_set_IHDR(png, info, img.width, img.height, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (std::uint32_t y = 0; y < img.height; ++y) {
    png_write_row(png, img.pixels.data() + std::size_t(y) * img.width * 3);
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

raster::Rgb8Image read_png(const std::filesystem::path& path) {
  File f(std::fopen(path.c_str(), "rb"));
  if (!f) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw Error(ErrorCode::kIo, "libpng init failed");
  }
  raster::Rgb8Image img;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::kIo, "PNG decoding failed for " + path.string());
  }
  png_init_io(png, f.get());
  png_read_info(png, info);
  png_set_expand(png);
  png_set_strip_16(png);
  png_set_strip_alpha(png);
  png_set_gray_to_rgb(png);
  png_read_update_info(png, info);
  img.width = png_get_image_width(png, info);
  img.height = png_get_image_height(png, info);
  img.pixels.resize(std::size_t(img.height) * img.width * 3);
  for (std::uint32_t y = 0; y < img.height; ++y) {
    png_read_row(png, img.pixels.data() + std::size_t(y) * img.width * 3, nullptr);
  }
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

void write_ppm(const raster::Rgb8Image& img, const std::filesystem::path& path) {
  check_image(img);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << "P6\n" << img.width << ' ' << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()), std::streamsize(img.pixels.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path.string());
}

void write_image(const raster::Rgb8Image& img, const std::filesystem::path& path) {
  if (path.extension() == ".ppm") {
    write_ppm(img, path);
  } else {
    write_png(img, path);
  }
}

}  // namespace ginet::io

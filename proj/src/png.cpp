#include "mesongs/png.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <vector>

#include "mesongs/error.hpp"

namespace mesongs {

void write_png(const Image& image, const std::filesystem::path& path) {
  if (image.width < 1 || image.height < 1) throw_argument("cannot write an empty image");
  std::unique_ptr<FILE, int (*)(FILE*)> file(std::fopen(path.c_str(), "wb"), &std::fclose);
  if (!file) throw_error(ErrorKind::Io, "cannot open " + path.string() + " for writing");

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw_error(ErrorKind::Io, "libpng initialisation failed");
  }

  std::vector<png_byte> rows(static_cast<std::size_t>(image.width) * image.height * 3);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i] = static_cast<png_byte>(std::lround(std::clamp(image.pixels[i], 0.0, 1.0) * 255.0));
  }
  std::vector<png_bytep> row_ptrs(image.height);
  for (int y = 0; y < image.height; ++y) row_ptrs[y] = rows.data() + static_cast<std::size_t>(y) * image.width * 3;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw_error(ErrorKind::Io, "failed writing " + path.string());
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, image.width, image.height, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_set_rows(png, info, row_ptrs.data());
  png_write_png(png, info, PNG_TRANSFORM_IDENTITY, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace mesongs

#pragma once

#include <filesystem>

#include "mesongs/renderer.hpp"

namespace mesongs {

// 8-bit RGB PNG. Values are clamped to [0, 1] and scaled by 255 with no gamma
// transform.
void write_png(const Image& image, const std::filesystem::path& path);

}  // namespace mesongs

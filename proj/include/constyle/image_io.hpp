#pragma once

#include <string>

#include "constyle/image.hpp"

namespace constyle {

// 8-bit PNG, gray or RGB. Palette images are expanded, 16-bit depth is
// reduced, alpha is stripped. Sample v maps to v/255.
ImageTensor load_image(const std::string& path);

// Writes 8-bit gray (1 channel) or RGB (3 channels); samples are clamped to
// [0,1] and rounded to the nearest 8-bit code.
void save_image(const ImageTensor& img, const std::string& path);

}  // namespace constyle

#pragma once

#include <array>

#include "constyle/image.hpp"

namespace constyle {

// Quantization tables from the baseline JPEG standard, scaled by the IJG
// quality formula (quality in 1..100).
std::array<int, 64> jpeg_quant_table_luma(int quality);
std::array<int, 64> jpeg_quant_table_chroma(int quality);

// Full quantization cycle of a baseline JPEG codec without entropy coding:
// BT.601 -> 8x8 DCT -> quantize -> dequantize -> inverse DCT -> RGB.
// Edges are replicated to pad to block multiples, then cropped back.
// Gray input runs the luma path only. chroma_subsample enables 4:2:0.
ImageTensor jpeg_roundtrip(const ImageTensor& img, int quality, bool chroma_subsample = false);

}  // namespace constyle

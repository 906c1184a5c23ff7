#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "strotss/tensor.hpp"

namespace strotss {

// Decodes an 8-bit PNG or JPEG (detected from the file header) into a
// [3,H,W] tensor with values in [0,1]. Grayscale inputs are replicated to
// three channels. Any failure raises IoError naming the path.
Tensor load_image(const std::filesystem::path& path);

// Clamps to [0,1] and writes an 8-bit RGB PNG with round(v * 255).
void save_png(const std::filesystem::path& path, const Tensor& image);
std::vector<std::uint8_t> encode_png(const Tensor& image);

struct GrayImage {
  Extent extent;
  std::vector<std::uint8_t> pixels;  // row-major
};

// Reads an 8-bit single-channel PNG (gray or gray palette). Color images
// are rejected with ValidationError.
GrayImage load_gray_png(const std::filesystem::path& path);
void save_gray_png(const std::filesystem::path& path, const GrayImage& image);

}  // namespace strotss

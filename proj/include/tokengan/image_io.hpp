#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "tokengan/tensor.hpp"

namespace tokengan {

// [-1, 1] -> [0, 255]: v = (x + 1) * 127.5, clamped, rounded half to even.
std::uint8_t to_byte(double x);
double from_byte(std::uint8_t v);

// Interleaved 8-bit pixels of a [c x H x W] image, c in {1, 3}.
std::vector<std::uint8_t> to_pixels(const Tensor& image);

// Format follows the extension: .png, or .ppm / .pgm for binary netpbm.
void write_image(const std::string& path, const Tensor& image);
// Returns [c x H x W] in [-1, 1]; c is 1 for grayscale files and 3 otherwise
// (alpha is dropped).
Tensor read_image(const std::string& path);

// Tiles equally shaped [c x H x W] images row-major into `columns` columns
// with `padding` pixels of value -1 between tiles.
Tensor image_grid(const std::vector<Tensor>& images, std::size_t columns,
                  std::size_t padding = 0);

// Splits [B x c x H x W] into B images.
std::vector<Tensor> unbatch(const Tensor& batch);

}  // namespace tokengan

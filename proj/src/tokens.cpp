#include "tokengan/tokens.hpp"

#include <string>

#include "tokengan/errors.hpp"
#include "tokengan/ops.hpp"

namespace tokengan {

void ContentTokenGrid::validate() const {
  if (tokens.rank() != 2 || tokens.dim(0) != grid_h * grid_w) {
    throw DimensionError("content tokens " + shape_str(tokens.shape()) +
                         " do not fill a " + std::to_string(grid_h) + "x" +
                         std::to_string(grid_w) + " grid");
  }
  if (pos_encodings.shape() != tokens.shape()) {
    throw DimensionError("position encodings " +
                         shape_str(pos_encodings.shape()) +
                         " do not match content tokens " +
                         shape_str(tokens.shape()));
  }
  if (patch == 0) throw DimensionError("patch size must be positive");
}

ContentTokenGrid ContentTokenGrid::init(std::size_t grid_h, std::size_t grid_w,
                                        std::size_t width, std::size_t patch,
                                        Rng& rng) {
  const std::size_t m = grid_h * grid_w;
  ContentTokenGrid grid{rng.normal_tensor({m, width}, 1.0, true),
                        rng.normal_tensor({m, width}, 0.02, true), grid_h,
                        grid_w, patch};
  grid.validate();
  return grid;
}

Tensor with_positions(const ContentTokenGrid& grid) {
  if (grid.tokens.shape() != grid.pos_encodings.shape()) {
    throw DimensionError("tokens " + shape_str(grid.tokens.shape()) +
                         " vs position encodings " +
                         shape_str(grid.pos_encodings.shape()));
  }
  return add(grid.tokens, grid.pos_encodings);
}

Tensor tokens_to_image(const Tensor& tokens, std::size_t grid_h,
                       std::size_t grid_w, std::size_t patch,
                       std::size_t channels) {
  const bool batched = tokens.rank() == 3;
  if ((tokens.rank() != 2 && !batched) ||
      tokens.dim(tokens.rank() - 2) != grid_h * grid_w ||
      tokens.shape().back() != patch * patch * channels) {
    throw DimensionError("tokens " + shape_str(tokens.shape()) +
                         " cannot form a " + std::to_string(grid_h) + "x" +
                         std::to_string(grid_w) + " grid of " +
                         std::to_string(patch) + "x" + std::to_string(patch) +
                         " patches with " + std::to_string(channels) +
                         " channels");
  }
  const std::size_t b = batched ? tokens.dim(0) : 1;
  auto blocks = reshape(tokens, {b, grid_h, grid_w, channels, patch, patch});
  auto image = permute(blocks, {0, 3, 1, 4, 2, 5});
  Shape out{channels, grid_h * patch, grid_w * patch};
  if (batched) out.insert(out.begin(), b);
  return reshape(image, std::move(out));
}

Tensor image_to_tokens(const Tensor& image, std::size_t patch) {
  const bool batched = image.rank() == 4;
  if ((image.rank() != 3 && !batched) || patch == 0 ||
      image.shape()[image.rank() - 2] % patch != 0 ||
      image.shape().back() % patch != 0) {
    throw DimensionError("image " + shape_str(image.shape()) +
                         " does not split into " + std::to_string(patch) +
                         "x" + std::to_string(patch) + " patches");
  }
  const std::size_t b = batched ? image.dim(0) : 1;
  const std::size_t c = image.dim(image.rank() - 3);
  const std::size_t gh = image.shape()[image.rank() - 2] / patch;
  const std::size_t gw = image.shape().back() / patch;
  auto blocks = reshape(image, {b, c, gh, patch, gw, patch});
  auto tokens = permute(blocks, {0, 2, 4, 1, 3, 5});
  Shape out{gh * gw, c * patch * patch};
  if (batched) out.insert(out.begin(), b);
  return reshape(tokens, std::move(out));
}

}  // namespace tokengan

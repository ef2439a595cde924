#pragma once

#include <cstddef>

#include "tokengan/random.hpp"
#include "tokengan/tensor.hpp"

namespace tokengan {

// Learned constant input: m content tokens on a grid_h x grid_w grid, each
// covering a patch x patch image region.
struct ContentTokenGrid {
  Tensor tokens;         // [m x d]
  Tensor pos_encodings;  // [m x d]
  std::size_t grid_h = 0;
  std::size_t grid_w = 0;
  std::size_t patch = 1;

  std::size_t count() const { return grid_h * grid_w; }
  std::size_t width() const { return tokens.dim(1); }
  // Throws DimensionError when the invariants do not hold.
  void validate() const;

  // Tokens ~ N(0, 1), position encodings ~ N(0, 0.02^2).
  static ContentTokenGrid init(std::size_t grid_h, std::size_t grid_w,
                               std::size_t width, std::size_t patch, Rng& rng);
};

// tokens + pos_encodings
Tensor with_positions(const ContentTokenGrid& grid);

// Style tokens for one image [n x d] or a batch [B x n x d].
struct StyleTokenSet {
  Tensor styles;

  std::size_t count() const { return styles.dim(styles.rank() - 2); }
  std::size_t width() const { return styles.shape().back(); }
  std::size_t batch() const { return styles.rank() == 3 ? styles.dim(0) : 1; }
};

// Learnable per-layer keys, one row per style token.
struct SemanticKeySet {
  Tensor keys;  // [n x d]
};

// Content-to-style attention of one style block: [m x n] or [B x m x n],
// every row a probability vector.
struct AttentionMap {
  Tensor weights;
  std::size_t layer_index = 0;
};

// Places token i (row-major over the grid) into its patch x patch region.
// Token channels are laid out channel-major, then row-major within the
// patch: element (ch, py, px) sits at ch * patch^2 + py * patch + px.
// tokens [m x patch^2*c] -> image [c x grid_h*patch x grid_w*patch]; a
// leading batch axis is carried through.
Tensor tokens_to_image(const Tensor& tokens, std::size_t grid_h,
                       std::size_t grid_w, std::size_t patch,
                       std::size_t channels);

// Exact inverse of tokens_to_image.
Tensor image_to_tokens(const Tensor& image, std::size_t patch);

}  // namespace tokengan

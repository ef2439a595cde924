#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include "tokengan/nn.hpp"
#include "tokengan/tokens.hpp"

namespace tokengan {

enum class NormKind { kLayer, kInstance, kPixel };

std::string norm_kind_name(NormKind kind);
// Accepts "layer", "instance", "pixel"; throws ConfigError otherwise.
NormKind parse_norm_kind(const std::string& name);

// LayerNorm and PixelNorm act per token (row); InstanceNorm standardizes
// each channel across the tokens of one image.
Tensor normalize(const Tensor& c, NormKind kind);

struct StyleComputation {
  Tensor styles;     // S': [m x d] or [B x m x d]
  Tensor attention;  // [m x n] or [B x m x n], averaged over heads
};

// Q = c_norm W^T + b, attention = softmax(Q K^T / sqrt(d_head)) and
// S' = attention . styles. With heads > 1 the width is split into equal
// slices that attend independently.
StyleComputation compute_styles(const Tensor& c_norm, const Tensor& keys,
                                const Tensor& styles, const Tensor& query_w,
                                const Tensor& query_b, std::size_t heads = 1);

// c * s_prime, shapes must agree exactly.
Tensor modulate(const Tensor& c, const Tensor& s_prime);

struct StyleBlockParams {
  SemanticKeySet keys;
  DenseLayer query;
  DenseLayer embed;
  NormKind norm = NormKind::kLayer;
  std::size_t heads = 1;
  bool activation = true;  // leaky-ReLU(0.2) after the embedding
  // Maps style tokens to the block width when the two differ.
  std::optional<DenseLayer> style_adapter;

  std::size_t width() const { return embed.out_features(); }
  static StyleBlockParams init(std::size_t width, std::size_t style_tokens,
                               std::size_t style_width, NormKind norm,
                               std::size_t heads, Rng& rng);
  void validate(std::size_t style_tokens, std::size_t style_width) const;
  void append_params(const std::string& prefix, ParamList& out) const;
};

struct StyleBlockOutput {
  Tensor tokens;
  Tensor attention;
  Tensor styles;  // S'
};

StyleBlockOutput style_block_forward(const Tensor& c_in,
                                     const StyleTokenSet& styles,
                                     const StyleBlockParams& params);

}  // namespace tokengan

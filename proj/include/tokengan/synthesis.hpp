#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "tokengan/nn.hpp"
#include "tokengan/ops.hpp"
#include "tokengan/style_block.hpp"
#include "tokengan/tokens.hpp"

namespace tokengan {

struct SynthesisConfig {
  std::vector<std::size_t> resolutions{4, 8, 16, 32};
  // Per-resolution patch edge p and channel count d. A token at that
  // resolution is p*p*d wide and the grid has (resolution / p)^2 tokens.
  std::vector<std::size_t> patch_sizes{1, 1, 1, 1};
  std::vector<std::size_t> channels{32, 32, 32, 32};
  std::size_t blocks_per_resolution = 2;
  std::size_t style_tokens = 8;
  std::size_t style_width = 32;
  std::size_t image_channels = 3;
  NormKind norm = NormKind::kLayer;
  std::size_t heads = 1;
  Resample token_upsample = Resample::kBilinear;
  // Per-block linear maps from style_width to the block width. Required
  // whenever some token width differs from style_width.
  bool style_adapters = false;

  void validate() const;
  bool operator==(const SynthesisConfig&) const = default;
  std::size_t levels() const { return resolutions.size(); }
  std::size_t layer_count() const { return levels() * blocks_per_resolution; }
  std::size_t grid(std::size_t level) const {
    return resolutions[level] / patch_sizes[level];
  }
  std::size_t token_width(std::size_t level) const {
    return patch_sizes[level] * patch_sizes[level] * channels[level];
  }
  std::size_t output_resolution() const { return resolutions.back(); }
};

struct SynthesisLevel {
  std::vector<StyleBlockParams> blocks;
  DenseLayer to_rgb;  // token width -> p*p*image_channels
  // Applied after the grid grows when the token width changes.
  std::optional<DenseLayer> transition;
};

struct SynthesisParams {
  ContentTokenGrid base;
  std::vector<SynthesisLevel> levels;
};

struct SynthesisOutput {
  Tensor image;  // [c x H x W] or [B x c x H x W]
  std::vector<AttentionMap> attention;  // one per style block
};

class SynthesisNetwork {
 public:
  SynthesisNetwork(SynthesisConfig config, Rng& rng);
  SynthesisNetwork(SynthesisConfig config, SynthesisParams params);

  const SynthesisConfig& config() const { return config_; }
  const SynthesisParams& params() const { return params_; }
  SynthesisParams& mutable_params() { return params_; }

  // `styles` holds either one set shared by every layer or one per layer.
  // Unbatched sets [n x d] give an image [c x H x W]; batched sets
  // [B x n x d] give [B x c x H x W].
  SynthesisOutput synthesize(const std::vector<StyleTokenSet>& styles) const;

  ParamList parameters() const;

 private:
  void check_params() const;

  SynthesisConfig config_;
  SynthesisParams params_;
};

// Bilinear (or nearest) 2x growth of a token grid [..., gh*gw, d].
Tensor upsample_token_grid(const Tensor& tokens, std::size_t grid_h,
                           std::size_t grid_w,
                           Resample mode = Resample::kBilinear);

}  // namespace tokengan

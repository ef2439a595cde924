#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "tokengan/nn.hpp"
#include "tokengan/tokens.hpp"

namespace tokengan {

struct MappingConfig {
  std::size_t width = 32;        // d: latent, trunk and style-token width
  std::size_t depth = 4;         // trunk layers
  std::size_t style_tokens = 8;  // n
  // Independent style sets produced per image. 1 shares one set across
  // every synthesis layer; otherwise one set per layer.
  std::size_t style_sets = 1;
  double slope = 0.2;

  void validate() const;
};

struct MappingParams {
  std::vector<DenseLayer> trunk;
  std::vector<DenseLayer> heads;  // style_tokens * style_sets
};

class MappingNetwork {
 public:
  MappingNetwork(MappingConfig config, Rng& rng);
  MappingNetwork(MappingConfig config, MappingParams params);

  const MappingConfig& config() const { return config_; }
  const MappingParams& params() const { return params_; }

  // z [d] or [B x d] -> style sets of shape [n x d] or [B x n x d].
  // The input is pixel-normalized before the trunk.
  std::vector<StyleTokenSet> map_all(const Tensor& z) const;
  // First (or only) style set.
  StyleTokenSet map(const Tensor& z) const;

  ParamList parameters() const;

 private:
  MappingConfig config_;
  MappingParams params_;
};

// Standard-normal latent drawn from a generator seeded with `seed`.
Tensor sample_latent(std::uint64_t seed, std::size_t width);
// [count x width] batch of latents from a running generator.
Tensor sample_latents(Rng& rng, std::size_t count, std::size_t width);

}  // namespace tokengan

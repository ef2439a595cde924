#pragma once

#include <cstddef>
#include <vector>

#include "tokengan/mapping.hpp"
#include "tokengan/synthesis.hpp"

namespace tokengan {

// Style sets feeding the synthesis layers: one shared set or one per layer.
using LayerStyles = std::vector<StyleTokenSet>;

struct GeneratorConfig {
  SynthesisConfig synthesis;
  std::size_t mapping_depth = 4;
  bool per_layer_styles = false;

  MappingConfig mapping() const;
  void validate() const;
  bool operator==(const GeneratorConfig&) const = default;
};

class Generator {
 public:
  Generator(GeneratorConfig config, Rng& rng);
  Generator(GeneratorConfig config, MappingNetwork mapping,
            SynthesisNetwork synthesis);

  const GeneratorConfig& config() const { return config_; }
  const MappingNetwork& mapping() const { return mapping_; }
  const SynthesisNetwork& synthesis() const { return synthesis_; }
  std::size_t latent_width() const { return config_.synthesis.style_width; }

  // z [d] or [B x d] -> the style sets of that latent.
  LayerStyles map(const Tensor& z) const;
  SynthesisOutput synthesize(const LayerStyles& styles) const;
  // synthesize(map(z)).image
  Tensor generate(const Tensor& z) const;

  ParamList parameters() const;
  // Independent copy with fresh parameter tensors.
  Generator clone(bool trainable) const;

 private:
  GeneratorConfig config_;
  MappingNetwork mapping_;
  SynthesisNetwork synthesis_;
};

}  // namespace tokengan

#include "tokengan/generator.hpp"

#include "tokengan/errors.hpp"

namespace tokengan {

MappingConfig GeneratorConfig::mapping() const {
  MappingConfig m;
  m.width = synthesis.style_width;
  m.depth = mapping_depth;
  m.style_tokens = synthesis.style_tokens;
  m.style_sets = per_layer_styles ? synthesis.layer_count() : 1;
  return m;
}

void GeneratorConfig::validate() const {
  synthesis.validate();
  mapping().validate();
}

Generator::Generator(GeneratorConfig config, Rng& rng)
    : config_(config),
      mapping_((config_.validate(), config_.mapping()), rng),
      synthesis_(config_.synthesis, rng) {}

Generator::Generator(GeneratorConfig config, MappingNetwork mapping,
                     SynthesisNetwork synthesis)
    : config_(std::move(config)),
      mapping_(std::move(mapping)),
      synthesis_(std::move(synthesis)) {
  config_.validate();
  const auto expected = config_.mapping();
  const auto& actual = mapping_.config();
  if (actual.width != expected.width || actual.depth != expected.depth ||
      actual.style_tokens != expected.style_tokens ||
      actual.style_sets != expected.style_sets) {
    throw ConfigError("mapping network does not match the generator configuration");
  }
}

LayerStyles Generator::map(const Tensor& z) const { return mapping_.map_all(z); }

SynthesisOutput Generator::synthesize(const LayerStyles& styles) const {
  return synthesis_.synthesize(styles);
}

Tensor Generator::generate(const Tensor& z) const {
  return synthesize(map(z)).image;
}

ParamList Generator::parameters() const {
  ParamList out = mapping_.parameters();
  for (auto& p : synthesis_.parameters()) out.push_back(std::move(p));
  return out;
}

Generator Generator::clone(bool trainable) const {
  Rng scratch(0);
  Generator copy(config_, scratch);
  const ParamList params = copy.parameters();
  assign_params(params, parameters());
  set_trainable(params, trainable);
  return copy;
}

}  // namespace tokengan

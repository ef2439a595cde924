#include "tokengan/mapping.hpp"

#include <string>

#include "tokengan/errors.hpp"
#include "tokengan/ops.hpp"

namespace tokengan {

void MappingConfig::validate() const {
  if (width == 0) throw ConfigError("mapping width must be positive");
  if (depth == 0) throw ConfigError("mapping depth must be at least 1");
  if (style_tokens == 0) throw ConfigError("style token count must be at least 1");
  if (style_sets == 0) throw ConfigError("style set count must be at least 1");
}

MappingNetwork::MappingNetwork(MappingConfig config, Rng& rng)
    : config_(config) {
  config_.validate();
  const std::size_t d = config_.width;
  for (std::size_t i = 0; i < config_.depth; ++i) {
    params_.trunk.push_back(DenseLayer::init(d, d, rng));
  }
  for (std::size_t j = 0; j < config_.style_tokens * config_.style_sets; ++j) {
    params_.heads.push_back(DenseLayer::init(d, d, rng));
  }
}

MappingNetwork::MappingNetwork(MappingConfig config, MappingParams params)
    : config_(config), params_(std::move(params)) {
  config_.validate();
  if (params_.trunk.size() != config_.depth ||
      params_.heads.size() != config_.style_tokens * config_.style_sets) {
    throw ConfigError("mapping parameters do not match the configuration");
  }
  for (const auto* group : {&params_.trunk, &params_.heads}) {
    for (const auto& layer : *group) {
      if (layer.in_features() != config_.width ||
          layer.out_features() != config_.width) {
        throw DimensionError("mapping layer " +
                             shape_str(layer.weight.shape()) +
                             " does not have width " +
                             std::to_string(config_.width));
      }
    }
  }
}

std::vector<StyleTokenSet> MappingNetwork::map_all(const Tensor& z) const {
  const std::size_t d = config_.width;
  if ((z.rank() != 1 && z.rank() != 2) || z.shape().back() != d) {
    throw DimensionError("latent " + shape_str(z.shape()) +
                         " does not have width " + std::to_string(d));
  }
  Tensor h = pixel_norm(z);
  for (const auto& layer : params_.trunk) {
    h = leaky_relu(layer.forward(h), config_.slope);
  }
  const std::size_t n = config_.style_tokens;
  std::vector<StyleTokenSet> sets;
  for (std::size_t s = 0; s < config_.style_sets; ++s) {
    std::vector<Tensor> outs;
    for (std::size_t j = 0; j < n; ++j) {
      outs.push_back(params_.heads[s * n + j].forward(h));
    }
    Tensor joined = concat(outs, z.rank() - 1);
    Shape shape{n, d};
    if (z.rank() == 2) shape.insert(shape.begin(), z.dim(0));
    sets.push_back({reshape(joined, std::move(shape))});
  }
  return sets;
}

StyleTokenSet MappingNetwork::map(const Tensor& z) const {
  return map_all(z).front();
}

ParamList MappingNetwork::parameters() const {
  ParamList out;
  for (std::size_t i = 0; i < params_.trunk.size(); ++i) {
    params_.trunk[i].append_params("mapping.trunk." + std::to_string(i), out);
  }
  for (std::size_t j = 0; j < params_.heads.size(); ++j) {
    params_.heads[j].append_params("mapping.head." + std::to_string(j), out);
  }
  return out;
}

Tensor sample_latent(std::uint64_t seed, std::size_t width) {
  Rng rng(seed);
  return rng.normal_tensor({width});
}

Tensor sample_latents(Rng& rng, std::size_t count, std::size_t width) {
  return rng.normal_tensor({count, width});
}

}  // namespace tokengan

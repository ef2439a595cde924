#include "tokengan/synthesis.hpp"

#include <string>

#include "tokengan/errors.hpp"

namespace tokengan {

void SynthesisConfig::validate() const {
  const std::size_t count = resolutions.size();
  if (count == 0) throw ConfigError("at least one resolution is required");
  if (patch_sizes.size() != count || channels.size() != count) {
    throw ConfigError("resolutions, patch sizes and channels need " +
                      std::to_string(count) + " entries each");
  }
  if (blocks_per_resolution == 0) throw ConfigError("blocks per resolution must be at least 1");
  if (style_tokens == 0) throw ConfigError("style token count must be at least 1");
  if (style_width == 0 || image_channels == 0) throw ConfigError("widths must be positive");
  for (std::size_t i = 0; i < count; ++i) {
    const std::string at = " at resolution " + std::to_string(resolutions[i]);
    if (patch_sizes[i] == 0 || channels[i] == 0) throw ConfigError("zero patch size or channels" + at);
    if (resolutions[i] % patch_sizes[i] != 0) {
      throw ConfigError("patch size " + std::to_string(patch_sizes[i]) +
                        " does not divide the resolution" + at);
    }
    if (heads == 0 || token_width(i) % heads != 0) {
      throw ConfigError("token width " + std::to_string(token_width(i)) +
                        " is not divisible by " + std::to_string(heads) +
                        " heads" + at);
    }
    if (!style_adapters && token_width(i) != style_width) {
      throw ConfigError("token width " + std::to_string(token_width(i)) +
                        " differs from style width " +
                        std::to_string(style_width) + at +
                        "; enable style adapters");
    }
    if (i == 0) continue;
    if (resolutions[i] != 2 * resolutions[i - 1]) {
      throw ConfigError("each resolution must double the previous one" + at);
    }
    if (grid(i) != grid(i - 1) && grid(i) != 2 * grid(i - 1)) {
      throw ConfigError("token grid must stay the same or double" + at);
    }
  }
}

Tensor upsample_token_grid(const Tensor& tokens, std::size_t grid_h,
                           std::size_t grid_w, Resample mode) {
  return upsample2x_tokens(tokens, grid_h, grid_w, mode);
}

SynthesisNetwork::SynthesisNetwork(SynthesisConfig config, Rng& rng)
    : config_(std::move(config)) {
  config_.validate();
  const auto& c = config_;
  params_.base = ContentTokenGrid::init(c.grid(0), c.grid(0), c.token_width(0),
                                        c.patch_sizes[0], rng);
  for (std::size_t i = 0; i < c.levels(); ++i) {
    SynthesisLevel level;
    const std::size_t w = c.token_width(i);
    if (i > 0 && w != c.token_width(i - 1)) {
      level.transition = DenseLayer::init(w, c.token_width(i - 1), rng);
    }
    for (std::size_t b = 0; b < c.blocks_per_resolution; ++b) {
      level.blocks.push_back(StyleBlockParams::init(
          w, c.style_tokens, c.style_width, c.norm, c.heads, rng));
    }
    const std::size_t p = c.patch_sizes[i];
    level.to_rgb = DenseLayer::init(p * p * c.image_channels, w, rng);
    params_.levels.push_back(std::move(level));
  }
  check_params();
}

SynthesisNetwork::SynthesisNetwork(SynthesisConfig config,
                                   SynthesisParams params)
    : config_(std::move(config)), params_(std::move(params)) {
  config_.validate();
  check_params();
}

void SynthesisNetwork::check_params() const {
  const auto& c = config_;
  params_.base.validate();
  if (params_.base.grid_h != c.grid(0) || params_.base.grid_w != c.grid(0) ||
      params_.base.width() != c.token_width(0)) {
    throw ConfigError("base token grid does not match the configuration");
  }
  if (params_.levels.size() != c.levels()) {
    throw ConfigError("synthesis parameters cover " +
                      std::to_string(params_.levels.size()) +
                      " resolutions, configuration has " +
                      std::to_string(c.levels()));
  }
  for (std::size_t i = 0; i < c.levels(); ++i) {
    const auto& level = params_.levels[i];
    const std::size_t w = c.token_width(i);
    if (level.blocks.size() != c.blocks_per_resolution) {
      throw ConfigError("wrong block count at resolution " +
                        std::to_string(c.resolutions[i]));
    }
    for (const auto& block : level.blocks) {
      if (block.width() != w) {
        throw DimensionError("block width " + std::to_string(block.width()) +
                             " at resolution " +
                             std::to_string(c.resolutions[i]) +
                             " should be " + std::to_string(w));
      }
      block.validate(c.style_tokens, c.style_width);
    }
    const std::size_t p = c.patch_sizes[i];
    if (level.to_rgb.in_features() != w ||
        level.to_rgb.out_features() != p * p * c.image_channels) {
      throw DimensionError("toRGB " + shape_str(level.to_rgb.weight.shape()) +
                           " at resolution " +
                           std::to_string(c.resolutions[i]));
    }
    const bool needs_transition = i > 0 && w != c.token_width(i - 1);
    if (needs_transition != level.transition.has_value()) {
      throw ConfigError("width transition mismatch at resolution " +
                        std::to_string(c.resolutions[i]));
    }
  }
}

SynthesisOutput SynthesisNetwork::synthesize(
    const std::vector<StyleTokenSet>& styles) const {
  const auto& c = config_;
  if (styles.size() != 1 && styles.size() != c.layer_count()) {
    throw ContractError("expected 1 or " + std::to_string(c.layer_count()) +
                        " style sets, got " + std::to_string(styles.size()));
  }
  const Tensor& first = styles.front().styles;
  const bool batched = first.rank() == 3;
  for (const auto& s : styles) {
    if (s.styles.rank() != first.rank() ||
        (batched && s.styles.dim(0) != first.dim(0))) {
      throw DimensionError("style sets disagree on batch shape: " +
                           shape_str(first.shape()) + " vs " +
                           shape_str(s.styles.shape()));
    }
  }

  Tensor tokens = with_positions(params_.base);
  if (batched) tokens = repeat_batch(tokens, first.dim(0));

  SynthesisOutput out;
  Tensor acc;
  std::size_t layer = 0;
  for (std::size_t i = 0; i < c.levels(); ++i) {
    const auto& level = params_.levels[i];
    if (i > 0 && c.grid(i) != c.grid(i - 1)) {
      tokens = upsample_token_grid(tokens, c.grid(i - 1), c.grid(i - 1),
                                   c.token_upsample);
    }
    if (level.transition) tokens = level.transition->forward(tokens);
    for (const auto& block : level.blocks) {
      const auto& set = styles.size() == 1 ? styles.front() : styles[layer];
      auto result = style_block_forward(tokens, set, block);
      tokens = result.tokens;
      out.attention.push_back({result.attention, layer});
      ++layer;
    }
    const Tensor rgb =
        tokens_to_image(level.to_rgb.forward(tokens), c.grid(i), c.grid(i),
                        c.patch_sizes[i], c.image_channels);
    acc = acc.defined() ? add(upsample2x(acc, Resample::kBilinear), rgb) : rgb;
  }
  out.image = acc;
  return out;
}

ParamList SynthesisNetwork::parameters() const {
  ParamList out;
  out.push_back({"synthesis.const.tokens", params_.base.tokens});
  out.push_back({"synthesis.const.pos", params_.base.pos_encodings});
  for (std::size_t i = 0; i < params_.levels.size(); ++i) {
    const std::string prefix =
        "synthesis." + std::to_string(config_.resolutions[i]);
    const auto& level = params_.levels[i];
    if (level.transition) {
      level.transition->append_params(prefix + ".transition", out);
    }
    for (std::size_t b = 0; b < level.blocks.size(); ++b) {
      level.blocks[b].append_params(prefix + "." + std::to_string(b), out);
    }
    level.to_rgb.append_params(prefix + ".torgb", out);
  }
  return out;
}

}  // namespace tokengan

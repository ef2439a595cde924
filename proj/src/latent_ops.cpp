#include "tokengan/latent_ops.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <string>

#include "tokengan/adam.hpp"
#include "tokengan/errors.hpp"
#include "tokengan/ops.hpp"

namespace tokengan {

StyleTokenSet edit_style(const StyleTokenSet& styles, std::size_t token_index,
                         const Tensor& value) {
  if (styles.styles.rank() != 2) {
    throw DimensionError("edit_style expects [n x d] styles, got " +
                         shape_str(styles.styles.shape()));
  }
  const std::size_t n = styles.count();
  const std::size_t d = styles.width();
  if (token_index >= n) {
    throw ContractError("style token " + std::to_string(token_index) +
                        " outside [0, " + std::to_string(n) + ")");
  }
  if (value.shape() != Shape{d}) {
    throw DimensionError("new style value " + shape_str(value.shape()) +
                         " vs token width " + std::to_string(d));
  }
  std::vector<double> values = styles.styles.to_vector();
  std::ranges::copy(value.data(), values.begin() + token_index * d);
  return {Tensor::from({n, d}, std::move(values))};
}

StyleTokenSet interpolate(const StyleTokenSet& s1, const StyleTokenSet& s2,
                          double alpha) {
  if (s1.styles.shape() != s2.styles.shape()) {
    throw DimensionError("cannot interpolate " + shape_str(s1.styles.shape()) +
                         " and " + shape_str(s2.styles.shape()));
  }
  if (alpha < 0.0 || alpha > 1.0) {
    std::clog << "warning: interpolation weight " << alpha
              << " extrapolates beyond the endpoints\n";
  }
  return {add(scale(s1.styles, alpha), scale(s2.styles, 1.0 - alpha))};
}

LayerStyles interpolate(const LayerStyles& s1, const LayerStyles& s2,
                        double alpha) {
  if (s1.size() != s2.size()) {
    throw DimensionError("style lists of " + std::to_string(s1.size()) +
                         " and " + std::to_string(s2.size()) + " sets");
  }
  LayerStyles out;
  for (std::size_t i = 0; i < s1.size(); ++i) {
    out.push_back(interpolate(s1[i], s2[i], alpha));
  }
  return out;
}

std::vector<double> interpolation_alphas(std::size_t steps) {
  if (steps < 2) throw ContractError("an interpolation strip needs at least 2 steps");
  std::vector<double> alphas(steps);
  for (std::size_t i = 0; i < steps; ++i) {
    alphas[i] = 1.0 - static_cast<double>(i) / static_cast<double>(steps - 1);
  }
  return alphas;
}

void InversionConfig::validate() const {
  if (iterations == 0) throw ConfigError("inversion needs at least one iteration");
  if (!(step_size > 0.0)) throw ConfigError("inversion step size must be positive");
  if (space == InversionSpace::kStyle && init_samples == 0) {
    throw ConfigError("mean-style initialization needs at least one sample");
  }
}

LayerStyles mean_styles(const Generator& gen, std::size_t samples,
                        std::uint64_t seed) {
  if (samples == 0) throw ContractError("mean_styles needs at least one sample");
  NoGradGuard no_grad;
  Rng rng(seed);
  const LayerStyles mapped =
      gen.map(sample_latents(rng, samples, gen.latent_width()));
  LayerStyles out;
  for (const auto& set : mapped) {
    const std::size_t n = set.styles.dim(1);
    const std::size_t d = set.styles.dim(2);
    std::vector<double> acc(n * d, 0.0);
    const auto data = set.styles.data();
    for (std::size_t s = 0; s < samples; ++s) {
      for (std::size_t i = 0; i < n * d; ++i) acc[i] += data[s * n * d + i];
    }
    for (double& v : acc) v /= static_cast<double>(samples);
    out.push_back({Tensor::from({n, d}, std::move(acc))});
  }
  return out;
}

namespace {

LayerStyles detached(const LayerStyles& styles) {
  LayerStyles out;
  for (const auto& s : styles) out.push_back({s.styles.detach()});
  return out;
}

}  // namespace

InversionResult invert(const Tensor& target, const Generator& gen,
                       const InversionConfig& config,
                       const LayerStyles* init) {
  config.validate();
  const auto& syn = gen.config().synthesis;
  const Shape expected{syn.image_channels, syn.output_resolution(),
                       syn.output_resolution()};
  if (target.shape() != expected) {
    throw DimensionError("inversion target " + shape_str(target.shape()) +
                         " vs generator output " + shape_str(expected));
  }
  const Generator frozen = gen.clone(false);
  const Tensor goal = target.detach();

  std::vector<Tensor> variables;
  LayerStyles styles;
  Tensor latent;
  if (config.space == InversionSpace::kLatent) {
    Rng rng(config.seed);
    latent = rng.normal_tensor({gen.latent_width()}, 1.0, true);
    variables.push_back(latent);
  } else {
    const LayerStyles start =
        init ? *init : mean_styles(frozen, config.init_samples, config.seed);
    for (const auto& s : start) {
      if (s.styles.rank() != 2) {
        throw DimensionError("inversion styles must be unbatched, got " +
                             shape_str(s.styles.shape()));
      }
      styles.push_back({s.styles.clone_leaf(true)});
      variables.push_back(styles.back().styles);
    }
  }

  Adam adam(variables, AdamConfig{config.step_size, 0.0, 0.99, 1e-8});
  InversionResult result;
  result.best_mse = std::numeric_limits<double>::infinity();
  result.mse_curve.reserve(config.iterations);
  for (std::size_t it = 0; it < config.iterations; ++it) {
    for (auto& v : variables) v.zero_grad();
    const LayerStyles current =
        config.space == InversionSpace::kLatent ? frozen.map(latent) : styles;
    const Tensor image = frozen.synthesize(current).image;
    const Tensor loss = mean(square(sub(image, goal)));
    const double value = loss.item();
    if (!std::isfinite(value)) {
      throw NumericError("non-finite inversion loss at iteration " +
                         std::to_string(it));
    }
    result.mse_curve.push_back(value);
    if (value < result.best_mse) {
      result.best_mse = value;
      result.styles = detached(current);
      result.image = image.detach();
      if (latent.defined()) result.latent = latent.detach();
    }
    if (it + 1 == config.iterations) break;
    loss.backward();
    adam.step();
  }
  return result;
}

AttentionHeatMaps extract_attention(const Generator& gen,
                                    const LayerStyles& styles,
                                    std::size_t layer) {
  const auto& syn = gen.config().synthesis;
  if (layer >= syn.layer_count()) {
    throw ContractError("layer " + std::to_string(layer) + " outside [0, " +
                        std::to_string(syn.layer_count()) + ")");
  }
  for (const auto& s : styles) {
    if (s.styles.rank() != 2) {
      throw DimensionError("attention extraction expects unbatched styles");
    }
  }
  NoGradGuard no_grad;
  const SynthesisOutput out = gen.synthesize(styles);
  const AttentionMap& map = out.attention.at(layer);
  const std::size_t m = map.weights.dim(0);
  const std::size_t n = map.weights.dim(1);
  const std::size_t grid = syn.grid(layer / syn.blocks_per_resolution);
  const std::size_t res = syn.output_resolution();
  const std::size_t factor = res / grid;
  if (grid * grid != m) {
    throw DimensionError("attention rows " + std::to_string(m) +
                         " do not form a " + std::to_string(grid) + "^2 grid");
  }

  const auto w = map.weights.data();
  std::vector<double> raw(n * res * res);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t y = 0; y < res; ++y) {
      for (std::size_t x = 0; x < res; ++x) {
        const std::size_t token = (y / factor) * grid + x / factor;
        raw[(j * res + y) * res + x] = w[token * n + j];
      }
    }
  }
  std::vector<double> norm(raw.size());
  const std::size_t plane = res * res;
  for (std::size_t j = 0; j < n; ++j) {
    const auto first = raw.begin() + j * plane;
    const auto [lo, hi] = std::minmax_element(first, first + plane);
    const double lo_v = *lo;
    const double span = *hi - lo_v;
    for (std::size_t i = 0; i < plane; ++i) {
      const double v = raw[j * plane + i];
      norm[j * plane + i] =
          span > 0.0 ? (v - lo_v) / span : std::clamp(v, 0.0, 1.0);
    }
  }
  return {AttentionMap{map.weights.detach(), map.layer_index},
          Tensor::from({n, res, res}, std::move(raw)),
          Tensor::from({n, res, res}, std::move(norm))};
}

double mean_absolute_error(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError("cannot compare images " + shape_str(a.shape()) +
                         " and " + shape_str(b.shape()));
  }
  double total = 0.0;
  const auto x = a.data();
  const auto y = b.data();
  for (std::size_t i = 0; i < x.size(); ++i) total += std::abs(x[i] - y[i]);
  return total * 127.5 / static_cast<double>(x.size());
}

double mean_squared_error(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError("cannot compare images " + shape_str(a.shape()) +
                         " and " + shape_str(b.shape()));
  }
  double total = 0.0;
  const auto x = a.data();
  const auto y = b.data();
  for (std::size_t i = 0; i < x.size(); ++i) total += (x[i] - y[i]) * (x[i] - y[i]);
  return total / static_cast<double>(x.size());
}

}  // namespace tokengan

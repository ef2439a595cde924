#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "tokengan/generator.hpp"

namespace tokengan {

// Copy of `styles` [n x d] with row j replaced by `value` [d].
StyleTokenSet edit_style(const StyleTokenSet& styles, std::size_t token_index,
                         const Tensor& value);

// alpha * s1 + (1 - alpha) * s2, per token. Alpha outside [0, 1]
// extrapolates and logs a warning.
StyleTokenSet interpolate(const StyleTokenSet& s1, const StyleTokenSet& s2,
                          double alpha);
LayerStyles interpolate(const LayerStyles& s1, const LayerStyles& s2,
                        double alpha);

// Blend weights for a strip of `steps` panels: 1 at the first panel, 0 at
// the last.
std::vector<double> interpolation_alphas(std::size_t steps);

enum class InversionSpace { kStyle, kLatent };

struct InversionConfig {
  std::size_t iterations = 500;
  double step_size = 0.05;
  InversionSpace space = InversionSpace::kStyle;
  // Latents averaged for the initial style set (style space), or the seed of
  // the starting latent (latent space).
  std::size_t init_samples = 1000;
  std::uint64_t seed = 0;

  void validate() const;
};

struct InversionResult {
  LayerStyles styles;   // best iterate, in style space
  Tensor latent;        // best latent; latent space only
  Tensor image;         // synthesis of the best iterate
  std::vector<double> mse_curve;  // loss evaluated at each iteration
  double best_mse = 0.0;
};

// Mean of `samples` mapped latents drawn from `seed`, one entry per style set.
LayerStyles mean_styles(const Generator& gen, std::size_t samples,
                        std::uint64_t seed);

// Adam on pixel MSE against `target` [c x H x W]. Runs from `init` when
// given (style space), otherwise from the configured initialization.
InversionResult invert(const Tensor& target, const Generator& gen,
                       const InversionConfig& config,
                       const LayerStyles* init = nullptr);

struct AttentionHeatMaps {
  AttentionMap map;      // [m x n]
  Tensor raw;            // [n x H x W], columns upsampled to the output size
  Tensor normalized;     // raw rescaled to [0, 1] per token
};

// Attention of style block `layer` (0-based over all blocks) for unbatched
// styles.
AttentionHeatMaps extract_attention(const Generator& gen,
                                    const LayerStyles& styles,
                                    std::size_t layer);

// Mean |a - b| after mapping [-1, 1] to [0, 255].
double mean_absolute_error(const Tensor& a, const Tensor& b);
double mean_squared_error(const Tensor& a, const Tensor& b);

}  // namespace tokengan

#pragma once

#include <cstddef>

#include "tokengan/generator.hpp"

namespace tokengan {

// Tokens [0, t) from a, [t, n) from b. Works on [n x d] and [B x n x d].
StyleTokenSet mix_styles(const StyleTokenSet& a, const StyleTokenSet& b,
                         std::size_t inject_point);

// Layers [0, layer) take a's styles and the rest take b's. Shared sets are
// expanded to one entry per layer.
LayerStyles mix_layers(const LayerStyles& a, const LayerStyles& b,
                       std::size_t layer, std::size_t layer_count);

}  // namespace tokengan

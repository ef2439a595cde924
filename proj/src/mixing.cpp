#include "tokengan/mixing.hpp"

#include <string>

#include "tokengan/errors.hpp"
#include "tokengan/ops.hpp"

namespace tokengan {

StyleTokenSet mix_styles(const StyleTokenSet& a, const StyleTokenSet& b,
                         std::size_t inject_point) {
  if (a.styles.shape() != b.styles.shape()) {
    throw DimensionError("cannot mix style sets " +
                         shape_str(a.styles.shape()) + " and " +
                         shape_str(b.styles.shape()));
  }
  const std::size_t n = a.count();
  if (inject_point > n) {
    throw ContractError("inject point " + std::to_string(inject_point) +
                        " outside [0, " + std::to_string(n) + "]");
  }
  if (inject_point == n) return a;
  if (inject_point == 0) return b;
  const std::size_t axis = a.styles.rank() - 2;
  return {concat({slice(a.styles, axis, 0, inject_point),
                  slice(b.styles, axis, inject_point, n)},
                 axis)};
}

LayerStyles mix_layers(const LayerStyles& a, const LayerStyles& b,
                       std::size_t layer, std::size_t layer_count) {
  const auto valid = [&](const LayerStyles& s) {
    return s.size() == 1 || s.size() == layer_count;
  };
  if (!valid(a) || !valid(b)) {
    throw ContractError("style lists must hold 1 or " +
                        std::to_string(layer_count) + " sets");
  }
  if (layer > layer_count) {
    throw ContractError("mixing layer " + std::to_string(layer) +
                        " outside [0, " + std::to_string(layer_count) + "]");
  }
  LayerStyles out;
  for (std::size_t i = 0; i < layer_count; ++i) {
    const LayerStyles& src = i < layer ? a : b;
    out.push_back(src.size() == 1 ? src.front() : src[i]);
  }
  return out;
}

}  // namespace tokengan

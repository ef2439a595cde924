#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "tokengan/tensor.hpp"

namespace tokengan {

struct Range {
  double lo = 0.0;
  double hi = 0.0;
  bool operator==(const Range&) const = default;
};

// Procedural images: one ellipse or rectangle on a vertical-gradient
// background. Colors come from a cosine palette
//   pal(h)_k = 0.85 * cos(2 pi (h - k/3)),
// the background is pal(h_bg) * (1 - 0.5 v) with v the normalized row.
// Coordinates and sizes are fractions of the image edge.
struct ToyDatasetSpec {
  std::size_t image_size = 32;
  Range shape_hue{0.45, 0.65};
  Range background_hue{-0.1, 0.1};
  Range position{0.32, 0.68};  // shape center, both axes
  Range scale{0.12, 0.25};     // shape radius r
  Range aspect{0.8, 1.25};     // half-extents r*sqrt(a), r/sqrt(a)
  std::uint64_t seed = 1;

  void validate() const;
  bool operator==(const ToyDatasetSpec&) const = default;
};

// Pure function of (spec, index): [3 x S x S] in [-1, 1].
Tensor make_toy_image(const ToyDatasetSpec& spec, std::uint64_t index);
// [B x 3 x S x S]
Tensor make_toy_batch(const ToyDatasetSpec& spec,
                      const std::vector<std::uint64_t>& indices);

struct ChannelStats {
  std::array<double, 3> mean{};
  std::array<double, 3> stddev{};
};

// Population statistics implied by the uniform factor ranges, in the
// continuous-image limit.
ChannelStats analytic_channel_stats(const ToyDatasetSpec& spec);
// Per-channel mean and std pooled over every pixel of a [B x 3 x H x W]
// batch.
ChannelStats empirical_channel_stats(const Tensor& batch);

}  // namespace tokengan

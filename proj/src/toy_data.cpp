#include "tokengan/toy_data.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "tokengan/errors.hpp"

namespace tokengan {

namespace {

constexpr double kAmplitude = 0.85;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double palette(double hue, int channel) {
  return kAmplitude * std::cos(kTwoPi * (hue - channel / 3.0));
}

double draw(std::mt19937_64& engine, const Range& r) {
  if (r.lo == r.hi) return r.lo;
  return std::uniform_real_distribution<double>(r.lo, r.hi)(engine);
}

// E[cos(f * 2 pi (h - k/3))] for h uniform on the range.
double mean_cos(const Range& h, int channel, double f) {
  const double phase = f * kTwoPi * channel / 3.0;
  if (h.lo == h.hi) return std::cos(f * kTwoPi * h.lo - phase);
  return (std::sin(f * kTwoPi * h.hi - phase) -
          std::sin(f * kTwoPi * h.lo - phase)) /
         (f * kTwoPi * (h.hi - h.lo));
}

double mean_palette(const Range& h, int k) {
  return kAmplitude * mean_cos(h, k, 1.0);
}

double mean_palette_sq(const Range& h, int k) {
  return kAmplitude * kAmplitude * 0.5 * (1.0 + mean_cos(h, k, 2.0));
}

// E[x^p] for x uniform on the range.
double uniform_moment(const Range& r, int p) {
  if (r.lo == r.hi) return std::pow(r.lo, p);
  return (std::pow(r.hi, p + 1) - std::pow(r.lo, p + 1)) /
         ((p + 1) * (r.hi - r.lo));
}

}  // namespace

void ToyDatasetSpec::validate() const {
  if (image_size == 0) throw ConfigError("toy image size must be positive");
  for (const Range* r : {&shape_hue, &background_hue, &position, &scale, &aspect}) {
    if (!(r->lo <= r->hi)) throw ConfigError("toy factor range with lo > hi");
  }
  if (!(scale.lo > 0.0) || !(aspect.lo > 0.0)) {
    throw ConfigError("toy scale and aspect must be positive");
  }
  const double reach = std::max(scale.hi * std::sqrt(aspect.hi),
                                scale.hi / std::sqrt(aspect.lo));
  if (position.lo - reach < 0.0 || position.hi + reach > 1.0) {
    throw ConfigError("toy shapes can leave the image");
  }
}

Tensor make_toy_image(const ToyDatasetSpec& spec, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(spec.seed),
                    static_cast<std::uint32_t>(spec.seed >> 32),
                    static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  std::mt19937_64 engine(seq);
  const bool ellipse = std::bernoulli_distribution(0.5)(engine);
  const double h_bg = draw(engine, spec.background_hue);
  const double h_shape = draw(engine, spec.shape_hue);
  const double cx = draw(engine, spec.position);
  const double cy = draw(engine, spec.position);
  const double r = draw(engine, spec.scale);
  const double a = std::sqrt(draw(engine, spec.aspect));
  const double rx = r * a;
  const double ry = r / a;

  const std::size_t s = spec.image_size;
  std::vector<double> pixels(3 * s * s);
  for (std::size_t y = 0; y < s; ++y) {
    const double v = (static_cast<double>(y) + 0.5) / static_cast<double>(s);
    for (std::size_t x = 0; x < s; ++x) {
      const double u = (static_cast<double>(x) + 0.5) / static_cast<double>(s);
      const double dx = (u - cx) / rx;
      const double dy = (v - cy) / ry;
      const bool inside = ellipse ? dx * dx + dy * dy <= 1.0
                                  : std::abs(dx) <= 1.0 && std::abs(dy) <= 1.0;
      for (int k = 0; k < 3; ++k) {
        pixels[(k * s + y) * s + x] =
            inside ? palette(h_shape, k) : palette(h_bg, k) * (1.0 - 0.5 * v);
      }
    }
  }
  return Tensor::from({3, s, s}, std::move(pixels));
}

Tensor make_toy_batch(const ToyDatasetSpec& spec,
                      const std::vector<std::uint64_t>& indices) {
  const std::size_t s = spec.image_size;
  const std::size_t per = 3 * s * s;
  std::vector<double> values(indices.size() * per);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const auto image = make_toy_image(spec, indices[i]);
    std::copy(image.data().begin(), image.data().end(),
              values.begin() + static_cast<std::ptrdiff_t>(i * per));
  }
  return Tensor::from({indices.size(), 3, s, s}, std::move(values));
}

ChannelStats analytic_channel_stats(const ToyDatasetSpec& spec) {
  const double pi = std::numbers::pi;
  // Shape area: pi r^2 (ellipse) or 4 r^2 (rectangle), equally likely.
  const double r2 = uniform_moment(spec.scale, 2);
  const double r4 = uniform_moment(spec.scale, 4);
  const double area = 0.5 * (pi + 4.0) * r2;
  const double inv_aspect =
      spec.aspect.lo == spec.aspect.hi
          ? 1.0 / spec.aspect.lo
          : std::log(spec.aspect.hi / spec.aspect.lo) /
                (spec.aspect.hi - spec.aspect.lo);
  // E[area * vertical variance inside the shape]; r_y^2 = r^2 / aspect.
  const double area_var = 0.5 * (pi / 4.0 + 4.0 / 3.0) * r4 * inv_aspect;
  const double c1 = uniform_moment(spec.position, 1);
  const double c2 = uniform_moment(spec.position, 2);

  // Background shading w(v) = 1 - v/2 integrated over the uncovered part.
  const double bg_lin = 0.75 - area * (1.0 - 0.5 * c1);
  const double bg_sq =
      7.0 / 12.0 - (area * (1.0 - c1 + 0.25 * c2) + 0.25 * area_var);

  ChannelStats stats;
  for (int k = 0; k < 3; ++k) {
    const double m = area * mean_palette(spec.shape_hue, k) +
                     bg_lin * mean_palette(spec.background_hue, k);
    const double sq = area * mean_palette_sq(spec.shape_hue, k) +
                      bg_sq * mean_palette_sq(spec.background_hue, k);
    stats.mean[k] = m;
    stats.stddev[k] = std::sqrt(std::max(0.0, sq - m * m));
  }
  return stats;
}

ChannelStats empirical_channel_stats(const Tensor& batch) {
  if (batch.rank() != 4 || batch.dim(1) != 3) {
    throw DimensionError("channel statistics need [B x 3 x H x W], got " +
                         shape_str(batch.shape()));
  }
  const std::size_t b = batch.dim(0);
  const std::size_t plane = batch.dim(2) * batch.dim(3);
  const auto x = batch.data();
  ChannelStats stats;
  for (std::size_t k = 0; k < 3; ++k) {
    double s = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < b; ++i) {
      const double* p = x.data() + (i * 3 + k) * plane;
      for (std::size_t j = 0; j < plane; ++j) {
        s += p[j];
        sq += p[j] * p[j];
      }
    }
    const double n = static_cast<double>(b * plane);
    stats.mean[k] = s / n;
    stats.stddev[k] = std::sqrt(std::max(0.0, sq / n - stats.mean[k] * stats.mean[k]));
  }
  return stats;
}

}  // namespace tokengan

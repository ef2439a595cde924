#pragma once

#include <cstddef>
#include <vector>

#include "tokengan/nn.hpp"

namespace tokengan {

// Anything that scores images and exposes its input gradient as a graph
// that stays differentiable with respect to the critic's own parameters.
class Critic {
 public:
  virtual ~Critic() = default;
  // x [B x c x H x W] -> [B]; x [c x H x W] -> scalar.
  virtual Tensor score(const Tensor& x) const = 0;
  // d score_b / d x_b for every image, same shape as x.
  virtual Tensor input_gradient(const Tensor& x) const = 0;
};

struct DiscConfig {
  std::size_t resolution = 32;
  std::size_t image_channels = 3;
  // Feature channels per level, from the input resolution down to 4x4.
  std::vector<std::size_t> channels{8, 16, 16, 32};
  double slope = 0.2;

  void validate() const;
  bool operator==(const DiscConfig&) const = default;
  std::size_t levels() const { return channels.size(); }
};

struct ConvLayer {
  Tensor weight;  // [out x in x k x k]
  Tensor bias;    // [out]
  double gain = 1.0;

  static ConvLayer init(std::size_t out, std::size_t in, std::size_t kernel,
                        Rng& rng);
  Tensor effective_weight() const;
  Tensor forward(const Tensor& x) const;
  void append_params(const std::string& prefix, ParamList& out) const;
};

struct DiscParams {
  ConvLayer from_rgb;            // 1x1
  std::vector<ConvLayer> convs;  // 3x3, one per level
  DenseLayer dense;              // flattened 4x4 features -> 1
};

// fromRGB 1x1 conv, then per level {3x3 conv, leaky-ReLU, 2x average
// pool} until 4x4, then a dense layer to one score per image.
class Discriminator : public Critic {
 public:
  Discriminator(DiscConfig config, Rng& rng);
  Discriminator(DiscConfig config, DiscParams params);

  const DiscConfig& config() const { return config_; }
  const DiscParams& params() const { return params_; }

  Tensor score(const Tensor& x) const override;
  // Backpropagates by hand through a graph of differentiable ops, so the
  // result can itself be differentiated with respect to the parameters.
  Tensor input_gradient(const Tensor& x) const override;

  ParamList parameters() const;
  Discriminator clone(bool trainable) const;

 private:
  Tensor batched(const Tensor& x) const;
  std::size_t out_channels(std::size_t level) const;

  DiscConfig config_;
  DiscParams params_;
};

// score(x) = <w, x> per image.
class LinearCritic : public Critic {
 public:
  explicit LinearCritic(Tensor weight) : weight_(std::move(weight)) {}
  Tensor score(const Tensor& x) const override;
  Tensor input_gradient(const Tensor& x) const override;

 private:
  Tensor weight_;  // [c x H x W]
};

class ConstantCritic : public Critic {
 public:
  explicit ConstantCritic(double value) : value_(value) {}
  Tensor score(const Tensor& x) const override;
  Tensor input_gradient(const Tensor& x) const override;

 private:
  double value_;
};

}  // namespace tokengan

#include "tokengan/discriminator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tokengan/errors.hpp"
#include "tokengan/ops.hpp"

namespace tokengan {

void DiscConfig::validate() const {
  if (resolution < 4 || (resolution & (resolution - 1)) != 0) {
    throw ConfigError("discriminator resolution must be a power of two >= 4");
  }
  std::size_t expected = 1;
  for (std::size_t r = resolution; r > 4; r /= 2) ++expected;
  if (channels.size() != expected) {
    throw ConfigError("discriminator needs " + std::to_string(expected) +
                      " channel entries for resolution " +
                      std::to_string(resolution));
  }
  for (auto c : channels) {
    if (c == 0) throw ConfigError("discriminator channels must be positive");
  }
  if (image_channels == 0) throw ConfigError("image channels must be positive");
}

ConvLayer ConvLayer::init(std::size_t out, std::size_t in, std::size_t kernel,
                          Rng& rng) {
  return ConvLayer{
      rng.normal_tensor({out, in, kernel, kernel}, 1.0, true),
      Tensor::zeros({out}).clone_leaf(true),
      1.0 / std::sqrt(static_cast<double>(in * kernel * kernel))};
}

Tensor ConvLayer::effective_weight() const { return scale(weight, gain); }

Tensor ConvLayer::forward(const Tensor& x) const {
  return conv2d(x, effective_weight(), bias);
}

void ConvLayer::append_params(const std::string& prefix,
                              ParamList& out) const {
  out.push_back({prefix + ".w", weight});
  out.push_back({prefix + ".b", bias});
}

std::size_t Discriminator::out_channels(std::size_t level) const {
  return config_.channels[std::min(level + 1, config_.levels() - 1)];
}

Discriminator::Discriminator(DiscConfig config, Rng& rng)
    : config_(std::move(config)) {
  config_.validate();
  params_.from_rgb =
      ConvLayer::init(config_.channels[0], config_.image_channels, 1, rng);
  for (std::size_t i = 0; i < config_.levels(); ++i) {
    params_.convs.push_back(
        ConvLayer::init(out_channels(i), config_.channels[i], 3, rng));
  }
  params_.dense = DenseLayer::init(1, config_.channels.back() * 16, rng);
}

Discriminator::Discriminator(DiscConfig config, DiscParams params)
    : config_(std::move(config)), params_(std::move(params)) {
  config_.validate();
  const auto bad = [](const std::string& what, const Tensor& t) {
    throw DimensionError("discriminator " + what + " has shape " +
                         shape_str(t.shape()));
  };
  if (params_.from_rgb.weight.shape() !=
      Shape{config_.channels[0], config_.image_channels, 1, 1}) {
    bad("fromRGB", params_.from_rgb.weight);
  }
  if (params_.convs.size() != config_.levels()) {
    throw ConfigError("discriminator conv count does not match its levels");
  }
  for (std::size_t i = 0; i < config_.levels(); ++i) {
    if (params_.convs[i].weight.shape() !=
        Shape{out_channels(i), config_.channels[i], 3, 3}) {
      bad("conv " + std::to_string(i), params_.convs[i].weight);
    }
  }
  if (params_.dense.weight.shape() != Shape{1, config_.channels.back() * 16}) {
    bad("dense", params_.dense.weight);
  }
}

Tensor Discriminator::batched(const Tensor& x) const {
  const Shape single{config_.image_channels, config_.resolution,
                     config_.resolution};
  if (x.rank() == 3 && x.shape() == single) {
    return reshape(x, {1, single[0], single[1], single[2]});
  }
  if (x.rank() == 4 && Shape(x.shape().begin() + 1, x.shape().end()) == single) {
    return x;
  }
  throw DimensionError("discriminator expects images " + shape_str(single) +
                       ", got " + shape_str(x.shape()));
}

Tensor Discriminator::score(const Tensor& x) const {
  Tensor h = leaky_relu(params_.from_rgb.forward(batched(x)), config_.slope);
  for (std::size_t i = 0; i < config_.levels(); ++i) {
    h = leaky_relu(params_.convs[i].forward(h), config_.slope);
    if (i + 1 < config_.levels()) h = avg_pool2x(h);
  }
  const std::size_t b = h.dim(0);
  Tensor s = params_.dense.forward(reshape(h, {b, h.numel() / b}));
  return x.rank() == 3 ? reshape(s, {}) : reshape(s, {b});
}

Tensor Discriminator::input_gradient(const Tensor& x) const {
  const Tensor xb = batched(x);
  const std::size_t b = xb.dim(0);
  const double slope = config_.slope;

  // Activation slopes along the forward pass; piecewise constant in x.
  std::vector<Tensor> masks;
  {
    NoGradGuard no_grad;
    Tensor pre = params_.from_rgb.forward(xb);
    masks.push_back(leaky_relu_slope_mask(pre, slope));
    Tensor h = leaky_relu(pre, slope);
    for (std::size_t i = 0; i < config_.levels(); ++i) {
      pre = params_.convs[i].forward(h);
      masks.push_back(leaky_relu_slope_mask(pre, slope));
      h = leaky_relu(pre, slope);
      if (i + 1 < config_.levels()) h = avg_pool2x(h);
    }
  }

  Tensor g = matmul(Tensor::full({b, 1}, 1.0), params_.dense.effective_weight());
  g = reshape(g, {b, config_.channels.back(), 4, 4});
  for (std::size_t i = config_.levels(); i-- > 0;) {
    if (i + 1 < config_.levels()) {
      g = scale(upsample2x(g, Resample::kNearest), 0.25);
    }
    g = mul(g, masks[i + 1]);
    g = conv2d(g, conv_adjoint_weight(params_.convs[i].effective_weight()),
               Tensor());
  }
  g = mul(g, masks[0]);
  g = conv2d(g, conv_adjoint_weight(params_.from_rgb.effective_weight()),
             Tensor());
  return x.rank() == 3 ? reshape(g, x.shape()) : g;
}

ParamList Discriminator::parameters() const {
  ParamList out;
  params_.from_rgb.append_params("disc.fromrgb", out);
  for (std::size_t i = 0; i < params_.convs.size(); ++i) {
    const std::size_t res = config_.resolution >> i;
    params_.convs[i].append_params("disc." + std::to_string(res) + ".conv",
                                   out);
  }
  params_.dense.append_params("disc.dense", out);
  return out;
}

Discriminator Discriminator::clone(bool trainable) const {
  Rng scratch(0);
  Discriminator copy(config_, scratch);
  const ParamList params = copy.parameters();
  assign_params(params, parameters());
  set_trainable(params, trainable);
  return copy;
}

Tensor LinearCritic::score(const Tensor& x) const {
  if (x.rank() == weight_.rank()) return sum(mul(x, weight_));
  if (x.rank() != weight_.rank() + 1) {
    throw DimensionError("linear critic weight " + shape_str(weight_.shape()) +
                         " vs images " + shape_str(x.shape()));
  }
  const std::size_t b = x.dim(0);
  return sum_last(reshape(mul(x, weight_), {b, weight_.numel()}));
}

Tensor LinearCritic::input_gradient(const Tensor& x) const {
  if (x.rank() == weight_.rank()) return weight_;
  return repeat_batch(weight_, x.dim(0));
}

Tensor ConstantCritic::score(const Tensor& x) const {
  if (x.rank() == 3) return Tensor::scalar(value_);
  return Tensor::full({x.dim(0)}, value_);
}

Tensor ConstantCritic::input_gradient(const Tensor& x) const {
  return Tensor::zeros(x.shape());
}

}  // namespace tokengan

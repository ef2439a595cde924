#include "tokengan/trainer.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include "tokengan/errors.hpp"
#include "tokengan/losses.hpp"
#include "tokengan/mixing.hpp"
#include "tokengan/ops.hpp"

namespace tokengan {

void TrainConfig::validate() const {
  if (batch_size == 0) throw ConfigError("batch size must be positive");
  if (!(lr_g > 0.0) || !(lr_d > 0.0)) throw ConfigError("learning rates must be positive");
  if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0) {
    throw ConfigError("Adam betas must lie in [0, 1)");
  }
  if (r1_gamma < 0.0) throw ConfigError("r1 gamma must be nonnegative");
  if (r1_interval == 0) throw ConfigError("r1 interval must be at least 1");
  if (!(mixing_prob >= 0.0 && mixing_prob <= 1.0) ||
      !(layer_mixing_prob >= 0.0 && layer_mixing_prob <= 1.0)) {
    throw ConfigError("mixing probabilities must lie in [0, 1]");
  }
}

namespace {

void require_finite(double value, const char* name, std::size_t step) {
  if (!std::isfinite(value)) {
    throw NumericError("non-finite " + std::string(name) + " at step " +
                       std::to_string(step));
  }
}

}  // namespace

Trainer::Trainer(const GeneratorConfig& gen, const DiscConfig& disc,
                 TrainConfig train, ToyDatasetSpec data)
    : train_((train.validate(), train)),
      data_((data.validate(), data)),
      rng_(train_.seed),
      gen_(gen, rng_),
      disc_(disc, rng_) {
  init_optimizers();
}

Trainer::Trainer(Generator gen, Discriminator disc, TrainConfig train,
                 ToyDatasetSpec data, std::size_t start_step)
    : train_((train.validate(), train)),
      data_((data.validate(), data)),
      rng_(train_.seed ^ (0x9E3779B97F4A7C15ULL * (start_step + 1))),
      gen_(std::move(gen)),
      disc_(std::move(disc)),
      step_(start_step) {
  init_optimizers();
}

void Trainer::init_optimizers() {
  const auto& s = gen_.config().synthesis;
  if (disc_.config().resolution != s.output_resolution() ||
      disc_.config().image_channels != s.image_channels ||
      data_.image_size != s.output_resolution() || s.image_channels != 3) {
    throw ConfigError("generator, discriminator and toy data disagree on image shape");
  }
  gen_params_ = gen_.parameters();
  disc_params_ = disc_.parameters();
  opt_g_ = std::make_unique<Adam>(
      tensors_of(gen_params_),
      AdamConfig{train_.lr_g, train_.beta1, train_.beta2, 1e-8});
  opt_d_ = std::make_unique<Adam>(
      tensors_of(disc_params_),
      AdamConfig{train_.lr_d, train_.beta1, train_.beta2, 1e-8});
}

Tensor Trainer::real_batch(std::size_t step) const {
  std::vector<std::uint64_t> indices(train_.batch_size);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    indices[i] = static_cast<std::uint64_t>(step) * train_.batch_size + i;
  }
  return make_toy_batch(data_, indices);
}

LayerStyles Trainer::sample_styles() {
  const std::size_t b = train_.batch_size;
  const std::size_t d = gen_.latent_width();
  LayerStyles styles = gen_.map(sample_latents(rng_, b, d));
  if (!rng_.bernoulli(train_.mixing_prob)) return styles;

  const LayerStyles other = gen_.map(sample_latents(rng_, b, d));
  const std::size_t layers = gen_.config().synthesis.layer_count();
  const std::size_t n = gen_.config().synthesis.style_tokens;
  if (rng_.bernoulli(train_.layer_mixing_prob)) {
    if (layers < 2) return styles;
    return mix_layers(styles, other, rng_.integer(1, layers - 1), layers);
  }
  if (n < 2) return styles;
  const std::size_t t = rng_.integer(1, n - 1);
  LayerStyles mixed;
  for (std::size_t i = 0; i < styles.size(); ++i) {
    mixed.push_back(mix_styles(styles[i], other[i], t));
  }
  return mixed;
}

StepMetrics Trainer::train_step() { return train_step(real_batch(step_)); }

StepMetrics Trainer::train_step(const Tensor& real) {
  const auto start = std::chrono::steady_clock::now();
  StepMetrics metrics;
  metrics.step = step_;
  discriminator_phase(real, metrics);
  generator_phase(metrics);
  ++step_;
  metrics.wall_ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - start)
                        .count();
  return metrics;
}

void Trainer::discriminator_phase(const Tensor& real, StepMetrics& metrics) {
  zero_grads(disc_params_);
  Tensor fake;
  {
    NoGradGuard no_grad;
    fake = gen_.synthesize(sample_styles()).image;
  }
  Tensor loss_d = discriminator_loss(disc_.score(real), disc_.score(fake));
  metrics.loss_d = loss_d.item();
  require_finite(metrics.loss_d, "loss_d", step_);
  metrics.r1 = 0.0;
  if (step_ % train_.r1_interval == 0) {
    const Tensor r1 = r1_penalty(real, disc_, train_.r1_gamma);
    metrics.r1 = r1.item();
    require_finite(metrics.r1, "r1", step_);
    loss_d = add(loss_d, scale(r1, static_cast<double>(train_.r1_interval)));
  }
  loss_d.backward();
  metrics.grad_norm_d = grad_norm(disc_params_);
  require_finite(metrics.grad_norm_d, "discriminator gradient", step_);
  opt_d_->step();
}

void Trainer::generator_phase(StepMetrics& metrics) {
  // The discriminator is frozen so the backward pass leaves it untouched.
  zero_grads(gen_params_);
  set_trainable(disc_params_, false);
  try {
    const Tensor images = gen_.synthesize(sample_styles()).image;
    const Tensor loss_g = generator_loss(disc_.score(images));
    metrics.loss_g = loss_g.item();
    require_finite(metrics.loss_g, "loss_g", step_);
    loss_g.backward();
  } catch (...) {
    set_trainable(disc_params_, true);
    throw;
  }
  set_trainable(disc_params_, true);
  metrics.grad_norm_g = grad_norm(gen_params_);
  require_finite(metrics.grad_norm_g, "generator gradient", step_);
  opt_g_->step();
}

}  // namespace tokengan

#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>

#include "tokengan/adam.hpp"
#include "tokengan/discriminator.hpp"
#include "tokengan/generator.hpp"
#include "tokengan/toy_data.hpp"

namespace tokengan {

struct TrainConfig {
  std::size_t batch_size = 32;
  double lr_g = 2e-3;
  double lr_d = 2e-3;
  double beta1 = 0.0;
  double beta2 = 0.99;
  double r1_gamma = 1.0;
  std::size_t r1_interval = 16;
  double mixing_prob = 0.9;
  // Share of mixing events that splice along layers instead of tokens.
  double layer_mixing_prob = 0.5;
  std::size_t total_steps = 2000;
  std::size_t checkpoint_every = 500;  // 0 disables periodic checkpoints
  std::uint64_t seed = 1;

  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

struct StepMetrics {
  std::size_t step = 0;
  double loss_g = 0.0;
  double loss_d = 0.0;
  double r1 = 0.0;  // unscaled penalty; 0 off the regularization cadence
  double grad_norm_g = 0.0;
  double grad_norm_d = 0.0;
  double wall_ms = 0.0;
};

// Alternating D/G updates with lazy R1 and style mixing. Real batch for
// step s holds toy images s*B .. s*B + B-1.
class Trainer {
 public:
  Trainer(const GeneratorConfig& gen, const DiscConfig& disc,
          TrainConfig train, ToyDatasetSpec data);
  // Continues from existing networks (optimizer moments start at zero).
  Trainer(Generator gen, Discriminator disc, TrainConfig train,
          ToyDatasetSpec data, std::size_t start_step);

  // One discriminator phase then one generator phase, then the step
  // counter advances.
  StepMetrics train_step();
  StepMetrics train_step(const Tensor& real_batch);

  // The two halves of a step, exposed for inspection. Each updates only its
  // own network and fills its fields of `metrics`.
  void discriminator_phase(const Tensor& real_batch, StepMetrics& metrics);
  void generator_phase(StepMetrics& metrics);

  const Generator& generator() const { return gen_; }
  const Discriminator& discriminator() const { return disc_; }
  const TrainConfig& config() const { return train_; }
  const ToyDatasetSpec& data() const { return data_; }
  std::size_t step() const { return step_; }

  Tensor real_batch(std::size_t step) const;

 private:
  void init_optimizers();
  // Mapped (and possibly mixed) styles for a fresh batch of latents.
  LayerStyles sample_styles();

  TrainConfig train_;
  ToyDatasetSpec data_;
  Rng rng_;  // initializes both networks, then drives latents and mixing
  Generator gen_;
  Discriminator disc_;
  ParamList gen_params_;
  ParamList disc_params_;
  std::unique_ptr<Adam> opt_g_;
  std::unique_ptr<Adam> opt_d_;
  std::size_t step_ = 0;
};

}  // namespace tokengan

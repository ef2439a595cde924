#include "tokengan/losses.hpp"

#include "tokengan/errors.hpp"
#include "tokengan/ops.hpp"

namespace tokengan {

Tensor generator_loss(const Tensor& fake_scores) {
  return mean(softplus(neg(fake_scores)));
}

Tensor discriminator_loss(const Tensor& real_scores,
                          const Tensor& fake_scores) {
  return add(mean(softplus(neg(real_scores))), mean(softplus(fake_scores)));
}

Tensor r1_penalty(const Tensor& real_batch, const Critic& critic,
                  double gamma) {
  if (real_batch.rank() != 4) {
    throw DimensionError("r1 penalty expects a batch [B x c x H x W], got " +
                         shape_str(real_batch.shape()));
  }
  const Tensor g = critic.input_gradient(real_batch);
  const double b = static_cast<double>(real_batch.dim(0));
  return scale(sum(square(g)), 0.5 * gamma / b);
}

}  // namespace tokengan

#pragma once

#include "tokengan/discriminator.hpp"
#include "tokengan/tensor.hpp"

namespace tokengan {

// mean softplus(-D(G(z)))
Tensor generator_loss(const Tensor& fake_scores);
// mean softplus(-D(x)) + mean softplus(D(G(z)))
Tensor discriminator_loss(const Tensor& real_scores, const Tensor& fake_scores);
// gamma/2 * mean over the batch of |grad_x D(x)|^2. Differentiable with
// respect to the critic parameters; the caller applies the lazy-interval
// scale.
Tensor r1_penalty(const Tensor& real_batch, const Critic& critic, double gamma);

}  // namespace tokengan

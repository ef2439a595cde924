#include "tokengan/random.hpp"

#include <vector>

namespace tokengan {

Tensor Rng::normal_tensor(Shape shape, double stddev, bool requires_grad) {
  std::vector<double> v(shape_numel(shape));
  for (double& x : v) x = stddev * normal();
  return Tensor::from(std::move(shape), std::move(v), requires_grad);
}

Tensor Rng::uniform_tensor(Shape shape, double lo, double hi,
                           bool requires_grad) {
  std::vector<double> v(shape_numel(shape));
  for (double& x : v) x = uniform(lo, hi);
  return Tensor::from(std::move(shape), std::move(v), requires_grad);
}

}  // namespace tokengan

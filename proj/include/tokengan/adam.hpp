#pragma once

#include <cstddef>
#include <vector>

#include "tokengan/tensor.hpp"

namespace tokengan {

struct AdamConfig {
  double lr = 2e-3;
  double beta1 = 0.0;
  double beta2 = 0.99;
  double eps = 1e-8;
};

// Bias-corrected Adam. Parameters without an accumulated gradient are
// left untouched on that step.
class Adam {
 public:
  Adam(std::vector<Tensor> params, AdamConfig config);

  void step();
  std::size_t steps() const { return t_; }
  const AdamConfig& config() const { return config_; }

 private:
  std::vector<Tensor> params_;
  AdamConfig config_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  std::size_t t_ = 0;
};

}  // namespace tokengan

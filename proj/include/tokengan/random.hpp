#pragma once

#include <cstdint>
#include <random>

#include "tokengan/tensor.hpp"

namespace tokengan {

// Seeded source for every stochastic choice in the project.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double normal() { return normal_(engine_); }
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  // Uniform integer in [lo, hi].
  std::size_t integer(std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(engine_);
  }
  bool bernoulli(double p) { return uniform(0.0, 1.0) < p; }
  std::uint64_t next_seed() { return engine_(); }

  Tensor normal_tensor(Shape shape, double stddev = 1.0,
                       bool requires_grad = false);
  Tensor uniform_tensor(Shape shape, double lo, double hi,
                        bool requires_grad = false);

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

}  // namespace tokengan

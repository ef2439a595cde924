#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tokengan/tensor.hpp"

namespace tokengan {

struct GradCheckOptions {
  double step = 1e-5;
  double tolerance = 1e-4;
  // Below this norm both gradients count as zero and are compared absolutely.
  double zero_floor = 1e-8;
  std::uint64_t seed = 7;
  // When false the inputs are perturbed in place, so f may reach them
  // through objects that share their storage (network parameters).
  bool clone_inputs = true;
};

struct GradCheckResult {
  std::string name;
  std::size_t checked_elements = 0;
  double max_relative_error = 0.0;
  bool passed = false;
};

using GradCheckFn = std::function<Tensor(const std::vector<Tensor>&)>;

// Compares reverse-mode gradients of sum(w * f(inputs)), w fixed random
// weights, against central differences over every element of every input.
// The error per input is |g_auto - g_fd| / max(|g_auto|, |g_fd|) (vector
// 2-norms); the reported error is the maximum over inputs.
GradCheckResult gradcheck(const std::string& name, const GradCheckFn& f,
                          std::vector<Tensor> inputs,
                          const GradCheckOptions& options = {});

struct OpCase {
  std::string name;
  std::function<GradCheckResult(std::size_t max_dim, std::uint64_t seed,
                                const GradCheckOptions&)>
      run;
};

// One randomized case per differentiable primitive in ops.hpp, with every
// dimension drawn from [1, max_dim] (or [2, max_dim] where the op needs it).
const std::vector<OpCase>& primitive_op_cases();

struct GeneratorConfig;

// Smallest composed generator the checks use: 4x4 then 8x8 output, d = 8,
// n = 4, at most 16 content tokens per layer.
GeneratorConfig tiny_generator_config();

// Checks d image / d (latent, every generator parameter) on a freshly
// initialized generator.
GradCheckResult generator_gradcheck(const GeneratorConfig& config,
                                    std::uint64_t seed,
                                    const GradCheckOptions& options = {});

}  // namespace tokengan

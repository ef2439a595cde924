#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "tokengan/random.hpp"
#include "tokengan/tensor.hpp"

namespace tokengan {

// A learnable tensor with its checkpoint name.
struct NamedParam {
  std::string name;
  Tensor tensor;
};

using ParamList = std::vector<NamedParam>;

void zero_grads(const ParamList& params);
void set_trainable(const ParamList& params, bool trainable);
// L2 norm over every accumulated gradient (0 for params without one).
double grad_norm(const ParamList& params);
std::vector<Tensor> tensors_of(const ParamList& params);
// Copies values from `src` into the same-named tensors of `dst`. Both lists
// must hold exactly the same names and shapes.
void assign_params(const ParamList& dst, const ParamList& src);

// Fully connected layer with equalized learning rate: the stored weight is
// N(0, 1) and is scaled by gain = 1/sqrt(fan_in) on every use.
struct DenseLayer {
  Tensor weight;  // [out x in]
  Tensor bias;    // [out]
  double gain = 1.0;

  static DenseLayer init(std::size_t out, std::size_t in, Rng& rng);

  std::size_t in_features() const { return weight.dim(1); }
  std::size_t out_features() const { return weight.dim(0); }
  Tensor effective_weight() const;
  // x[..., in] -> [..., out]
  Tensor forward(const Tensor& x) const;
  void append_params(const std::string& prefix, ParamList& out) const;
};

}  // namespace tokengan

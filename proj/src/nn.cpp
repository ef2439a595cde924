#include "tokengan/nn.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "tokengan/errors.hpp"
#include "tokengan/ops.hpp"

namespace tokengan {

void zero_grads(const ParamList& params) {
  for (const auto& p : params) {
    Tensor t = p.tensor;
    t.zero_grad();
  }
}

void set_trainable(const ParamList& params, bool trainable) {
  for (const auto& p : params) {
    Tensor t = p.tensor;
    t.set_requires_grad(trainable);
  }
}

double grad_norm(const ParamList& params) {
  double total = 0.0;
  for (const auto& p : params) {
    if (!p.tensor.has_grad()) continue;
    for (double g : p.tensor.grad()) total += g * g;
  }
  return std::sqrt(total);
}

std::vector<Tensor> tensors_of(const ParamList& params) {
  std::vector<Tensor> out;
  out.reserve(params.size());
  for (const auto& p : params) out.push_back(p.tensor);
  return out;
}

void assign_params(const ParamList& dst, const ParamList& src) {
  std::unordered_map<std::string, const Tensor*> by_name;
  for (const auto& p : src) {
    if (!by_name.emplace(p.name, &p.tensor).second) {
      throw ContractError("duplicate parameter " + p.name);
    }
  }
  if (by_name.size() != dst.size()) {
    throw ContractError("expected " + std::to_string(dst.size()) +
                        " parameters, got " + std::to_string(by_name.size()));
  }
  for (const auto& p : dst) {
    const auto it = by_name.find(p.name);
    if (it == by_name.end()) throw ContractError("missing parameter " + p.name);
    const Tensor& from = *it->second;
    if (from.shape() != p.tensor.shape()) {
      throw DimensionError("parameter " + p.name + " is " +
                           shape_str(from.shape()) + ", expected " +
                           shape_str(p.tensor.shape()));
    }
    Tensor to = p.tensor;
    std::ranges::copy(from.data(), to.mutable_data().begin());
  }
}

DenseLayer DenseLayer::init(std::size_t out, std::size_t in, Rng& rng) {
  if (out == 0 || in == 0) throw DimensionError("dense layer needs nonzero sizes");
  return DenseLayer{rng.normal_tensor({out, in}, 1.0, true),
                    Tensor::zeros({out}).clone_leaf(true),
                    1.0 / std::sqrt(static_cast<double>(in))};
}

Tensor DenseLayer::effective_weight() const {
  return gain == 1.0 ? weight : scale(weight, gain);
}

Tensor DenseLayer::forward(const Tensor& x) const {
  if (x.shape().empty() || x.shape().back() != in_features()) {
    throw DimensionError("dense input " + shape_str(x.shape()) +
                         " vs weight " + shape_str(weight.shape()));
  }
  return add(matmul_nt(x, effective_weight()), bias);
}

void DenseLayer::append_params(const std::string& prefix,
                               ParamList& out) const {
  out.push_back({prefix + ".w", weight});
  out.push_back({prefix + ".b", bias});
}

}  // namespace tokengan

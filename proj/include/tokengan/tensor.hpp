#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace tokengan {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

namespace detail {

struct Node;
using NodePtr = std::shared_ptr<Node>;
using BackwardFn = std::function<void(Node& self)>;

// One vertex of the autograd graph. Forward values live in `data`, which
// may be shared between a tensor and its reshaped views.
struct Node {
  Shape shape;
  std::shared_ptr<std::vector<double>> data;
  std::vector<double> grad;  // empty until first accumulation
  bool requires_grad = false;
  std::vector<NodePtr> inputs;
  BackwardFn backward;

  bool is_leaf() const { return inputs.empty(); }
  std::span<double> grad_buffer();  // allocates zeros on first use
};

}  // namespace detail

// Dense row-major array of doubles with optional participation in
// reverse-mode differentiation.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<double> values,
                     bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t numel() const;

  std::span<const double> data() const;
  // Direct write access. Only for leaves outside a recorded forward pass
  // (parameter updates, test fixtures).
  std::span<double> mutable_data();
  std::vector<double> to_vector() const;
  double item() const;
  double at(std::size_t flat_index) const { return data()[flat_index]; }

  bool requires_grad() const;
  void set_requires_grad(bool on);
  bool has_grad() const;
  std::span<const double> grad() const;
  void zero_grad();

  // Fresh leaf holding a copy of the values; no graph history.
  Tensor detach() const;
  Tensor clone_leaf(bool requires_grad) const;

  // Populates grad of every requires_grad tensor reachable from this scalar.
  void backward() const;

  const detail::NodePtr& node() const { return node_; }
  explicit Tensor(detail::NodePtr node) : node_(std::move(node)) {}

 private:
  detail::NodePtr node_;
};

// Reverse topological replay of the graph reachable from a scalar root.
// Each recorded operation is visited exactly once.
class GradTape {
 public:
  explicit GradTape(const Tensor& root);

  std::size_t size() const { return order_.size(); }
  void replay();

 private:
  Tensor root_;
  std::vector<detail::Node*> order_;  // topological: inputs before outputs
};

// Thread-local switch for recording; ops run value-only when disabled.
class GradMode {
 public:
  static bool enabled();
  static void set_enabled(bool on);
};

class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

namespace detail {

// Builds an op result. History is recorded only when grad mode is on and
// at least one input participates.
Tensor make_result(Shape shape, std::vector<double> values,
                   std::vector<Tensor> inputs, BackwardFn backward);

// Adds `values` into the gradient of `node` when it participates.
void accumulate(Node& node, std::span<const double> values);

}  // namespace detail

}  // namespace tokengan

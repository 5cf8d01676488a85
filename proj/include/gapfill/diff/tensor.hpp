#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

namespace gapfill::diff {

// One tape node. Ops append nodes that point back at their parents; the
// backward pass walks the DAG in reverse topological order with a fixed
// child-visit order, so gradient accumulation order never varies between
// runs (bit-reproducibility is a contract, not a nicety).
struct Node {
  std::vector<std::int64_t> shape;
  std::vector<double> value;
  std::vector<double> grad;  // allocated iff requires_grad
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void()> backward_fn;  // reads own grad, adds into parents'

  std::size_t numel() const {
    std::size_t n = 1;
    for (auto d : shape) n *= static_cast<std::size_t>(d);
    return n;
  }
};

// Value-semantic handle; copying shares the node.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(std::vector<std::int64_t> shape,
                      bool requires_grad = false);
  static Tensor constant(std::vector<std::int64_t> shape,
                         std::vector<double> values);
  static Tensor param(std::vector<std::int64_t> shape,
                      std::vector<double> values);
  static Tensor scalar(double v);

  bool defined() const { return node_ != nullptr; }
  const std::vector<std::int64_t>& shape() const { return node_->shape; }
  std::size_t numel() const { return node_->numel(); }
  std::vector<double>& values() { return node_->value; }
  const std::vector<double>& values() const { return node_->value; }
  std::vector<double>& grad() { return node_->grad; }
  const std::vector<double>& grad() const { return node_->grad; }
  bool requires_grad() const { return node_ && node_->requires_grad; }
  void zero_grad();
  double item() const;  // single-element tensors only

  std::shared_ptr<Node> node() const { return node_; }
  explicit Tensor(std::shared_ptr<Node> n) : node_(std::move(n)) {}

 private:
  std::shared_ptr<Node> node_;
};

// Seeds d(loss)/d(loss) = 1 and back-propagates. `loss` must be scalar.
void backward(const Tensor& loss);

}  // namespace gapfill::diff

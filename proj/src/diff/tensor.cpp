#include "gapfill/diff/tensor.hpp"

#include <stdexcept>
#include <unordered_set>
#include <utility>

namespace gapfill::diff {

namespace {

std::shared_ptr<Node> new_node(std::vector<std::int64_t> shape,
                               bool requires_grad) {
  auto n = std::make_shared<Node>();
  n->shape = std::move(shape);
  n->requires_grad = requires_grad;
  n->value.assign(n->numel(), 0.0);
  if (requires_grad) n->grad.assign(n->numel(), 0.0);
  return n;
}

}  // namespace

Tensor Tensor::zeros(std::vector<std::int64_t> shape, bool requires_grad) {
  return Tensor(new_node(std::move(shape), requires_grad));
}

Tensor Tensor::constant(std::vector<std::int64_t> shape,
                        std::vector<double> values) {
  auto n = new_node(std::move(shape), false);
  if (values.size() != n->numel())
    throw std::invalid_argument("Tensor::constant: value count != shape");
  n->value = std::move(values);
  return Tensor(std::move(n));
}

Tensor Tensor::param(std::vector<std::int64_t> shape,
                     std::vector<double> values) {
  auto n = new_node(std::move(shape), true);
  if (values.size() != n->numel())
    throw std::invalid_argument("Tensor::param: value count != shape");
  n->value = std::move(values);
  return Tensor(std::move(n));
}

Tensor Tensor::scalar(double v) { return constant({1}, {v}); }

void Tensor::zero_grad() {
  if (node_ && node_->requires_grad)
    node_->grad.assign(node_->numel(), 0.0);
}

double Tensor::item() const {
  if (!node_ || node_->numel() != 1)
    throw std::invalid_argument("Tensor::item: tensor is not scalar");
  return node_->value[0];
}

void backward(const Tensor& loss) {
  if (!loss.defined() || loss.numel() != 1)
    throw std::invalid_argument("backward: loss must be a defined scalar");
  Node* root = loss.node().get();
  if (!root->requires_grad)
    throw std::invalid_argument("backward: loss does not require grad");

  // Iterative post-order DFS; parents are visited in creation order, which
  // pins the gradient accumulation order.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.emplace_back(root, 0);
  visited.insert(root);
  while (!stack.empty()) {
    auto& [node, idx] = stack.back();
    if (idx < node->parents.size()) {
      Node* parent = node->parents[idx++].get();
      if (parent->requires_grad && !visited.count(parent)) {
        visited.insert(parent);
        stack.emplace_back(parent, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  root->grad.assign(1, 1.0);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if ((*it)->backward_fn) (*it)->backward_fn();
  }
}

}  // namespace gapfill::diff

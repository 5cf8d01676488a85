#pragma once

#include <vector>

#include "gapfill/diff/tensor.hpp"

namespace gapfill::diff {

// Adam with bias correction. step() refuses to touch the parameters if any
// gradient is non-finite and reports that by returning false; the caller
// decides whether to abort or skip.
class Adam {
 public:
  explicit Adam(std::vector<Tensor> params, double lr = 1e-3,
                double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

  bool step();
  void zero_grad();

  double lr() const { return lr_; }
  void set_lr(double lr) { lr_ = lr; }
  std::int64_t steps_taken() const { return t_; }

 private:
  std::vector<Tensor> params_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  double lr_, beta1_, beta2_, eps_;
  std::int64_t t_ = 0;
};

}  // namespace gapfill::diff

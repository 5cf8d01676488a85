#include "gapfill/diff/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace gapfill::diff {

Adam::Adam(std::vector<Tensor> params, double lr, double beta1, double beta2,
           double eps)
    : params_(std::move(params)),
      lr_(lr),
      beta1_(beta1),
      beta2_(beta2),
      eps_(eps) {
  for (const auto& p : params_) {
    if (!p.defined() || !p.requires_grad())
      throw std::invalid_argument("Adam: parameters must require grad");
    m_.emplace_back(p.numel(), 0.0);
    v_.emplace_back(p.numel(), 0.0);
  }
}

bool Adam::step() {
  for (const auto& p : params_)
    for (double g : p.grad())
      if (!std::isfinite(g)) return false;

  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto& value = params_[i].values();
    const auto& grad = params_[i].grad();
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t j = 0; j < value.size(); ++j) {
      const double g = grad[j];
      m[j] = beta1_ * m[j] + (1.0 - beta1_) * g;
      v[j] = beta2_ * v[j] + (1.0 - beta2_) * g * g;
      const double mhat = m[j] / bc1;
      const double vhat = v[j] / bc2;
      value[j] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
  }
  return true;
}

void Adam::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

}  // namespace gapfill::diff

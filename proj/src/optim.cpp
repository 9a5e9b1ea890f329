#include "uniac/optim.hpp"

#include <cmath>

namespace uniac {

Optimizer::Optimizer(OptimizerKind kind, double lr, std::vector<Tensor> params,
                     std::vector<std::string> names)
    : learning_rate(lr), kind_(kind), params_(std::move(params)),
      names_(std::move(names)) {
  if (names_.size() != params_.size())
    throw ContractViolation("Optimizer: one name per parameter required");
  m_.resize(params_.size());
  v_.resize(params_.size());
  for (std::size_t i = 0; i < params_.size(); ++i) {
    m_[i].assign(params_[i].numel(), 0.0);
    if (kind_ == OptimizerKind::Adam) v_[i].assign(params_[i].numel(), 0.0);
  }
}

Optimizer Optimizer::adam(double lr, std::vector<Tensor> params,
                          std::vector<std::string> names, double beta1,
                          double beta2, double eps) {
  Optimizer o(OptimizerKind::Adam, lr, std::move(params), std::move(names));
  o.beta1 = beta1;
  o.beta2 = beta2;
  o.adam_eps = eps;
  return o;
}

Optimizer Optimizer::sgd_momentum(double lr, std::vector<Tensor> params,
                                  std::vector<std::string> names,
                                  double momentum) {
  Optimizer o(OptimizerKind::SgdMomentum, lr, std::move(params),
              std::move(names));
  o.momentum = momentum;
  return o;
}

void Optimizer::step() {
  ++t_;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto theta = params_[i].mutable_data();
    auto grad = params_[i].grad();
    if (grad.empty()) continue;  // parameter untouched by this loss
    for (double g : grad)
      if (!std::isfinite(g))
        throw NonFiniteError("non-finite gradient in parameter '" + names_[i] +
                             "'");
    if (kind_ == OptimizerKind::Adam) {
      const double bc1 = 1.0 - std::pow(beta1, double(t_));
      const double bc2 = 1.0 - std::pow(beta2, double(t_));
      auto& m = m_[i];
      auto& v = v_[i];
      for (std::size_t j = 0; j < theta.size(); ++j) {
        const double g = grad[j];
        m[j] = beta1 * m[j] + (1.0 - beta1) * g;
        v[j] = beta2 * v[j] + (1.0 - beta2) * g * g;
        const double mh = m[j] / bc1;
        const double vh = v[j] / bc2;
        theta[j] -= learning_rate * mh / (std::sqrt(vh) + adam_eps);
      }
    } else {
      auto& vel = m_[i];
      for (std::size_t j = 0; j < theta.size(); ++j) {
        vel[j] = momentum * vel[j] + grad[j];
        theta[j] -= learning_rate * vel[j];
      }
    }
  }
}

void Optimizer::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

}  // namespace uniac

#pragma once

#include <string>
#include <vector>

#include "uniac/tensor.hpp"

namespace uniac {

enum class OptimizerKind { Adam, SgdMomentum };

// Adam / SGD-with-momentum over a fixed set of named leaf parameters.
// Gradients are checked for finiteness on every step; the caller owns zeroing
// grads between steps.
class Optimizer {
 public:
  Optimizer(OptimizerKind kind, double learning_rate,
            std::vector<Tensor> params, std::vector<std::string> names);

  static Optimizer adam(double lr, std::vector<Tensor> params,
                        std::vector<std::string> names,
                        double beta1 = 0.9, double beta2 = 0.999,
                        double eps = 1e-8);
  static Optimizer sgd_momentum(double lr, std::vector<Tensor> params,
                                std::vector<std::string> names,
                                double momentum = 0.9);

  void step();
  void zero_grad();

  double learning_rate = 0.0;
  double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
  double momentum = 0.9;
  long step_count() const { return t_; }
  OptimizerKind kind() const { return kind_; }

 private:
  OptimizerKind kind_;
  std::vector<Tensor> params_;
  std::vector<std::string> names_;
  std::vector<std::vector<double>> m_;  // first moment / velocity
  std::vector<std::vector<double>> v_;  // second moment (Adam)
  long t_ = 0;
};

}  // namespace uniac

#pragma once

#include <string>
#include <vector>

#include "uniac/ops.hpp"
#include "uniac/rng.hpp"
#include "uniac/tensor.hpp"

namespace uniac {

enum class Activation { Relu, Elu, Tanh };

enum class WeightInit { XavierUniform, Uniform };

// Fully-connected network description. layer_widths runs input -> hidden... ->
// output and needs at least one hidden layer. When layer_norm_first is set the
// first linear layer is followed by layer-norm + tanh before the activation.
// output_scale multiplies the final layer's initialized weights and biases.
struct MlpSpec {
  std::vector<std::size_t> layer_widths;
  Activation activation = Activation::Relu;
  bool layer_norm_first = false;
  WeightInit weight_init = WeightInit::XavierUniform;
  double output_scale = 1.0;

  void validate() const;
  std::size_t in_width() const { return layer_widths.front(); }
  std::size_t out_width() const { return layer_widths.back(); }
};

// Parameter container + forward pass. Parameters are leaf tensors flagged
// requires_grad; the tape is recorded on forward whenever grads are enabled.
struct Mlp {
  MlpSpec spec;
  std::vector<Tensor> weights;  // [in_i, out_i]
  std::vector<Tensor> biases;   // [out_i]
  Tensor ln_gain, ln_bias;      // defined when spec.layer_norm_first

  static Mlp init(const MlpSpec& spec, Rng& rng);

  Tensor forward(const Tensor& x) const;
  std::vector<Tensor> parameters() const;
  std::vector<std::string> parameter_names(const std::string& prefix) const;

  // Copies values (not grads) from another identically-shaped net.
  void copy_from(const Mlp& other);
};

Tensor apply_activation(Activation a, const Tensor& x);

}  // namespace uniac

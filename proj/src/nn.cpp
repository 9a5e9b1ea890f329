#include "uniac/nn.hpp"

#include <algorithm>
#include <cmath>

namespace uniac {

void MlpSpec::validate() const {
  if (layer_widths.size() < 3)
    throw ContractViolation("MlpSpec: needs at least one hidden layer");
  for (std::size_t w : layer_widths)
    if (w == 0) throw ContractViolation("MlpSpec: zero layer width");
  if (!(output_scale > 0.0))
    throw ContractViolation("MlpSpec: output_scale must be positive");
}

Tensor apply_activation(Activation a, const Tensor& x) {
  switch (a) {
    case Activation::Relu: return relu(x);
    case Activation::Elu: return elu(x);
    case Activation::Tanh: return tanh_t(x);
  }
  throw ContractViolation("unknown activation");
}

Mlp Mlp::init(const MlpSpec& spec, Rng& rng) {
  spec.validate();
  Mlp net;
  net.spec = spec;
  const std::size_t n_layers = spec.layer_widths.size() - 1;
  for (std::size_t l = 0; l < n_layers; ++l) {
    const std::size_t fan_in = spec.layer_widths[l];
    const std::size_t fan_out = spec.layer_widths[l + 1];
    std::vector<double> w(fan_in * fan_out), b(fan_out, 0.0);
    if (spec.weight_init == WeightInit::XavierUniform) {
      const double bound = std::sqrt(6.0 / double(fan_in + fan_out));
      for (double& v : w) v = rng.uniform(-bound, bound);
    } else {
      const double bound = 1.0 / std::sqrt(double(fan_in));
      for (double& v : w) v = rng.uniform(-bound, bound);
      for (double& v : b) v = rng.uniform(-bound, bound);
    }
    if (l + 1 == n_layers) {
      for (double& v : w) v *= spec.output_scale;
      for (double& v : b) v *= spec.output_scale;
    }
    net.weights.push_back(Tensor::from({fan_in, fan_out}, std::move(w), true));
    net.biases.push_back(Tensor::from({fan_out}, std::move(b), true));
  }
  if (spec.layer_norm_first) {
    net.ln_gain = Tensor::full({spec.layer_widths[1]}, 1.0, true);
    net.ln_bias = Tensor::zeros({spec.layer_widths[1]}, true);
  }
  return net;
}

Tensor Mlp::forward(const Tensor& x) const {
  if (x.cols() != spec.in_width())
    throw DimensionError("mlp: layer 0 expects input width " +
                         std::to_string(spec.in_width()) + ", got " +
                         std::to_string(x.cols()));
  Tensor h = x;
  const std::size_t n_layers = weights.size();
  for (std::size_t l = 0; l < n_layers; ++l) {
    if (h.cols() != weights[l].shape()[0])
      throw DimensionError("mlp: layer " + std::to_string(l) +
                           " expects input width " +
                           std::to_string(weights[l].shape()[0]) + ", got " +
                           std::to_string(h.cols()));
    h = add_bias(matmul(h, weights[l]), biases[l]);
    if (l + 1 == n_layers) break;  // linear output layer
    if (l == 0 && spec.layer_norm_first)
      h = tanh_t(layer_norm(h, ln_gain, ln_bias));
    h = apply_activation(spec.activation, h);
  }
  return h;
}

std::vector<Tensor> Mlp::parameters() const {
  std::vector<Tensor> out;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    out.push_back(weights[l]);
    out.push_back(biases[l]);
    if (l == 0 && spec.layer_norm_first) {
      out.push_back(ln_gain);
      out.push_back(ln_bias);
    }
  }
  return out;
}

std::vector<std::string> Mlp::parameter_names(const std::string& prefix) const {
  std::vector<std::string> out;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    out.push_back(prefix + ".w" + std::to_string(l));
    out.push_back(prefix + ".b" + std::to_string(l));
    if (l == 0 && spec.layer_norm_first) {
      out.push_back(prefix + ".ln_gain");
      out.push_back(prefix + ".ln_bias");
    }
  }
  return out;
}

void Mlp::copy_from(const Mlp& other) {
  auto dst = parameters();
  auto src = other.parameters();
  if (dst.size() != src.size())
    throw DimensionError("Mlp::copy_from: parameter count mismatch");
  for (std::size_t i = 0; i < dst.size(); ++i) {
    auto d = dst[i].mutable_data();
    auto s = src[i].data();
    if (d.size() != s.size())
      throw DimensionError("Mlp::copy_from: parameter shape mismatch");
    std::copy(s.begin(), s.end(), d.begin());
  }
}

}  // namespace uniac

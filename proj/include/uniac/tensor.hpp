#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "uniac/common.hpp"

namespace uniac {

struct TensorNode;

// Dense 64-bit real tensor with an optional reverse-mode tape. Value
// semantics on the handle; the node (data + grad + recorded parents) is
// shared. Gradient accumulation is additive: two backward passes through a
// shared node sum their contributions, and grads are cleared explicitly by
// the caller.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double v, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<double> data,
                     bool requires_grad = false);
  static Tensor scalar(double v, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t numel() const;
  std::size_t rows() const;  // shape[0], or 1 for rank 0/1... rank-1 => 1 row
  std::size_t cols() const;  // last dimension extent

  double item() const;  // requires numel()==1
  std::span<const double> data() const;
  // Mutable access is for leaf tensors (parameters, buffers) only.
  std::span<double> mutable_data();

  bool requires_grad() const;
  void set_requires_grad(bool b);
  bool is_leaf() const;

  // Grad buffer view; zeros-sized span if never touched.
  std::span<const double> grad() const;
  std::span<double> mutable_grad();
  void zero_grad();

  Tensor detach() const;

  // Internal: used by op implementations.
  TensorNode* node() const { return node_.get(); }
  std::shared_ptr<TensorNode> shared_node() const { return node_; }
  explicit Tensor(std::shared_ptr<TensorNode> n) : node_(std::move(n)) {}

 private:
  std::shared_ptr<TensorNode> node_;
};

struct TensorNode {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;  // lazily allocated, always numel-sized when present
  bool requires_grad = false;
  bool leaf = true;
  std::vector<std::shared_ptr<TensorNode>> parents;
  std::function<void(TensorNode&)> backprop;  // reads this->grad, accumulates into parents

  double* grad_buf() {
    if (grad.empty()) grad.assign(value.size(), 0.0);
    return grad.data();
  }
};

// Populates grads of everything reachable from `loss` (which must be scalar).
// Repeated calls accumulate.
void backward(const Tensor& loss);

// Thread-local autograd switch; ops record the tape only when enabled.
bool grad_enabled();
struct NoGradGuard {
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool prev_;
};

}  // namespace uniac

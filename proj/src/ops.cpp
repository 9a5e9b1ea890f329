#include "uniac/ops.hpp"

#include <algorithm>
#include <cmath>

#include "uniac/kernels.hpp"

namespace uniac {

namespace {

using NodePtr = std::shared_ptr<TensorNode>;

Tensor make_op(Shape shape, std::vector<double> value,
               std::initializer_list<Tensor> inputs,
               std::function<void(TensorNode&)> backprop) {
  auto n = std::make_shared<TensorNode>();
  n->shape = std::move(shape);
  n->value = std::move(value);
  bool rec = grad_enabled();
  if (rec) {
    rec = false;
    for (const Tensor& t : inputs) rec = rec || t.node()->requires_grad;
  }
  if (rec) {
    n->requires_grad = true;
    n->leaf = false;
    for (const Tensor& t : inputs) n->parents.push_back(t.shared_node());
    n->backprop = std::move(backprop);
  }
  return Tensor(std::move(n));
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape())
    throw DimensionError(std::string(op) + ": shape mismatch " +
                         shape_str(a.shape()) + " vs " + shape_str(b.shape()));
}

// dst += src elementwise over n entries.
void axpy1(std::size_t n, const double* src, double* dst) {
  for (std::size_t i = 0; i < n; ++i) dst[i] += src[i];
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "add");
  std::vector<double> y(a.numel());
  kern::zip(y.size(), a.data().data(), b.data().data(), y.data(),
            [](double x, double z) { return x + z; });
  TensorNode* pa = a.node();
  TensorNode* pb = b.node();
  return make_op(a.shape(), std::move(y), {a, b}, [pa, pb](TensorNode& self) {
    if (pa->requires_grad) axpy1(self.grad.size(), self.grad.data(), pa->grad_buf());
    if (pb->requires_grad) axpy1(self.grad.size(), self.grad.data(), pb->grad_buf());
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "sub");
  std::vector<double> y(a.numel());
  kern::zip(y.size(), a.data().data(), b.data().data(), y.data(),
            [](double x, double z) { return x - z; });
  TensorNode* pa = a.node();
  TensorNode* pb = b.node();
  return make_op(a.shape(), std::move(y), {a, b}, [pa, pb](TensorNode& self) {
    if (pa->requires_grad) axpy1(self.grad.size(), self.grad.data(), pa->grad_buf());
    if (pb->requires_grad) {
      double* g = pb->grad_buf();
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] -= self.grad[i];
    }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "mul");
  std::vector<double> y(a.numel());
  kern::zip(y.size(), a.data().data(), b.data().data(), y.data(),
            [](double x, double z) { return x * z; });
  TensorNode* pa = a.node();
  TensorNode* pb = b.node();
  return make_op(a.shape(), std::move(y), {a, b}, [pa, pb](TensorNode& self) {
    if (pa->requires_grad) {
      double* g = pa->grad_buf();
      for (std::size_t i = 0; i < self.grad.size(); ++i)
        g[i] += self.grad[i] * pb->value[i];
    }
    if (pb->requires_grad) {
      double* g = pb->grad_buf();
      for (std::size_t i = 0; i < self.grad.size(); ++i)
        g[i] += self.grad[i] * pa->value[i];
    }
  });
}

Tensor add_scalar(const Tensor& a, double c) {
  std::vector<double> y(a.data().begin(), a.data().end());
  for (double& v : y) v += c;
  TensorNode* pa = a.node();
  return make_op(a.shape(), std::move(y), {a}, [pa](TensorNode& self) {
    axpy1(self.grad.size(), self.grad.data(), pa->grad_buf());
  });
}

Tensor scale(const Tensor& a, double c) {
  std::vector<double> y(a.numel());
  const double* x = a.data().data();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = x[i] * c;
  TensorNode* pa = a.node();
  return make_op(a.shape(), std::move(y), {a}, [pa, c](TensorNode& self) {
    double* g = pa->grad_buf();
    for (std::size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i] * c;
  });
}

Tensor neg(const Tensor& a) { return scale(a, -1.0); }

Tensor mul_scalar_t(const Tensor& a, const Tensor& s) {
  if (s.numel() != 1) throw DimensionError("mul_scalar_t: s must have numel 1");
  const double sv = s.data()[0];
  std::vector<double> y(a.numel());
  const double* x = a.data().data();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = x[i] * sv;
  TensorNode* pa = a.node();
  TensorNode* ps = s.node();
  return make_op(a.shape(), std::move(y), {a, s}, [pa, ps, sv](TensorNode& self) {
    if (pa->requires_grad) {
      double* g = pa->grad_buf();
      for (std::size_t i = 0; i < self.grad.size(); ++i)
        g[i] += self.grad[i] * sv;
    }
    if (ps->requires_grad) {
      double acc = 0.0;
      for (std::size_t i = 0; i < self.grad.size(); ++i)
        acc += self.grad[i] * pa->value[i];
      ps->grad_buf()[0] += acc;
    }
  });
}

Tensor add_bias(const Tensor& a, const Tensor& bias) {
  const std::size_t m = a.rows(), n = a.cols();
  if (bias.numel() != n)
    throw DimensionError("add_bias: bias " + shape_str(bias.shape()) +
                         " does not match width " + std::to_string(n));
  std::vector<double> y(a.numel());
  const double* x = a.data().data();
  const double* b = bias.data().data();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) y[i * n + j] = x[i * n + j] + b[j];
  TensorNode* pa = a.node();
  TensorNode* pb = bias.node();
  return make_op(a.shape(), std::move(y), {a, bias},
                 [pa, pb, m, n](TensorNode& self) {
                   if (pa->requires_grad)
                     axpy1(self.grad.size(), self.grad.data(), pa->grad_buf());
                   if (pb->requires_grad) {
                     double* g = pb->grad_buf();
                     for (std::size_t i = 0; i < m; ++i)
                       for (std::size_t j = 0; j < n; ++j)
                         g[j] += self.grad[i * n + j];
                   }
                 });
}

Tensor broadcast_row(const Tensor& v, std::size_t rows) {
  const std::size_t n = v.numel();
  std::vector<double> y(rows * n);
  const double* x = v.data().data();
  for (std::size_t i = 0; i < rows; ++i)
    std::copy(x, x + n, y.data() + i * n);
  TensorNode* pv = v.node();
  return make_op({rows, n}, std::move(y), {v}, [pv, rows, n](TensorNode& self) {
    double* g = pv->grad_buf();
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < n; ++j) g[j] += self.grad[i * n + j];
  });
}

Tensor sub_colvec(const Tensor& a, const Tensor& v) {
  const std::size_t m = a.rows(), n = a.cols();
  if (v.numel() != m)
    throw DimensionError("sub_colvec: column vector length " +
                         std::to_string(v.numel()) + " vs rows " +
                         std::to_string(m));
  std::vector<double> y(a.numel());
  const double* x = a.data().data();
  const double* c = v.data().data();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) y[i * n + j] = x[i * n + j] - c[i];
  TensorNode* pa = a.node();
  TensorNode* pv = v.node();
  return make_op(a.shape(), std::move(y), {a, v},
                 [pa, pv, m, n](TensorNode& self) {
                   if (pa->requires_grad)
                     axpy1(self.grad.size(), self.grad.data(), pa->grad_buf());
                   if (pv->requires_grad) {
                     double* g = pv->grad_buf();
                     for (std::size_t i = 0; i < m; ++i) {
                       double acc = 0.0;
                       for (std::size_t j = 0; j < n; ++j)
                         acc += self.grad[i * n + j];
                       g[i] -= acc;
                     }
                   }
                 });
}

namespace {

Tensor unary_op(const Tensor& a, kern::UnaryFn f,
                std::function<void(TensorNode&, TensorNode*)> back) {
  std::vector<double> y(a.numel());
  kern::map(y.size(), a.data().data(), y.data(), f);
  TensorNode* pa = a.node();
  return make_op(a.shape(), std::move(y), {a},
                 [pa, back = std::move(back)](TensorNode& self) {
                   back(self, pa);
                 });
}

}  // namespace

Tensor relu(const Tensor& a) {
  return unary_op(
      a, [](double x) { return x > 0.0 ? x : 0.0; },
      [](TensorNode& self, TensorNode* pa) {
        double* g = pa->grad_buf();
        for (std::size_t i = 0; i < self.grad.size(); ++i)
          if (pa->value[i] > 0.0) g[i] += self.grad[i];
      });
}

Tensor elu(const Tensor& a) {
  return unary_op(
      a, [](double x) { return x > 0.0 ? x : std::expm1(x); },
      [](TensorNode& self, TensorNode* pa) {
        double* g = pa->grad_buf();
        for (std::size_t i = 0; i < self.grad.size(); ++i)
          g[i] += self.grad[i] *
                  (pa->value[i] > 0.0 ? 1.0 : self.value[i] + 1.0);
      });
}

Tensor tanh_t(const Tensor& a) {
  return unary_op(
      a, [](double x) { return std::tanh(x); },
      [](TensorNode& self, TensorNode* pa) {
        double* g = pa->grad_buf();
        for (std::size_t i = 0; i < self.grad.size(); ++i) {
          const double y = self.value[i];
          g[i] += self.grad[i] * (1.0 - y * y);
        }
      });
}

Tensor exp_t(const Tensor& a) {
  return unary_op(
      a, [](double x) { return std::exp(x); },
      [](TensorNode& self, TensorNode* pa) {
        double* g = pa->grad_buf();
        for (std::size_t i = 0; i < self.grad.size(); ++i)
          g[i] += self.grad[i] * self.value[i];
      });
}

Tensor log_t(const Tensor& a) {
  return unary_op(
      a, [](double x) { return std::log(x); },
      [](TensorNode& self, TensorNode* pa) {
        double* g = pa->grad_buf();
        for (std::size_t i = 0; i < self.grad.size(); ++i)
          g[i] += self.grad[i] / pa->value[i];
      });
}

Tensor softplus(const Tensor& a) {
  // log(1 + e^x) = max(x, 0) + log1p(e^{-|x|})
  return unary_op(
      a,
      [](double x) {
        const double m = x > 0.0 ? x : 0.0;
        return m + std::log1p(std::exp(-std::fabs(x)));
      },
      [](TensorNode& self, TensorNode* pa) {
        double* g = pa->grad_buf();
        for (std::size_t i = 0; i < self.grad.size(); ++i) {
          const double x = pa->value[i];
          const double s =
              x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                       : std::exp(x) / (1.0 + std::exp(x));
          g[i] += self.grad[i] * s;
        }
      });
}

Tensor square(const Tensor& a) {
  return unary_op(
      a, [](double x) { return x * x; },
      [](TensorNode& self, TensorNode* pa) {
        double* g = pa->grad_buf();
        for (std::size_t i = 0; i < self.grad.size(); ++i)
          g[i] += self.grad[i] * 2.0 * pa->value[i];
      });
}

Tensor abs_t(const Tensor& a) {
  return unary_op(
      a, [](double x) { return std::fabs(x); },
      [](TensorNode& self, TensorNode* pa) {
        double* g = pa->grad_buf();
        for (std::size_t i = 0; i < self.grad.size(); ++i) {
          const double x = pa->value[i];
          g[i] += self.grad[i] * (x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0));
        }
      });
}

Tensor clamp(const Tensor& a, double lo, double hi) {
  std::vector<double> y(a.numel());
  const double* x = a.data().data();
  for (std::size_t i = 0; i < y.size(); ++i)
    y[i] = std::min(std::max(x[i], lo), hi);
  TensorNode* pa = a.node();
  return make_op(a.shape(), std::move(y), {a}, [pa, lo, hi](TensorNode& self) {
    double* g = pa->grad_buf();
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      const double x = pa->value[i];
      if (x >= lo && x <= hi) g[i] += self.grad[i];
    }
  });
}

Tensor max_scalar(const Tensor& a, double c) {
  std::vector<double> y(a.numel());
  const double* x = a.data().data();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::max(x[i], c);
  TensorNode* pa = a.node();
  return make_op(a.shape(), std::move(y), {a}, [pa, c](TensorNode& self) {
    double* g = pa->grad_buf();
    for (std::size_t i = 0; i < self.grad.size(); ++i)
      if (pa->value[i] > c) g[i] += self.grad[i];
  });
}

Tensor min_ew(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "min_ew");
  std::vector<double> y(a.numel());
  kern::zip(y.size(), a.data().data(), b.data().data(), y.data(),
            [](double x, double z) { return x <= z ? x : z; });
  TensorNode* pa = a.node();
  TensorNode* pb = b.node();
  return make_op(a.shape(), std::move(y), {a, b}, [pa, pb](TensorNode& self) {
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      const bool take_a = pa->value[i] <= pb->value[i];
      if (take_a && pa->requires_grad) pa->grad_buf()[i] += self.grad[i];
      if (!take_a && pb->requires_grad) pb->grad_buf()[i] += self.grad[i];
    }
  });
}

Tensor sum(const Tensor& a) {
  const double s = kern::sum(a.numel(), a.data().data());
  TensorNode* pa = a.node();
  return make_op({1}, {s}, {a}, [pa](TensorNode& self) {
    const double g0 = self.grad[0];
    double* g = pa->grad_buf();
    for (std::size_t i = 0; i < pa->value.size(); ++i) g[i] += g0;
  });
}

Tensor mean(const Tensor& a) {
  const std::size_t n = a.numel();
  const double s = kern::sum(n, a.data().data()) / double(n);
  TensorNode* pa = a.node();
  return make_op({1}, {s}, {a}, [pa, n](TensorNode& self) {
    const double g0 = self.grad[0] / double(n);
    double* g = pa->grad_buf();
    for (std::size_t i = 0; i < n; ++i) g[i] += g0;
  });
}

Tensor sum_last(const Tensor& a) {
  const std::size_t m = a.rows(), n = a.cols();
  std::vector<double> y(m);
  const double* x = a.data().data();
  for (std::size_t i = 0; i < m; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += x[i * n + j];
    y[i] = acc;
  }
  TensorNode* pa = a.node();
  return make_op({m}, std::move(y), {a}, [pa, m, n](TensorNode& self) {
    double* g = pa->grad_buf();
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) g[i * n + j] += self.grad[i];
  });
}

Tensor logsumexp_last(const Tensor& a) {
  const std::size_t m = a.rows(), n = a.cols();
  if (n == 0) throw DimensionError("logsumexp_last: empty last dimension");
  std::vector<double> y(m);
  const double* x = a.data().data();
  for (std::size_t i = 0; i < m; ++i) {
    const double* row = x + i * n;
    double mx = row[0];
    for (std::size_t j = 1; j < n; ++j) mx = std::max(mx, row[j]);
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += std::exp(row[j] - mx);
    y[i] = mx + std::log(acc);
  }
  TensorNode* pa = a.node();
  return make_op({m}, std::move(y), {a}, [pa, m, n](TensorNode& self) {
    double* g = pa->grad_buf();
    for (std::size_t i = 0; i < m; ++i) {
      const double lse = self.value[i];
      for (std::size_t j = 0; j < n; ++j)
        g[i * n + j] += self.grad[i] * std::exp(pa->value[i * n + j] - lse);
    }
  });
}

Tensor reshape(const Tensor& a, Shape shape) {
  if (numel_of(shape) != a.numel())
    throw DimensionError("reshape: cannot view " + shape_str(a.shape()) +
                         " as " + shape_str(shape));
  std::vector<double> y(a.data().begin(), a.data().end());
  TensorNode* pa = a.node();
  return make_op(std::move(shape), std::move(y), {a}, [pa](TensorNode& self) {
    axpy1(self.grad.size(), self.grad.data(), pa->grad_buf());
  });
}

Tensor slice_cols(const Tensor& a, std::size_t c0, std::size_t c1) {
  const std::size_t m = a.rows(), n = a.cols();
  if (c0 >= c1 || c1 > n)
    throw DimensionError("slice_cols: [" + std::to_string(c0) + ", " +
                         std::to_string(c1) + ") out of width " +
                         std::to_string(n));
  const std::size_t w = c1 - c0;
  std::vector<double> y(m * w);
  const double* x = a.data().data();
  for (std::size_t i = 0; i < m; ++i)
    std::copy(x + i * n + c0, x + i * n + c1, y.data() + i * w);
  TensorNode* pa = a.node();
  return make_op({m, w}, std::move(y), {a}, [pa, m, n, c0, w](TensorNode& self) {
    double* g = pa->grad_buf();
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < w; ++j)
        g[i * n + c0 + j] += self.grad[i * w + j];
  });
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
  const std::size_t m = a.rows();
  if (b.rows() != m)
    throw DimensionError("concat_cols: row mismatch " + std::to_string(m) +
                         " vs " + std::to_string(b.rows()));
  const std::size_t na = a.cols(), nb = b.cols(), n = na + nb;
  std::vector<double> y(m * n);
  const double* xa = a.data().data();
  const double* xb = b.data().data();
  for (std::size_t i = 0; i < m; ++i) {
    std::copy(xa + i * na, xa + (i + 1) * na, y.data() + i * n);
    std::copy(xb + i * nb, xb + (i + 1) * nb, y.data() + i * n + na);
  }
  TensorNode* pa = a.node();
  TensorNode* pb = b.node();
  return make_op({m, n}, std::move(y), {a, b},
                 [pa, pb, m, na, nb, n](TensorNode& self) {
                   if (pa->requires_grad) {
                     double* g = pa->grad_buf();
                     for (std::size_t i = 0; i < m; ++i)
                       for (std::size_t j = 0; j < na; ++j)
                         g[i * na + j] += self.grad[i * n + j];
                   }
                   if (pb->requires_grad) {
                     double* g = pb->grad_buf();
                     for (std::size_t i = 0; i < m; ++i)
                       for (std::size_t j = 0; j < nb; ++j)
                         g[i * nb + j] += self.grad[i * n + na + j];
                   }
                 });
}

Tensor repeat_rows(const Tensor& a, std::size_t times) {
  const std::size_t m = a.rows(), n = a.cols();
  std::vector<double> y(m * times * n);
  const double* x = a.data().data();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t r = 0; r < times; ++r)
      std::copy(x + i * n, x + (i + 1) * n, y.data() + (i * times + r) * n);
  TensorNode* pa = a.node();
  return make_op({m * times, n}, std::move(y), {a},
                 [pa, m, n, times](TensorNode& self) {
                   double* g = pa->grad_buf();
                   for (std::size_t i = 0; i < m; ++i)
                     for (std::size_t r = 0; r < times; ++r)
                       for (std::size_t j = 0; j < n; ++j)
                         g[i * n + j] += self.grad[(i * times + r) * n + j];
                 });
}

Tensor gather_last(const Tensor& a, const std::vector<std::size_t>& idx) {
  const std::size_t m = a.rows(), n = a.cols();
  if (idx.size() != m)
    throw DimensionError("gather_last: " + std::to_string(idx.size()) +
                         " indices for " + std::to_string(m) + " rows");
  std::vector<double> y(m);
  const double* x = a.data().data();
  for (std::size_t i = 0; i < m; ++i) {
    if (idx[i] >= n) throw DimensionError("gather_last: index out of range");
    y[i] = x[i * n + idx[i]];
  }
  TensorNode* pa = a.node();
  return make_op({m}, std::move(y), {a}, [pa, idx, n](TensorNode& self) {
    double* g = pa->grad_buf();
    for (std::size_t i = 0; i < idx.size(); ++i)
      g[i * n + idx[i]] += self.grad[i];
  });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.shape().size() != 2 || b.shape().size() != 2)
    throw DimensionError("matmul: expects rank-2 operands, got " +
                         shape_str(a.shape()) + " and " + shape_str(b.shape()));
  const std::size_t m = a.shape()[0], k = a.shape()[1];
  if (b.shape()[0] != k)
    throw DimensionError("matmul: inner dimensions " + shape_str(a.shape()) +
                         " x " + shape_str(b.shape()));
  const std::size_t n = b.shape()[1];
  std::vector<double> y(m * n);
  kern::gemm_nn(m, n, k, a.data().data(), b.data().data(), y.data());
  TensorNode* pa = a.node();
  TensorNode* pb = b.node();
  return make_op({m, n}, std::move(y), {a, b},
                 [pa, pb, m, n, k](TensorNode& self) {
                   if (pa->requires_grad) {
                     std::vector<double> tmp(m * k);
                     kern::gemm_nt(m, k, n, self.grad.data(), pb->value.data(),
                                   tmp.data());
                     axpy1(tmp.size(), tmp.data(), pa->grad_buf());
                   }
                   if (pb->requires_grad) {
                     std::vector<double> tmp(k * n);
                     kern::gemm_tn(m, n, k, pa->value.data(), self.grad.data(),
                                   tmp.data());
                     axpy1(tmp.size(), tmp.data(), pb->grad_buf());
                   }
                 });
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                  double eps) {
  const std::size_t m = x.rows(), n = x.cols();
  if (n == 0) throw DimensionError("layer_norm: empty last dimension");
  if (gain.numel() != n || bias.numel() != n)
    throw DimensionError("layer_norm: gain/bias must match width " +
                         std::to_string(n));
  std::vector<double> y(m * n);
  auto mu = std::make_shared<std::vector<double>>(m);
  auto is = std::make_shared<std::vector<double>>(m);
  kern::layer_norm_rows(m, n, x.data().data(), gain.data().data(),
                        bias.data().data(), eps, y.data(), mu->data(),
                        is->data());
  TensorNode* px = x.node();
  TensorNode* pg = gain.node();
  TensorNode* pb = bias.node();
  return make_op(
      x.shape(), std::move(y), {x, gain, bias},
      [px, pg, pb, mu, is, m, n](TensorNode& self) {
        std::vector<double> y0(n), dy0(n);
        for (std::size_t i = 0; i < m; ++i) {
          const double* xr = px->value.data() + i * n;
          const double* gr = self.grad.data() + i * n;
          const double istd = (*is)[i];
          const double mean_i = (*mu)[i];
          // y0 = normalized pre-affine row
          for (std::size_t j = 0; j < n; ++j) y0[j] = (xr[j] - mean_i) * istd;
          if (pg->requires_grad) {
            double* gg = pg->grad_buf();
            for (std::size_t j = 0; j < n; ++j) gg[j] += gr[j] * y0[j];
          }
          if (pb->requires_grad) {
            double* gb = pb->grad_buf();
            for (std::size_t j = 0; j < n; ++j) gb[j] += gr[j];
          }
          if (px->requires_grad) {
            double m1 = 0.0, m2 = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
              dy0[j] = gr[j] * pg->value[j];
              m1 += dy0[j];
              m2 += dy0[j] * y0[j];
            }
            m1 /= double(n);
            m2 /= double(n);
            double* gx = px->grad_buf();
            for (std::size_t j = 0; j < n; ++j)
              gx[i * n + j] += (dy0[j] - m1 - y0[j] * m2) * istd;
          }
        }
      });
}

}  // namespace uniac

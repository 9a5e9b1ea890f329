#pragma once

#include <cstddef>
#include <vector>

#include "uniac/tensor.hpp"

namespace uniac {

// Elementwise / arithmetic
Tensor add(const Tensor& a, const Tensor& b);          // same shape
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor add_scalar(const Tensor& a, double c);
Tensor scale(const Tensor& a, double c);
Tensor neg(const Tensor& a);
Tensor mul_scalar_t(const Tensor& a, const Tensor& s);  // s has numel 1

// Broadcasting helpers for [rows, cols] layouts
Tensor add_bias(const Tensor& a, const Tensor& bias);     // bias: [cols]
Tensor broadcast_row(const Tensor& v, std::size_t rows);  // v: [cols] -> [rows, cols]
Tensor sub_colvec(const Tensor& a, const Tensor& v);      // v: [rows]

// Nonlinearities
Tensor relu(const Tensor& a);
Tensor elu(const Tensor& a);
Tensor tanh_t(const Tensor& a);
Tensor exp_t(const Tensor& a);
Tensor log_t(const Tensor& a);
Tensor softplus(const Tensor& a);
Tensor square(const Tensor& a);
Tensor abs_t(const Tensor& a);
Tensor clamp(const Tensor& a, double lo, double hi);
Tensor max_scalar(const Tensor& a, double c);
Tensor min_ew(const Tensor& a, const Tensor& b);  // ties take a's gradient

// Reductions
Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
Tensor sum_last(const Tensor& a);        // [m,n] -> [m]
Tensor logsumexp_last(const Tensor& a);  // [m,n] -> [m], max-shifted

// Shape plumbing
Tensor reshape(const Tensor& a, Shape shape);
Tensor slice_cols(const Tensor& a, std::size_t c0, std::size_t c1);
Tensor concat_cols(const Tensor& a, const Tensor& b);
Tensor repeat_rows(const Tensor& a, std::size_t times);
Tensor gather_last(const Tensor& a, const std::vector<std::size_t>& idx);

// Linear algebra
Tensor matmul(const Tensor& a, const Tensor& b);

// Row-wise layer normalization over the last dimension. Output per row has
// mean 0 and population variance 1 before gain/bias; eps sits inside the
// square root.
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                  double eps = 1e-5);

}  // namespace uniac

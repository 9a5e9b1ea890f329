#pragma once

// Test-only oracles, independent of the library's backward/learning paths:
// finite differences live in uniac/checks.hpp; here are quadrature, stats
// helpers and small closed-form references used across the suites.

#include <cmath>
#include <functional>
#include <vector>

#include "uniac/rng.hpp"

namespace oracle {

// Composite Simpson on [a, b] with n (even) intervals.
inline double simpson(const std::function<double(double)>& f, double a,
                      double b, int n = 2000) {
  const double h = (b - a) / n;
  double acc = f(a) + f(b);
  for (int i = 1; i < n; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;      // population
  double stderr_ = 0.0;  // std / sqrt(n)
};

inline MeanStd mean_std(const std::vector<double>& xs) {
  MeanStd out;
  for (double x : xs) out.mean += x;
  out.mean /= double(xs.size());
  for (double x : xs) out.std += (x - out.mean) * (x - out.mean);
  out.std = std::sqrt(out.std / double(xs.size()));
  out.stderr_ = out.std / std::sqrt(double(xs.size()));
  return out;
}

// Forward-view TD(lambda) target: (1-lambda) sum_n lambda^{n-1} G^{(n)} with
// the final n-step return keeping the remaining lambda mass.
inline std::vector<double> forward_view_lambda_returns(
    const std::vector<double>& rewards, const std::vector<double>& next_values,
    bool last_terminated, double lambda, double gamma) {
  const std::size_t T = rewards.size();
  std::vector<double> out(T);
  for (std::size_t t = 0; t < T; ++t) {
    double value = 0.0;
    double weight_left = 1.0;
    double discounted = 0.0;
    double disc = 1.0;
    for (std::size_t n = 1; t + n <= T; ++n) {
      discounted += disc * rewards[t + n - 1];
      disc *= gamma;
      const double bootstrap =
          (t + n == T && last_terminated) ? 0.0 : next_values[t + n - 1];
      const double g_n = discounted + disc * bootstrap;
      const bool last = (t + n == T);
      const double w = last ? weight_left : (1.0 - lambda) * weight_left;
      value += w * g_n;
      weight_left -= w;
    }
    out[t] = value;
  }
  return out;
}

// Reference Adam (bias-corrected), stepped by hand.
struct AdamRef {
  double lr, b1, b2, eps;
  double m = 0.0, v = 0.0;
  long t = 0;
  double step(double theta, double g) {
    ++t;
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    const double mh = m / (1 - std::pow(b1, double(t)));
    const double vh = v / (1 - std::pow(b2, double(t)));
    return theta - lr * mh / (std::sqrt(vh) + eps);
  }
};

}  // namespace oracle

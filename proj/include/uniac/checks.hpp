#pragma once

#include <functional>
#include <string>
#include <vector>

#include "uniac/tensor.hpp"

namespace uniac {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

// Central finite differences (h) against the tape's gradients for every
// element of every parameter. Relative error uses
// |ad - fd| / max(|ad|, |fd|, 1e-3). make_loss must rebuild the graph from
// the parameters' current values.
double gradcheck_max_rel_err(const std::function<Tensor()>& make_loss,
                             const std::vector<Tensor>& params,
                             double h = 1e-5);

// Criterion-style suites shared by the CLI verbs and the acceptance tests.
// gradcheck: every differentiable operation against finite differences,
// >= `instances` random instances per case, tolerance 1e-4.
std::vector<CheckResult> gradcheck_suite(std::uint64_t seed = 20260810,
                                         std::size_t instances = 50);

// exact-verifier: EM reaches V*, KL fixed point matches soft value iteration,
// near-zero temperature recovers the greedy policy; 20 seeded random MDPs.
std::vector<CheckResult> verify_suite(std::uint64_t seed = 7);

}  // namespace uniac

#pragma once

#include <functional>

#include "wuglab/tensor.hpp"

namespace wuglab {

struct SceResult {
    double loss;
    Tensor grad_logits;
};

// loss = -log softmax(logits)[target], max-subtraction stabilized;
// grad = softmax(logits) - onehot(target).
SceResult softmax_cross_entropy(const Tensor& logits, std::size_t target);

// Central-difference check of `analytic` against `loss_fn`. Returns the
// maximum relative error over all coordinates of all named tensors, with
// denominator max(|analytic|, |numeric|, 1e-8).
double finite_diff_check(const std::function<double(const NamedTensors&)>& loss_fn,
                         NamedTensors params, const Gradients& analytic, double epsilon);

}  // namespace wuglab

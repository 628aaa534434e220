#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "wuglab/tensor.hpp"

namespace wuglab {

enum class OptimizerKind { Sgd, Adam };

struct OptimizerState {
    OptimizerKind kind = OptimizerKind::Sgd;
    double learning_rate = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::int64_t step = 0;             // completed steps (Adam bias correction)
    NamedTensors first_moment;         // Adam only, lazily created
    NamedTensors second_moment;

    static OptimizerState sgd(double lr) { return {OptimizerKind::Sgd, lr}; }
    static OptimizerState adam(double lr) { return {OptimizerKind::Adam, lr}; }
};

// One update over the named parameters. Only parameters accepted by
// `trainable` and present in `grads` change; everything else is left
// bit-identical (moments included). Shape mismatches are contract
// violations.
void optimizer_step(NamedTensors& params, const Gradients& grads, OptimizerState& state,
                    const std::function<bool(const std::string&)>& trainable);

}  // namespace wuglab

#include "wuglab/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace wuglab {

void optimizer_step(NamedTensors& params, const Gradients& grads, OptimizerState& state,
                    const std::function<bool(const std::string&)>& trainable) {
    for (const auto& [name, grad] : grads.by_name) {
        const auto it = params.find(name);
        if (it == params.end()) {
            throw std::invalid_argument("optimizer_step: gradient for unknown parameter " +
                                        name);
        }
        if (!grad.same_shape(it->second)) {
            throw std::invalid_argument("optimizer_step: shape mismatch for " + name);
        }
    }
    state.step += 1;
    for (auto& [name, param] : params) {
        if (!trainable(name)) {
            continue;
        }
        const Tensor* grad = grads.find(name);
        if (grad == nullptr) {
            continue;
        }
        switch (state.kind) {
            case OptimizerKind::Sgd:
                for (std::size_t i = 0; i < param.size(); ++i) {
                    param[i] -= state.learning_rate * (*grad)[i];
                }
                break;
            case OptimizerKind::Adam: {
                auto m_it = state.first_moment.find(name);
                if (m_it == state.first_moment.end()) {
                    m_it = state.first_moment.emplace(name, Tensor(param.shape())).first;
                    state.second_moment.emplace(name, Tensor(param.shape()));
                }
                Tensor& m = m_it->second;
                Tensor& v = state.second_moment.at(name);
                const double bc1 = 1.0 - std::pow(state.beta1, double(state.step));
                const double bc2 = 1.0 - std::pow(state.beta2, double(state.step));
                for (std::size_t i = 0; i < param.size(); ++i) {
                    const double g = (*grad)[i];
                    m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g;
                    v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g * g;
                    const double m_hat = m[i] / bc1;
                    const double v_hat = v[i] / bc2;
                    param[i] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
                }
                break;
            }
        }
    }
}

}  // namespace wuglab

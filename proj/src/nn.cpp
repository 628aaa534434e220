#include "wuglab/nn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wuglab {

SceResult softmax_cross_entropy(const Tensor& logits, std::size_t target) {
    const std::size_t v = logits.size();
    if (target >= v) {
        throw std::invalid_argument("softmax_cross_entropy: target out of range");
    }
    if (!logits.all_finite()) {
        throw std::invalid_argument("softmax_cross_entropy: non-finite logits");
    }
    double max_logit = logits[0];
    for (std::size_t i = 1; i < v; ++i) {
        max_logit = std::max(max_logit, logits[i]);
    }
    Tensor probs({v});
    double sum = 0.0;
    for (std::size_t i = 0; i < v; ++i) {
        probs[i] = std::exp(logits[i] - max_logit);
        sum += probs[i];
    }
    const double log_sum = std::log(sum);
    const double loss = log_sum - (logits[target] - max_logit);
    for (std::size_t i = 0; i < v; ++i) {
        probs[i] /= sum;
    }
    probs[target] -= 1.0;
    return {loss, std::move(probs)};
}

double finite_diff_check(const std::function<double(const NamedTensors&)>& loss_fn,
                         NamedTensors params, const Gradients& analytic, double epsilon) {
    if (!(epsilon > 0.0)) {
        throw std::invalid_argument("finite_diff_check: epsilon must be positive");
    }
    double max_rel_error = 0.0;
    for (auto& [name, tensor] : params) {
        const Tensor* grad = analytic.find(name);
        for (std::size_t i = 0; i < tensor.size(); ++i) {
            const double saved = tensor[i];
            tensor[i] = saved + epsilon;
            const double up = loss_fn(params);
            tensor[i] = saved - epsilon;
            const double down = loss_fn(params);
            tensor[i] = saved;
            const double numeric = (up - down) / (2.0 * epsilon);
            const double analytic_v = grad ? (*grad)[i] : 0.0;
            const double denom =
                std::max({std::abs(analytic_v), std::abs(numeric), 1e-8});
            max_rel_error = std::max(max_rel_error, std::abs(analytic_v - numeric) / denom);
        }
    }
    return max_rel_error;
}

}  // namespace wuglab

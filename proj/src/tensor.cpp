#include "wuglab/tensor.hpp"

#include <algorithm>
#include <stdexcept>

namespace wuglab {

Tensor::Tensor(std::vector<std::size_t> shape) : shape_(std::move(shape)) {
    std::size_t n = 1;
    for (std::size_t d : shape_) {
        n *= d;
    }
    data_.assign(n, 0.0);
}

Tensor Tensor::of(std::vector<double> values) {
    Tensor t({values.size()});
    std::copy(values.begin(), values.end(), t.data_.begin());
    return t;
}

bool Tensor::all_finite() const {
    return std::all_of(data_.begin(), data_.end(),
                       [](double v) { return std::isfinite(v); });
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

Tensor& Gradients::accumulate(const std::string& name,
                              const std::vector<std::size_t>& shape) {
    auto it = by_name.find(name);
    if (it == by_name.end()) {
        it = by_name.emplace(name, Tensor(shape)).first;
    } else if (it->second.shape() != shape) {
        throw std::invalid_argument("Gradients::accumulate: shape mismatch for " + name);
    }
    return it->second;
}

const Tensor* Gradients::find(const std::string& name) const {
    const auto it = by_name.find(name);
    return it == by_name.end() ? nullptr : &it->second;
}

void Gradients::add_scaled(const Gradients& other, double scale) {
    for (const auto& [name, tensor] : other.by_name) {
        Tensor& mine = accumulate(name, tensor.shape());
        for (std::size_t i = 0; i < tensor.size(); ++i) {
            mine[i] += scale * tensor[i];
        }
    }
}

void Gradients::scale(double factor) {
    for (auto& [name, tensor] : by_name) {
        for (std::size_t i = 0; i < tensor.size(); ++i) {
            tensor[i] *= factor;
        }
    }
}

double dot(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += a[i] * b[i];
    }
    return acc;
}

double l2_distance(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

}  // namespace wuglab

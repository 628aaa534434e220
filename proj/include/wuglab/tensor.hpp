#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace wuglab {

// Dense row-major array of 64-bit floats. Rank 1 or 2 in practice.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> shape);

    static Tensor zeros(std::vector<std::size_t> shape) { return Tensor(std::move(shape)); }
    static Tensor of(std::vector<double> values);  // rank-1

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t size() const { return data_.size(); }
    std::size_t rows() const { return shape_.empty() ? 0 : shape_[0]; }
    std::size_t cols() const { return shape_.size() < 2 ? 1 : shape_[1]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }
    double& at(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
    double at(std::size_t i, std::size_t j) const { return data_[i * shape_[1] + j]; }

    double* row(std::size_t i) { return data_.data() + i * shape_[1]; }
    const double* row(std::size_t i) const { return data_.data() + i * shape_[1]; }

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
    bool all_finite() const;
    void fill(double v);

    bool operator==(const Tensor&) const = default;

private:
    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

// Named gradient accumulator; keys mirror parameter names, shapes match.
struct Gradients {
    std::map<std::string, Tensor> by_name;

    // Returns the gradient tensor for `name`, creating zeros of `shape` on
    // first touch.
    Tensor& accumulate(const std::string& name, const std::vector<std::size_t>& shape);
    const Tensor* find(const std::string& name) const;
    void add_scaled(const Gradients& other, double scale);
    void scale(double factor);
};

using NamedTensors = std::map<std::string, Tensor>;

double dot(const double* a, const double* b, std::size_t n);
double l2_distance(const double* a, const double* b, std::size_t n);

}  // namespace wuglab

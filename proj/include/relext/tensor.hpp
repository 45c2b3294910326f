#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace relext {

class ShapeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Dense row-major array of doubles.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0);
    Tensor(std::vector<std::size_t> shape, std::vector<double> values);

    static Tensor vector(std::vector<double> values);
    static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    /// Leading dimension, and the product of the rest.
    std::size_t rows() const { return shape_.empty() ? 0 : shape_[0]; }
    std::size_t cols() const { return rows() == 0 ? 0 : data_.size() / rows(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::span<double> values() { return data_; }
    std::span<const double> values() const { return data_; }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }
    double& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
    double at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }
    std::span<double> row(std::size_t r) { return {data_.data() + r * cols(), cols()}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols(), cols()}; }

    void fill(double v);
    void zero() { fill(0.0); }
    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
    bool all_finite() const;
    /// Throws ShapeError naming `what` if any value is NaN or infinite.
    void check_finite(const std::string& what) const;

    bool operator==(const Tensor& other) const = default;

private:
    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

std::string shape_string(const std::vector<std::size_t>& shape);

}  // namespace relext

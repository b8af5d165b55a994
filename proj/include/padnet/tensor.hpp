#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace padnet {

/// Raised for inconsistent shapes, bad hyperparameters and invalid configs.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised for API misuse (e.g. backward from a non-scalar node).
class UsageError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Raised for malformed data (labels out of range, corrupt files).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Shape {
    std::size_t n = 0;
    std::size_t c = 0;
    std::size_t h = 0;
    std::size_t w = 0;

    [[nodiscard]] std::size_t numel() const { return n * c * h * w; }
    [[nodiscard]] std::size_t plane() const { return h * w; }
    [[nodiscard]] std::string str() const;

    friend bool operator==(const Shape&, const Shape&) = default;
};

/// Dense NCHW array of doubles. Value type; copies are deep.
class Tensor4 {
public:
    Tensor4() = default;
    explicit Tensor4(Shape shape, double fill = 0.0);
    Tensor4(Shape shape, std::vector<double> data);

    static Tensor4 zeros(Shape s) { return Tensor4(s, 0.0); }
    static Tensor4 scalar(double v) { return Tensor4(Shape{1, 1, 1, 1}, v); }

    [[nodiscard]] const Shape& shape() const { return shape_; }
    [[nodiscard]] std::size_t size() const { return data_.size(); }
    [[nodiscard]] bool empty() const { return data_.empty(); }

    [[nodiscard]] std::span<double> data() { return data_; }
    [[nodiscard]] std::span<const double> data() const { return data_; }
    [[nodiscard]] std::vector<double>& storage() { return data_; }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    double& at(std::size_t n, std::size_t c, std::size_t y, std::size_t x) {
        return data_[index(n, c, y, x)];
    }
    [[nodiscard]] double at(std::size_t n, std::size_t c, std::size_t y, std::size_t x) const {
        return data_[index(n, c, y, x)];
    }
    double* ptr(std::size_t n, std::size_t c = 0, std::size_t y = 0, std::size_t x = 0) {
        return data_.data() + index(n, c, y, x);
    }
    [[nodiscard]] const double* ptr(std::size_t n, std::size_t c = 0, std::size_t y = 0, std::size_t x = 0) const {
        return data_.data() + index(n, c, y, x);
    }
    [[nodiscard]] std::size_t index(std::size_t n, std::size_t c, std::size_t y, std::size_t x) const {
        return ((n * shape_.c + c) * shape_.h + y) * shape_.w + x;
    }

    /// Single value of a 1x1x1x1 tensor.
    [[nodiscard]] double item() const;

    void fill(double v);
    Tensor4& operator+=(const Tensor4& other);
    [[nodiscard]] bool all_finite() const;

    friend bool operator==(const Tensor4&, const Tensor4&) = default;

private:
    Shape shape_{};
    std::vector<double> data_;
};

[[nodiscard]] double dot(const Tensor4& a, const Tensor4& b);
[[nodiscard]] double max_abs(const Tensor4& t);
[[nodiscard]] double max_abs_diff(const Tensor4& a, const Tensor4& b);

}  // namespace padnet

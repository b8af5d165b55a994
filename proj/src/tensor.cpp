#include "padnet/tensor.hpp"

#include <algorithm>
#include <cmath>

namespace padnet {

std::string Shape::str() const {
    return std::to_string(n) + "x" + std::to_string(c) + "x" + std::to_string(h) + "x" +
           std::to_string(w);
}

Tensor4::Tensor4(Shape shape, double fill) : shape_(shape), data_(shape.numel(), fill) {}

Tensor4::Tensor4(Shape shape, std::vector<double> data) : shape_(shape), data_(std::move(data)) {
    if (data_.size() != shape_.numel()) {
        throw ConfigError("tensor data length " + std::to_string(data_.size()) +
                          " does not match shape " + shape_.str());
    }
}

double Tensor4::item() const {
    if (data_.size() != 1) {
        throw UsageError("item() on tensor of shape " + shape_.str());
    }
    return data_[0];
}

void Tensor4::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

Tensor4& Tensor4::operator+=(const Tensor4& other) {
    if (other.shape_ != shape_) {
        throw ConfigError("cannot add " + other.shape_.str() + " into " + shape_.str());
    }
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

bool Tensor4::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

double dot(const Tensor4& a, const Tensor4& b) {
    if (a.shape() != b.shape()) {
        throw ConfigError("dot of " + a.shape().str() + " and " + b.shape().str());
    }
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double max_abs(const Tensor4& t) {
    double m = 0.0;
    for (double v : t.data()) m = std::max(m, std::abs(v));
    return m;
}

double max_abs_diff(const Tensor4& a, const Tensor4& b) {
    if (a.shape() != b.shape()) {
        throw ConfigError("diff of " + a.shape().str() + " and " + b.shape().str());
    }
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace padnet

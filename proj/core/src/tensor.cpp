#include "segforge/tensor.hpp"

#include <cmath>
#include <sstream>

#include "segforge/error.hpp"

namespace segforge {

int64_t shape_numel(const Shape& shape) {
    int64_t n = 1;
    for (int64_t e : shape) {
        if (e < 0) throw ShapeError("negative extent in shape " + shape_str(shape));
        n *= e;
    }
    return n;
}

bool same_shape(const Shape& a, const Shape& b) { return a == b; }

std::string shape_str(const Shape& shape) {
    std::ostringstream os;
    os << "(";
    for (size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ",";
        os << shape[i];
    }
    os << ")";
    return os.str();
}

namespace {
std::shared_ptr<detail::TensorImpl> make_impl(Shape shape, std::vector<double> data, bool requires_grad) {
    auto impl = std::make_shared<detail::TensorImpl>();
    impl->shape = std::move(shape);
    impl->data = std::move(data);
    impl->requires_grad = requires_grad;
    return impl;
}
} // namespace

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
    const int64_t n = shape_numel(shape);
    return Tensor(make_impl(std::move(shape), std::vector<double>(static_cast<size_t>(n), 0.0), requires_grad));
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
    const int64_t n = shape_numel(shape);
    return Tensor(make_impl(std::move(shape), std::vector<double>(static_cast<size_t>(n), value), requires_grad));
}

Tensor Tensor::from_data(Shape shape, std::vector<double> data, bool requires_grad) {
    const int64_t n = shape_numel(shape);
    if (n != static_cast<int64_t>(data.size())) {
        throw ShapeError("data length " + std::to_string(data.size()) + " does not match shape " + shape_str(shape));
    }
    return Tensor(make_impl(std::move(shape), std::move(data), requires_grad));
}

Tensor Tensor::scalar(double value) { return from_data({1}, {value}); }

double Tensor::value() const {
    if (numel() != 1) throw ShapeError("value() requires a single-element tensor, got " + shape_str(shape()));
    return impl_->data[0];
}

namespace {
int64_t flat_index(const Shape& shape, std::initializer_list<int64_t> index) {
    if (index.size() != shape.size()) throw ShapeError("index rank mismatch");
    int64_t flat = 0;
    size_t d = 0;
    for (int64_t i : index) {
        if (i < 0 || i >= shape[d]) throw ShapeError("index out of range on axis " + std::to_string(d));
        flat = flat * shape[d] + i;
        ++d;
    }
    return flat;
}
} // namespace

double Tensor::at(std::initializer_list<int64_t> index) const {
    return impl_->data[static_cast<size_t>(flat_index(impl_->shape, index))];
}

double& Tensor::at_mut(std::initializer_list<int64_t> index) {
    return impl_->data[static_cast<size_t>(flat_index(impl_->shape, index))];
}

std::span<double> Tensor::grad() {
    if (impl_->grad.empty()) impl_->grad.assign(impl_->data.size(), 0.0);
    return impl_->grad;
}

std::span<const double> Tensor::grad() const {
    if (impl_->grad.empty()) {
        static const std::vector<double> empty;
        return empty;
    }
    return impl_->grad;
}

void Tensor::zero_grad() {
    if (!impl_->grad.empty()) impl_->grad.assign(impl_->data.size(), 0.0);
}

Tensor Tensor::clone() const {
    return from_data(impl_->shape, impl_->data, impl_->requires_grad);
}

bool Tensor::all_finite() const {
    for (double v : impl_->data) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

} // namespace segforge

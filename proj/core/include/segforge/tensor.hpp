#pragma once

#include <cstdint>
#include <initializer_list>
#include <memory>
#include <span>
#include <vector>

namespace segforge {

/// Extents of a dense row-major tensor. 4-D image data is ordered (N, C, H, W).
using Shape = std::vector<int64_t>;

int64_t shape_numel(const Shape& shape);
bool same_shape(const Shape& a, const Shape& b);
std::string shape_str(const Shape& shape);

namespace detail {
struct TensorImpl {
    Shape shape;
    std::vector<double> data;
    bool requires_grad = false;
    std::vector<double> grad; // empty until first accumulation
};
} // namespace detail

/// Dense 64-bit float tensor. Cheap shared handle; the differentiation graph
/// keys tensors by the identity of the underlying buffer.
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(Shape shape, bool requires_grad = false);
    static Tensor full(Shape shape, double value, bool requires_grad = false);
    static Tensor from_data(Shape shape, std::vector<double> data, bool requires_grad = false);
    static Tensor scalar(double value);

    bool defined() const { return impl_ != nullptr; }
    const Shape& shape() const { return impl_->shape; }
    int64_t dim(size_t axis) const { return impl_->shape.at(axis); }
    int64_t rank() const { return static_cast<int64_t>(impl_->shape.size()); }
    int64_t numel() const { return static_cast<int64_t>(impl_->data.size()); }

    std::span<double> data() { return impl_->data; }
    std::span<const double> data() const { return impl_->data; }

    /// Value of a single-element tensor.
    double value() const;
    /// Element access by multi-index; intended for tests and small code paths.
    double at(std::initializer_list<int64_t> index) const;
    double& at_mut(std::initializer_list<int64_t> index);

    bool requires_grad() const { return impl_->requires_grad; }
    void set_requires_grad(bool v) { impl_->requires_grad = v; }

    bool has_grad() const { return !impl_->grad.empty(); }
    /// Gradient buffer, allocated (zero-filled) on first use.
    std::span<double> grad();
    std::span<const double> grad() const;
    void zero_grad();

    /// Deep copy of values (fresh buffer, grad not copied).
    Tensor clone() const;

    /// True when every element is finite.
    bool all_finite() const;

    const detail::TensorImpl* impl() const { return impl_.get(); }
    detail::TensorImpl* impl() { return impl_.get(); }

private:
    explicit Tensor(std::shared_ptr<detail::TensorImpl> impl) : impl_(std::move(impl)) {}
    std::shared_ptr<detail::TensorImpl> impl_;
};

} // namespace segforge

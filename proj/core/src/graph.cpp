#include "segforge/graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "kernels.hpp"
#include "segforge/error.hpp"

namespace segforge {

std::string_view op_name(OpTag tag) {
    switch (tag) {
        case OpTag::leaf: return "leaf";
        case OpTag::add: return "add";
        case OpTag::sub: return "sub";
        case OpTag::mul: return "mul";
        case OpTag::div: return "div";
        case OpTag::neg: return "neg";
        case OpTag::log: return "log";
        case OpTag::exp: return "exp";
        case OpTag::relu: return "relu";
        case OpTag::clamp_min: return "clamp_min";
        case OpTag::reduce_sum: return "reduce_sum";
        case OpTag::reduce_mean: return "reduce_mean";
        case OpTag::softmax_channels: return "softmax_channels";
        case OpTag::conv2d: return "conv2d";
        case OpTag::conv2d_transpose: return "conv2d_transpose";
        case OpTag::maxpool2d: return "maxpool2d";
        case OpTag::concat_channels: return "concat_channels";
    }
    return "?";
}

int32_t Graph::push_node(Node node) {
    const int32_t id = static_cast<int32_t>(nodes_.size());
    for (int32_t in : node.inputs) {
        if (in < 0 || in >= id) throw std::logic_error("graph: node input does not precede node");
    }
    ids_.emplace(node.value.impl(), id);
    nodes_.push_back(std::move(node));
    return id;
}

int32_t Graph::ensure_node(const Tensor& t) {
    if (!t.defined()) throw ShapeError("undefined tensor passed to graph op");
    auto it = ids_.find(t.impl());
    if (it != ids_.end()) return it->second;
    Node n;
    n.tag = OpTag::leaf;
    n.value = t;
    return push_node(std::move(n));
}

Tensor Graph::leaf(const Tensor& t) {
    ensure_node(t);
    return t;
}

Tensor Graph::constant(Shape shape, std::vector<double> data) {
    Tensor t = Tensor::from_data(std::move(shape), std::move(data));
    return leaf(t);
}

Tensor Graph::scalar(double v) { return constant({1}, {v}); }

namespace {
struct BinaryShapes {
    bool a_scalar = false;
    bool b_scalar = false;
};

BinaryShapes check_binary(const Tensor& a, const Tensor& b, const char* op) {
    BinaryShapes s;
    if (same_shape(a.shape(), b.shape())) return s;
    s.a_scalar = a.numel() == 1;
    s.b_scalar = b.numel() == 1;
    if (!s.a_scalar && !s.b_scalar) {
        throw ShapeError(std::string(op) + ": shapes " + shape_str(a.shape()) + " and " +
                         shape_str(b.shape()) + " are not broadcastable (scalar broadcast only)");
    }
    return s;
}
} // namespace

Tensor Graph::binary_op(OpTag tag, const Tensor& a, const Tensor& b) {
    const BinaryShapes bs = check_binary(a, b, std::string(op_name(tag)).c_str());
    const int32_t ia = ensure_node(a);
    const int32_t ib = ensure_node(b);
    const Tensor& big = bs.a_scalar ? b : a;
    Tensor out = Tensor::zeros(big.shape());
    const int64_t n = out.numel();
    const double* pa = a.data().data();
    const double* pb = b.data().data();
    double* po = out.data().data();
    const int64_t sa = bs.a_scalar && n > 1 ? 0 : 1;
    const int64_t sb = bs.b_scalar && n > 1 ? 0 : 1;
    switch (tag) {
        case OpTag::add:
            for (int64_t i = 0; i < n; ++i) po[i] = pa[i * sa] + pb[i * sb];
            break;
        case OpTag::sub:
            for (int64_t i = 0; i < n; ++i) po[i] = pa[i * sa] - pb[i * sb];
            break;
        case OpTag::mul:
            for (int64_t i = 0; i < n; ++i) po[i] = pa[i * sa] * pb[i * sb];
            break;
        case OpTag::div:
            for (int64_t i = 0; i < n; ++i) {
                if (pb[i * sb] == 0.0) throw NumericError("div: zero denominator (apply an epsilon guard)");
                po[i] = pa[i * sa] / pb[i * sb];
            }
            break;
        default:
            throw std::logic_error("binary_op: bad tag");
    }
    Node node;
    node.tag = tag;
    node.inputs = {ia, ib};
    node.value = out;
    push_node(std::move(node));
    return out;
}

Tensor Graph::add(const Tensor& a, const Tensor& b) { return binary_op(OpTag::add, a, b); }
Tensor Graph::sub(const Tensor& a, const Tensor& b) { return binary_op(OpTag::sub, a, b); }
Tensor Graph::mul(const Tensor& a, const Tensor& b) { return binary_op(OpTag::mul, a, b); }
Tensor Graph::div(const Tensor& a, const Tensor& b) { return binary_op(OpTag::div, a, b); }

Tensor Graph::unary_op(OpTag tag, const Tensor& a, double dattr) {
    const int32_t ia = ensure_node(a);
    Tensor out = Tensor::zeros(a.shape());
    const int64_t n = a.numel();
    const double* pa = a.data().data();
    double* po = out.data().data();
    switch (tag) {
        case OpTag::neg:
            for (int64_t i = 0; i < n; ++i) po[i] = -pa[i];
            break;
        case OpTag::log:
            for (int64_t i = 0; i < n; ++i) {
                if (!(pa[i] > 0.0)) {
                    throw NumericError("log of non-positive value " + std::to_string(pa[i]) +
                                       " (guard inputs with clamp_min)");
                }
                po[i] = std::log(pa[i]);
            }
            break;
        case OpTag::exp:
            for (int64_t i = 0; i < n; ++i) {
                po[i] = std::exp(pa[i]);
                if (!std::isfinite(po[i])) throw NumericError("exp overflowed to non-finite value");
            }
            break;
        case OpTag::relu:
            for (int64_t i = 0; i < n; ++i) po[i] = pa[i] > 0.0 ? pa[i] : 0.0;
            break;
        case OpTag::clamp_min:
            for (int64_t i = 0; i < n; ++i) po[i] = pa[i] > dattr ? pa[i] : dattr;
            break;
        default:
            throw std::logic_error("unary_op: bad tag");
    }
    Node node;
    node.tag = tag;
    node.inputs = {ia};
    node.value = out;
    node.dattr = dattr;
    push_node(std::move(node));
    return out;
}

Tensor Graph::neg(const Tensor& a) { return unary_op(OpTag::neg, a); }
Tensor Graph::log(const Tensor& a) { return unary_op(OpTag::log, a); }
Tensor Graph::exp(const Tensor& a) { return unary_op(OpTag::exp, a); }
Tensor Graph::relu(const Tensor& a) { return unary_op(OpTag::relu, a); }

Tensor Graph::clamp_min(const Tensor& a, double floor) {
    if (!(floor > 0.0)) throw ShapeError("clamp_min: floor must be > 0");
    return unary_op(OpTag::clamp_min, a, floor);
}

namespace {
/// Output shape of a reduction plus the reduced element count.
struct ReducePlan {
    Shape out_shape;
    std::vector<bool> reduced;
    int64_t count = 1;
};

ReducePlan make_reduce_plan(const Shape& shape, const std::vector<int32_t>& axes) {
    ReducePlan plan;
    plan.reduced.assign(shape.size(), false);
    for (int32_t ax : axes) {
        if (ax < 0 || static_cast<size_t>(ax) >= shape.size()) {
            throw ShapeError("reduce: axis " + std::to_string(ax) + " invalid for shape " + shape_str(shape));
        }
        if (plan.reduced[static_cast<size_t>(ax)]) throw ShapeError("reduce: duplicate axis");
        plan.reduced[static_cast<size_t>(ax)] = true;
    }
    for (size_t d = 0; d < shape.size(); ++d) {
        if (plan.reduced[d]) {
            plan.count *= shape[d];
        } else {
            plan.out_shape.push_back(shape[d]);
        }
    }
    if (plan.count == 0) throw ShapeError("reduce: empty axis extent");
    return plan;
}

/// Maps input flat index -> output flat index under a reduce plan.
int64_t reduce_out_index(int64_t flat, const Shape& in_shape, const std::vector<bool>& reduced) {
    int64_t out = 0;
    // decompose in row-major order (most significant axis first)
    for (size_t d = 0; d < in_shape.size(); ++d) {
        int64_t stride = 1;
        for (size_t e = d + 1; e < in_shape.size(); ++e) stride *= in_shape[e];
        const int64_t coord = (flat / stride) % in_shape[d];
        if (!reduced[d]) {
            out = out * in_shape[d] + coord;
        }
        (void)coord;
    }
    return out;
}
} // namespace

Tensor Graph::reduce_op(OpTag tag, const Tensor& a, std::vector<int32_t> axes) {
    const int32_t ia = ensure_node(a);
    ReducePlan plan = make_reduce_plan(a.shape(), axes);
    Tensor out = Tensor::zeros(plan.out_shape);
    const double* pa = a.data().data();
    double* po = out.data().data();
    const int64_t n = a.numel();
    const Shape& in_shape = a.shape();
    // Precompute per-axis strides once; accumulate with an incremental counter.
    std::vector<int64_t> coords(in_shape.size(), 0);
    std::vector<int64_t> out_strides(in_shape.size(), 0);
    {
        int64_t os = 1;
        for (size_t d = in_shape.size(); d-- > 0;) {
            if (!plan.reduced[d]) {
                out_strides[d] = os;
                os *= in_shape[d];
            }
        }
    }
    int64_t out_idx = 0;
    for (int64_t i = 0; i < n; ++i) {
        po[out_idx] += pa[i];
        // increment odometer
        for (size_t d = in_shape.size(); d-- > 0;) {
            coords[d]++;
            out_idx += out_strides[d];
            if (coords[d] < in_shape[d]) break;
            out_idx -= out_strides[d] * in_shape[d];
            coords[d] = 0;
        }
    }
    if (tag == OpTag::reduce_mean) {
        const double c = static_cast<double>(plan.count);
        for (int64_t i = 0; i < out.numel(); ++i) po[i] /= c;
    }
    Node node;
    node.tag = tag;
    node.inputs = {ia};
    node.value = out;
    node.axes = std::move(axes);
    push_node(std::move(node));
    return out;
}

Tensor Graph::reduce_sum(const Tensor& a, std::vector<int32_t> axes) {
    return reduce_op(OpTag::reduce_sum, a, std::move(axes));
}

Tensor Graph::reduce_mean(const Tensor& a, std::vector<int32_t> axes) {
    return reduce_op(OpTag::reduce_mean, a, std::move(axes));
}

namespace {
std::vector<int32_t> all_axes(const Tensor& t) {
    std::vector<int32_t> axes(static_cast<size_t>(t.rank()));
    for (size_t i = 0; i < axes.size(); ++i) axes[i] = static_cast<int32_t>(i);
    return axes;
}
} // namespace

Tensor Graph::sum_all(const Tensor& a) { return reduce_sum(a, all_axes(a)); }
Tensor Graph::mean_all(const Tensor& a) { return reduce_mean(a, all_axes(a)); }

Tensor Graph::softmax_channels(const Tensor& logits) {
    if (logits.rank() != 4) throw ShapeError("softmax_channels: input must be 4-D (N,C,H,W)");
    const int32_t ia = ensure_node(logits);
    Tensor out = Tensor::zeros(logits.shape());
    kernels::softmax_channels_forward(logits.data().data(), out.data().data(),
                                      logits.dim(0), logits.dim(1), logits.dim(2) * logits.dim(3));
    Node node;
    node.tag = OpTag::softmax_channels;
    node.inputs = {ia};
    node.value = out;
    push_node(std::move(node));
    return out;
}

Tensor Graph::conv2d(const Tensor& input, const Tensor& kernel, const Tensor& bias,
                     int stride, int padding) {
    const auto d = kernels::conv2d_dims(input.shape(), kernel.shape(), stride, padding);
    if (bias.rank() != 1 || bias.dim(0) != d.cout) {
        throw ShapeError("conv2d: bias must be 1-D with Cout elements");
    }
    const int32_t ii = ensure_node(input);
    const int32_t ik = ensure_node(kernel);
    const int32_t ib = ensure_node(bias);
    Tensor out = Tensor::zeros({d.n, d.cout, d.hout, d.wout});
    kernels::conv2d_forward(input.data().data(), kernel.data().data(), bias.data().data(),
                            out.data().data(), d);
    Node node;
    node.tag = OpTag::conv2d;
    node.inputs = {ii, ik, ib};
    node.value = out;
    node.stride = stride;
    node.padding = padding;
    push_node(std::move(node));
    return out;
}

Tensor Graph::conv2d_transpose(const Tensor& input, const Tensor& kernel, const Tensor& bias,
                               int stride, int padding) {
    const auto d = kernels::convt2d_dims(input.shape(), kernel.shape(), stride, padding);
    if (bias.rank() != 1 || bias.dim(0) != d.cout) {
        throw ShapeError("conv2d_transpose: bias must be 1-D with Cout elements");
    }
    const int32_t ii = ensure_node(input);
    const int32_t ik = ensure_node(kernel);
    const int32_t ib = ensure_node(bias);
    Tensor out = Tensor::zeros({d.n, d.cout, d.hout, d.wout});
    kernels::convt2d_forward(input.data().data(), kernel.data().data(), bias.data().data(),
                             out.data().data(), d);
    Node node;
    node.tag = OpTag::conv2d_transpose;
    node.inputs = {ii, ik, ib};
    node.value = out;
    node.stride = stride;
    node.padding = padding;
    push_node(std::move(node));
    return out;
}

Tensor Graph::maxpool2d(const Tensor& input, int window, int stride) {
    const auto d = kernels::maxpool2d_dims(input.shape(), window, stride);
    const int32_t ii = ensure_node(input);
    Tensor out = Tensor::zeros({d.n, d.c, d.hout, d.wout});
    std::vector<int64_t> argmax(static_cast<size_t>(out.numel()));
    kernels::maxpool2d_forward(input.data().data(), out.data().data(), argmax.data(), d);
    Node node;
    node.tag = OpTag::maxpool2d;
    node.inputs = {ii};
    node.value = out;
    node.window = window;
    node.stride = stride;
    node.argmax = std::move(argmax);
    push_node(std::move(node));
    return out;
}

Tensor Graph::concat_channels(const Tensor& a, const Tensor& b) {
    if (a.rank() != 4 || b.rank() != 4) throw ShapeError("concat_channels: inputs must be 4-D");
    if (a.dim(0) != b.dim(0) || a.dim(2) != b.dim(2) || a.dim(3) != b.dim(3)) {
        throw ShapeError("concat_channels: non-channel extents differ: " + shape_str(a.shape()) +
                         " vs " + shape_str(b.shape()));
    }
    const int32_t ia = ensure_node(a);
    const int32_t ib = ensure_node(b);
    const int64_t n = a.dim(0), ca = a.dim(1), cb = b.dim(1), hw = a.dim(2) * a.dim(3);
    Tensor out = Tensor::zeros({n, ca + cb, a.dim(2), a.dim(3)});
    const double* pa = a.data().data();
    const double* pb = b.data().data();
    double* po = out.data().data();
    for (int64_t i = 0; i < n; ++i) {
        std::copy(pa + i * ca * hw, pa + (i + 1) * ca * hw, po + i * (ca + cb) * hw);
        std::copy(pb + i * cb * hw, pb + (i + 1) * cb * hw, po + i * (ca + cb) * hw + ca * hw);
    }
    Node node;
    node.tag = OpTag::concat_channels;
    node.inputs = {ia, ib};
    node.value = out;
    push_node(std::move(node));
    return out;
}

std::vector<double>& Graph::grad_buffer(int32_t id) {
    auto& buf = grads_[static_cast<size_t>(id)];
    if (buf.empty()) buf.assign(static_cast<size_t>(nodes_[static_cast<size_t>(id)].value.numel()), 0.0);
    return buf;
}

void Graph::accumulate(int32_t id, const double* src, int64_t n, double scale) {
    auto& buf = grad_buffer(id);
    if (scale == 1.0) {
        for (int64_t i = 0; i < n; ++i) buf[static_cast<size_t>(i)] += src[i];
    } else {
        for (int64_t i = 0; i < n; ++i) buf[static_cast<size_t>(i)] += scale * src[i];
    }
}

void Graph::node_backward(const Node& node, const std::vector<double>& gout) {
    switch (node.tag) {
        case OpTag::leaf:
            return;
        case OpTag::add:
        case OpTag::sub:
        case OpTag::mul:
        case OpTag::div: {
            const Node& na = nodes_[static_cast<size_t>(node.inputs[0])];
            const Node& nb = nodes_[static_cast<size_t>(node.inputs[1])];
            const int64_t n = node.value.numel();
            const bool a_scalar = na.value.numel() == 1 && n > 1;
            const bool b_scalar = nb.value.numel() == 1 && n > 1;
            const double* pa = na.value.data().data();
            const double* pb = nb.value.data().data();
            const int64_t sa = a_scalar ? 0 : 1;
            const int64_t sb = b_scalar ? 0 : 1;
            auto& ga = grad_buffer(node.inputs[0]);
            auto& gb = grad_buffer(node.inputs[1]);
            for (int64_t i = 0; i < n; ++i) {
                const double g = gout[static_cast<size_t>(i)];
                double da = 0.0, db = 0.0;
                switch (node.tag) {
                    case OpTag::add: da = g; db = g; break;
                    case OpTag::sub: da = g; db = -g; break;
                    case OpTag::mul: da = g * pb[i * sb]; db = g * pa[i * sa]; break;
                    case OpTag::div: {
                        const double bv = pb[i * sb];
                        da = g / bv;
                        db = -g * pa[i * sa] / (bv * bv);
                        break;
                    }
                    default: break;
                }
                ga[static_cast<size_t>(a_scalar ? 0 : i)] += da;
                gb[static_cast<size_t>(b_scalar ? 0 : i)] += db;
            }
            return;
        }
        case OpTag::neg: {
            accumulate(node.inputs[0], gout.data(), node.value.numel(), -1.0);
            return;
        }
        case OpTag::log: {
            const Node& na = nodes_[static_cast<size_t>(node.inputs[0])];
            const double* pa = na.value.data().data();
            auto& ga = grad_buffer(node.inputs[0]);
            for (int64_t i = 0; i < node.value.numel(); ++i) {
                ga[static_cast<size_t>(i)] += gout[static_cast<size_t>(i)] / pa[i];
            }
            return;
        }
        case OpTag::exp: {
            const double* py = node.value.data().data();
            auto& ga = grad_buffer(node.inputs[0]);
            for (int64_t i = 0; i < node.value.numel(); ++i) {
                ga[static_cast<size_t>(i)] += gout[static_cast<size_t>(i)] * py[i];
            }
            return;
        }
        case OpTag::relu: {
            const Node& na = nodes_[static_cast<size_t>(node.inputs[0])];
            const double* pa = na.value.data().data();
            auto& ga = grad_buffer(node.inputs[0]);
            for (int64_t i = 0; i < node.value.numel(); ++i) {
                if (pa[i] > 0.0) ga[static_cast<size_t>(i)] += gout[static_cast<size_t>(i)];
            }
            return;
        }
        case OpTag::clamp_min: {
            const Node& na = nodes_[static_cast<size_t>(node.inputs[0])];
            const double* pa = na.value.data().data();
            auto& ga = grad_buffer(node.inputs[0]);
            for (int64_t i = 0; i < node.value.numel(); ++i) {
                if (pa[i] > node.dattr) ga[static_cast<size_t>(i)] += gout[static_cast<size_t>(i)];
            }
            return;
        }
        case OpTag::reduce_sum:
        case OpTag::reduce_mean: {
            const Node& na = nodes_[static_cast<size_t>(node.inputs[0])];
            const Shape& in_shape = na.value.shape();
            ReducePlan plan = make_reduce_plan(in_shape, node.axes);
            const double scale = node.tag == OpTag::reduce_mean ? 1.0 / static_cast<double>(plan.count) : 1.0;
            auto& ga = grad_buffer(node.inputs[0]);
            std::vector<int64_t> coords(in_shape.size(), 0);
            std::vector<int64_t> out_strides(in_shape.size(), 0);
            int64_t os = 1;
            for (size_t d = in_shape.size(); d-- > 0;) {
                if (!plan.reduced[d]) {
                    out_strides[d] = os;
                    os *= in_shape[d];
                }
            }
            int64_t out_idx = 0;
            const int64_t n = na.value.numel();
            for (int64_t i = 0; i < n; ++i) {
                ga[static_cast<size_t>(i)] += scale * gout[static_cast<size_t>(out_idx)];
                for (size_t d = in_shape.size(); d-- > 0;) {
                    coords[d]++;
                    out_idx += out_strides[d];
                    if (coords[d] < in_shape[d]) break;
                    out_idx -= out_strides[d] * in_shape[d];
                    coords[d] = 0;
                }
            }
            return;
        }
        case OpTag::softmax_channels: {
            const Tensor& y = node.value;
            auto& ga = grad_buffer(node.inputs[0]);
            kernels::softmax_channels_backward(y.data().data(), gout.data(), ga.data(),
                                               y.dim(0), y.dim(1), y.dim(2) * y.dim(3));
            return;
        }
        case OpTag::conv2d: {
            const Node& ni = nodes_[static_cast<size_t>(node.inputs[0])];
            const Node& nk = nodes_[static_cast<size_t>(node.inputs[1])];
            const auto d = kernels::conv2d_dims(ni.value.shape(), nk.value.shape(), node.stride, node.padding);
            auto& gi = grad_buffer(node.inputs[0]);
            auto& gk = grad_buffer(node.inputs[1]);
            auto& gb = grad_buffer(node.inputs[2]);
            kernels::conv2d_backward(ni.value.data().data(), nk.value.data().data(), gout.data(),
                                     gi.data(), gk.data(), gb.data(), d);
            return;
        }
        case OpTag::conv2d_transpose: {
            const Node& ni = nodes_[static_cast<size_t>(node.inputs[0])];
            const Node& nk = nodes_[static_cast<size_t>(node.inputs[1])];
            const auto d = kernels::convt2d_dims(ni.value.shape(), nk.value.shape(), node.stride, node.padding);
            auto& gi = grad_buffer(node.inputs[0]);
            auto& gk = grad_buffer(node.inputs[1]);
            auto& gb = grad_buffer(node.inputs[2]);
            kernels::convt2d_backward(ni.value.data().data(), nk.value.data().data(), gout.data(),
                                      gi.data(), gk.data(), gb.data(), d);
            return;
        }
        case OpTag::maxpool2d: {
            auto& gi = grad_buffer(node.inputs[0]);
            for (int64_t i = 0; i < node.value.numel(); ++i) {
                gi[static_cast<size_t>(node.argmax[static_cast<size_t>(i)])] += gout[static_cast<size_t>(i)];
            }
            return;
        }
        case OpTag::concat_channels: {
            const Node& na = nodes_[static_cast<size_t>(node.inputs[0])];
            const Node& nb = nodes_[static_cast<size_t>(node.inputs[1])];
            const int64_t n = node.value.dim(0);
            const int64_t ca = na.value.dim(1), cb = nb.value.dim(1);
            const int64_t hw = node.value.dim(2) * node.value.dim(3);
            auto& ga = grad_buffer(node.inputs[0]);
            auto& gb = grad_buffer(node.inputs[1]);
            for (int64_t i = 0; i < n; ++i) {
                const double* g = gout.data() + i * (ca + cb) * hw;
                for (int64_t j = 0; j < ca * hw; ++j) ga[static_cast<size_t>(i * ca * hw + j)] += g[j];
                for (int64_t j = 0; j < cb * hw; ++j) gb[static_cast<size_t>(i * cb * hw + j)] += g[ca * hw + j];
            }
            return;
        }
    }
}

const GradientMap& Graph::backward(const Tensor& loss, bool write_leaf_grads) {
    const int32_t id = id_of(loss);
    if (id < 0) throw ShapeError("backward: loss tensor does not belong to this graph");
    if (loss.numel() != 1) throw ShapeError("backward: loss must be a scalar, got " + shape_str(loss.shape()));
    grads_.assign(nodes_.size(), {});
    grads_[static_cast<size_t>(id)] = {1.0};
    for (int32_t i = id; i >= 0; --i) {
        const auto& g = grads_[static_cast<size_t>(i)];
        if (g.empty()) continue;
        node_backward(nodes_[static_cast<size_t>(i)], g);
    }
    if (write_leaf_grads) {
        for (size_t i = 0; i < nodes_.size(); ++i) {
            Node& n = nodes_[i];
            if (n.tag != OpTag::leaf || !n.value.requires_grad()) continue;
            const auto& g = grads_[i];
            if (g.empty()) continue;
            auto dst = n.value.grad();
            for (size_t j = 0; j < g.size(); ++j) dst[j] += g[j];
        }
    }
    return grads_;
}

const std::vector<double>* Graph::grad_of(const Tensor& t) const {
    const int32_t id = id_of(t);
    if (id < 0 || static_cast<size_t>(id) >= grads_.size()) return nullptr;
    const auto& g = grads_[static_cast<size_t>(id)];
    return g.empty() ? nullptr : &g;
}

NodeInfo Graph::info(int32_t id) const {
    const Node& n = nodes_.at(static_cast<size_t>(id));
    NodeInfo info;
    info.tag = n.tag;
    info.inputs = n.inputs;
    info.shape = n.value.shape();
    info.stride = n.stride;
    info.padding = n.padding;
    info.window = n.window;
    return info;
}

int32_t Graph::id_of(const Tensor& t) const {
    auto it = ids_.find(t.impl());
    return it == ids_.end() ? -1 : it->second;
}

} // namespace segforge

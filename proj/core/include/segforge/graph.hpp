#pragma once

#include <cstdint>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "segforge/tensor.hpp"

namespace segforge {

enum class OpTag : uint8_t {
    leaf,
    add,
    sub,
    mul,
    div,
    neg,
    log,
    exp,
    relu,
    clamp_min,
    reduce_sum,
    reduce_mean,
    softmax_channels,
    conv2d,
    conv2d_transpose,
    maxpool2d,
    concat_channels,
};

std::string_view op_name(OpTag tag);

/// Introspection view of one recorded node (used by tests and the FLOP
/// accounting oracle).
struct NodeInfo {
    OpTag tag;
    std::vector<int32_t> inputs;
    Shape shape;
    int stride = 0;
    int padding = 0;
    int window = 0;
};

/// Gradient buffers indexed by node id; empty vector = node not reached by
/// the backward sweep.
using GradientMap = std::vector<std::vector<double>>;

/// Reverse-mode differentiation tape. Operations append nodes in topological
/// order (inputs always precede their consumers), so the backward sweep is a
/// single reverse pass that visits each reachable node once. A graph is
/// rebuilt per forward pass and is confined to one thread; distinct graphs
/// are independent.
class Graph {
public:
    Graph() = default;
    Graph(const Graph&) = delete;
    Graph& operator=(const Graph&) = delete;

    /// Registers a tensor as a leaf (memoized by buffer identity, so using
    /// the same parameter tensor twice yields one node and fan-out gradient
    /// accumulation). Tensors created outside any graph become leaves on
    /// first use by an operation.
    Tensor leaf(const Tensor& t);

    Tensor constant(Shape shape, std::vector<double> data);
    Tensor scalar(double v);

    // Elementwise binary; shapes must match, or one side may be a
    // single-element scalar broadcast.
    Tensor add(const Tensor& a, const Tensor& b);
    Tensor sub(const Tensor& a, const Tensor& b);
    Tensor mul(const Tensor& a, const Tensor& b);
    Tensor div(const Tensor& a, const Tensor& b);

    Tensor neg(const Tensor& a);
    Tensor log(const Tensor& a);
    Tensor exp(const Tensor& a);
    Tensor relu(const Tensor& a);
    Tensor clamp_min(const Tensor& a, double floor);

    /// Sum/mean over the given axes (result drops those axes). Mean over an
    /// empty selection is an error.
    Tensor reduce_sum(const Tensor& a, std::vector<int32_t> axes);
    Tensor reduce_mean(const Tensor& a, std::vector<int32_t> axes);
    Tensor sum_all(const Tensor& a);
    Tensor mean_all(const Tensor& a);

    /// Per-pixel channel softmax of (N,C,H,W) logits, max-subtracted.
    Tensor softmax_channels(const Tensor& logits);

    /// Cross-correlation convolution, kernel (Cout,Cin,kh,kw).
    Tensor conv2d(const Tensor& input, const Tensor& kernel, const Tensor& bias,
                  int stride, int padding);
    /// Transposed convolution, kernel (Cin,Cout,kh,kw); the forward map is the
    /// input-gradient operator of conv2d.
    Tensor conv2d_transpose(const Tensor& input, const Tensor& kernel, const Tensor& bias,
                            int stride, int padding);
    /// Max-pooling; ties resolve to the first element in row-major scan order.
    Tensor maxpool2d(const Tensor& input, int window, int stride);
    Tensor concat_channels(const Tensor& a, const Tensor& b);

    /// Reverse sweep from a scalar loss. Gradients accumulate additively at
    /// fan-out. When write_leaf_grads is set, leaf tensors with requires_grad
    /// receive (accumulate) their gradient; pass false when several graphs
    /// share parameter tensors across threads and the caller reduces grads
    /// itself via grad_of().
    const GradientMap& backward(const Tensor& loss, bool write_leaf_grads = true);

    /// Gradient buffer of a tensor's node after backward(); nullptr when the
    /// tensor is unknown to this graph or was not reached.
    const std::vector<double>* grad_of(const Tensor& t) const;

    int32_t node_count() const { return static_cast<int32_t>(nodes_.size()); }
    NodeInfo info(int32_t id) const;
    /// Node id of a tensor in this graph, -1 if not registered.
    int32_t id_of(const Tensor& t) const;

private:
    struct Node {
        OpTag tag = OpTag::leaf;
        std::vector<int32_t> inputs;
        Tensor value;
        // op attributes (meaningful per tag)
        int stride = 0;
        int padding = 0;
        int window = 0;
        double dattr = 0.0;                // clamp_min floor
        std::vector<int32_t> axes;         // reduce
        std::vector<int64_t> argmax;       // maxpool source indices
    };

    int32_t push_node(Node node);
    int32_t ensure_node(const Tensor& t);
    Tensor binary_op(OpTag tag, const Tensor& a, const Tensor& b);
    Tensor unary_op(OpTag tag, const Tensor& a, double dattr = 0.0);
    Tensor reduce_op(OpTag tag, const Tensor& a, std::vector<int32_t> axes);

    void node_backward(const Node& node, const std::vector<double>& gout);
    void accumulate(int32_t id, const double* src, int64_t n, double scale = 1.0);
    std::vector<double>& grad_buffer(int32_t id);

    std::vector<Node> nodes_;
    std::unordered_map<const detail::TensorImpl*, int32_t> ids_;
    GradientMap grads_;
};

} // namespace segforge

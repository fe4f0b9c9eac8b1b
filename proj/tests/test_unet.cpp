#include <doctest.h>

#include "segforge/error.hpp"
#include "segforge/unet.hpp"
#include "test_util.hpp"

using namespace segforge;

namespace {

UNetConfig tiny_config() {
    UNetConfig cfg;
    cfg.num_classes = 4;
    cfg.encoder_widths = {4, 8, 16, 32};
    cfg.bottleneck_width = 48;
    return cfg;
}

UNetConfig micro_config() {
    UNetConfig cfg;
    cfg.num_classes = 2;
    cfg.encoder_widths = {2, 3, 4, 5};
    cfg.bottleneck_width = 6;
    return cfg;
}

/// Layer-by-layer closed form, written independently of layer_plan.
int64_t analytic_params(const UNetConfig& c) {
    const int64_t k = c.kernel_size;
    int64_t total = 0;
    auto conv = [&](int64_t cin, int64_t cout, int64_t kk) { total += cout * cin * kk * kk + cout; };
    auto block = [&](int64_t cin, int64_t cout) {
        conv(cin, cout, k);
        for (int j = 1; j < c.convs_per_block; ++j) conv(cout, cout, k);
    };
    block(c.in_channels, c.encoder_widths[0]);
    block(c.encoder_widths[0], c.encoder_widths[1]);
    block(c.encoder_widths[1], c.encoder_widths[2]);
    block(c.encoder_widths[2], c.encoder_widths[3]);
    block(c.encoder_widths[3], c.bottleneck_width);
    int64_t prev = c.bottleneck_width;
    for (int i = 3; i >= 0; --i) {
        const int64_t w = c.encoder_widths[static_cast<size_t>(i)];
        conv(prev, w, 2);       // stride-2 upsample
        block(2 * w, w);
        prev = w;
    }
    conv(prev, c.num_classes, 1);
    return total;
}

/// FLOP count recomputed from the recorded graph's actual tensor shapes.
int64_t instrumented_flops(const Graph& g) {
    int64_t total = 0;
    for (int32_t id = 0; id < g.node_count(); ++id) {
        const NodeInfo node = g.info(id);
        const auto numel = [](const Shape& s) {
            int64_t n = 1;
            for (int64_t e : s) n *= e;
            return n;
        };
        switch (node.tag) {
            case OpTag::conv2d: {
                const NodeInfo kernel = g.info(node.inputs[1]);
                total += 2 * numel(node.shape) * kernel.shape[1] * kernel.shape[2] * kernel.shape[3];
                break;
            }
            case OpTag::conv2d_transpose: {
                const NodeInfo input = g.info(node.inputs[0]);
                const NodeInfo kernel = g.info(node.inputs[1]);
                total += 2 * numel(input.shape) * kernel.shape[1] * kernel.shape[2] * kernel.shape[3];
                break;
            }
            case OpTag::relu:
                total += numel(node.shape);
                break;
            case OpTag::maxpool2d:
                total += (node.window * node.window - 1) * numel(node.shape);
                break;
            default:
                break;
        }
    }
    return total;
}

} // namespace

TEST_CASE("build: deterministic per seed, distinct across seeds, zero biases") {
    const UNetConfig cfg = tiny_config();
    const UNetModel a = UNetModel::build(cfg, 7);
    const UNetModel b = UNetModel::build(cfg, 7);
    const UNetModel c = UNetModel::build(cfg, 8);
    REQUIRE(a.parameters().size() == b.parameters().size());
    bool any_diff = false;
    for (size_t i = 0; i < a.parameters().size(); ++i) {
        const auto& [name, ta] = a.parameters()[i];
        const auto& tb = b.parameters()[i].second;
        const auto& tc = c.parameters()[i].second;
        for (int64_t j = 0; j < ta.numel(); ++j) {
            CHECK(ta.data()[static_cast<size_t>(j)] == tb.data()[static_cast<size_t>(j)]);
            if (ta.data()[static_cast<size_t>(j)] != tc.data()[static_cast<size_t>(j)]) any_diff = true;
        }
        if (name.ends_with(".bias")) {
            for (double v : ta.data()) CHECK(v == 0.0);
        }
    }
    CHECK(any_diff);
}

TEST_CASE("count_params: closed forms") {
    // single 3x3 conv, in 3, out 8, with bias
    const UNetConfig tiny = tiny_config();
    const auto plan = layer_plan(tiny);
    bool found = false;
    for (const auto& spec : plan) {
        if (spec.name == "enc2.conv1") {
            CHECK(spec.cin * spec.cout * spec.kernel * spec.kernel + spec.cout ==
                  4 * 8 * 9 + 8); // 296
            found = true;
        }
    }
    CHECK(found);
    CHECK(3 * 8 * 9 + 8 == 224); // the quoted single-layer closed form

    CHECK(UNetModel::build(tiny, 1).count_params() == analytic_params(tiny));
    CHECK(UNetModel::build(micro_config(), 1).count_params() == analytic_params(micro_config()));
    CHECK(analytic_params(tiny) == 98924);

    // doubling every width roughly quadruples the conv-dominated count
    UNetConfig doubled = tiny;
    doubled.encoder_widths = {8, 16, 32, 64};
    doubled.bottleneck_width = 96;
    const double ratio = static_cast<double>(analytic_params(doubled)) /
                         static_cast<double>(analytic_params(tiny));
    CHECK(ratio > 3.6);
    CHECK(ratio < 4.4);
}

TEST_CASE("paper-scale reconstruction hits 42.9M within 2 percent") {
    UNetConfig cfg;
    cfg.num_classes = 16;
    cfg.encoder_widths = {68, 136, 272, 544};
    cfg.bottleneck_width = 1360;
    const int64_t params = analytic_params(cfg);
    CHECK(std::fabs(static_cast<double>(params) - 42.9e6) / 42.9e6 < 0.02);
    CHECK(UNetModel::build(cfg, 1).count_params() == params);
}

TEST_CASE("forward: shape contract and divisibility errors") {
    const UNetModel model = UNetModel::build(tiny_config(), 3);
    Graph g;
    SplitMix64 rng(90);
    const Tensor logits = model.forward(g, tu::random_tensor({1, 3, 64, 64}, rng));
    CHECK(logits.shape() == Shape{1, 4, 64, 64});

    Graph g2;
    CHECK_THROWS_AS(model.forward(g2, Tensor::zeros({1, 3, 48, 50})), ShapeError);
    CHECK_THROWS_AS(model.forward(g2, Tensor::zeros({1, 2, 64, 64})), ShapeError);
    CHECK(g2.node_count() <= 1); // rejected before any compute
}

TEST_CASE("forward: deterministic logits and exactly four skip connections") {
    const UNetModel model = UNetModel::build(tiny_config(), 5);
    const Tensor input = Tensor::zeros({1, 3, 32, 32});
    Graph g1, g2;
    const Tensor l1 = model.forward(g1, input);
    const Tensor l2 = model.forward(g2, input);
    for (int64_t i = 0; i < l1.numel(); ++i) {
        CHECK(l1.data()[static_cast<size_t>(i)] == l2.data()[static_cast<size_t>(i)]);
    }
    int concats = 0;
    for (int32_t id = 0; id < g1.node_count(); ++id) {
        if (g1.info(id).tag == OpTag::concat_channels) ++concats;
    }
    CHECK(concats == 4);
}

TEST_CASE("forward: gradients through the whole network vs finite differences") {
    const UNetConfig cfg = micro_config();
    const UNetModel model = UNetModel::build(cfg, 11);
    SplitMix64 rng(91);

    // input gradient exercises the full backward chain
    const double err_input = tu::gradient_check_random(
        {1, 3, 16, 16}, rng,
        [&](Graph& g, const Tensor& x) { return g.sum_all(model.forward(g, x)); }, -1.0, 1.0);
    CHECK(err_input < 1e-3);

    // a shallow parameter, the head, and a bottleneck bias see correct
    // gradients too
    const Tensor input = tu::random_tensor({1, 3, 16, 16}, rng);
    UNetModel work = UNetModel::build(cfg, 11);
    for (const char* pname : {"enc1.conv1.kernel", "head.kernel", "bottleneck.conv2.bias"}) {
        Tensor& target = [&]() -> Tensor& {
            for (auto& [n, t] : work.parameters()) {
                if (n == pname) return t;
            }
            throw std::logic_error("param not found");
        }();
        target.zero_grad();
        {
            Graph g;
            g.backward(g.sum_all(work.forward(g, input)));
        }
        const std::vector<double> auto_grad(target.grad().begin(), target.grad().end());

        const std::vector<double> x0(target.data().begin(), target.data().end());
        const auto fn = [&](const std::vector<double>& v) {
            std::copy(v.begin(), v.end(), target.data().begin());
            Graph g;
            const double loss = g.sum_all(work.forward(g, input)).value();
            std::copy(x0.begin(), x0.end(), target.data().begin());
            return loss;
        };
        const std::vector<double> numeric = tu::finite_diff(fn, x0);
        CHECK(tu::grad_rel_err(auto_grad, numeric) < 1e-3);
    }
}

TEST_CASE("estimate_flops: closed forms and exact oracle agreement") {
    // bare 3x3 conv term: 2 * 16 * 9 = 288 FLOPs
    {
        Graph g;
        Tensor in = Tensor::zeros({1, 1, 4, 4});
        Tensor k = Tensor::zeros({1, 1, 3, 3});
        Tensor b = Tensor::zeros({1});
        g.conv2d(in, k, b, 1, 1);
        // strip the graph to conv-only terms: no relu/pool recorded
        CHECK(instrumented_flops(g) == 288);
    }

    const UNetConfig tiny = tiny_config();
    CHECK(estimate_flops(tiny, 512) == 64 * estimate_flops(tiny, 64));

    for (const auto& [cfg, side] : {std::pair{tiny_config(), 64}, std::pair{micro_config(), 16},
                                    std::pair{tiny_config(), 32}}) {
        const UNetModel model = UNetModel::build(cfg, 2);
        Graph g;
        model.forward(g, Tensor::zeros({1, cfg.in_channels, side, side}));
        CHECK(instrumented_flops(g) == estimate_flops(cfg, side));
    }

    CHECK_THROWS_AS(estimate_flops(tiny, 50), ConfigError);
}

TEST_CASE("config validation") {
    UNetConfig cfg = tiny_config();
    cfg.kernel_size = 4;
    CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("kernel_size"), ConfigError);
    cfg = tiny_config();
    cfg.num_classes = 1;
    CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("num_classes"), ConfigError);
    cfg = tiny_config();
    cfg.encoder_widths[2] = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

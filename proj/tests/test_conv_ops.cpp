#include <doctest.h>

#include "segforge/error.hpp"
#include "test_util.hpp"

using namespace segforge;

TEST_CASE("conv2d: identity and constant closed forms") {
    Graph g;
    SplitMix64 rng(21);
    Tensor x = tu::random_tensor({1, 1, 4, 4}, rng);
    Tensor unit = Tensor::from_data({1, 1, 1, 1}, {1.0});
    Tensor zero_bias = Tensor::zeros({1});
    Tensor y = g.conv2d(x, unit, zero_bias, 1, 0);
    for (int64_t i = 0; i < 16; ++i) CHECK(y.data()[static_cast<size_t>(i)] == x.data()[static_cast<size_t>(i)]);

    Tensor ones_k = Tensor::full({1, 1, 3, 3}, 1.0);
    Tensor c = g.conv2d(Tensor::full({1, 1, 5, 5}, 2.0), ones_k, zero_bias, 1, 0);
    REQUIRE(c.shape() == Shape{1, 1, 3, 3});
    for (double v : c.data()) CHECK(v == doctest::Approx(18.0));
}

TEST_CASE("conv2d: exact agreement with the sliding-window oracle") {
    SplitMix64 rng(22);
    Graph g;
    {
        Tensor in = tu::random_tensor({1, 2, 5, 5}, rng);
        Tensor k = tu::random_tensor({3, 2, 3, 3}, rng);
        Tensor b = tu::random_tensor({3}, rng);
        Tensor got = g.conv2d(in, k, b, 1, 0);
        Tensor want = tu::naive_conv2d(in, k, b, 1, 0);
        REQUIRE(got.shape() == want.shape());
        for (int64_t i = 0; i < got.numel(); ++i) {
            CHECK(got.data()[static_cast<size_t>(i)] == want.data()[static_cast<size_t>(i)]);
        }
    }
    // strides and padding up to 2x4x8x8
    const struct { Shape in, k; int stride, pad; } cases[] = {
        {{2, 4, 8, 8}, {3, 4, 3, 3}, 1, 1},
        {{2, 3, 8, 8}, {2, 3, 3, 3}, 2, 1},
        {{1, 2, 7, 8}, {2, 2, 2, 2}, 2, 0},
        {{2, 1, 8, 6}, {1, 1, 5, 3}, 1, 2},
    };
    for (const auto& tc : cases) {
        Tensor in = tu::random_tensor(tc.in, rng);
        Tensor k = tu::random_tensor(tc.k, rng);
        Tensor b = tu::random_tensor({tc.k[0]}, rng);
        Tensor got = g.conv2d(in, k, b, tc.stride, tc.pad);
        Tensor want = tu::naive_conv2d(in, k, b, tc.stride, tc.pad);
        REQUIRE(got.shape() == want.shape());
        for (int64_t i = 0; i < got.numel(); ++i) {
            CHECK(got.data()[static_cast<size_t>(i)] == want.data()[static_cast<size_t>(i)]);
        }
    }
}

TEST_CASE("conv2d: gradients for input, kernel, bias vs finite differences") {
    SplitMix64 rng(23);
    Tensor in0 = tu::random_tensor({1, 2, 5, 5}, rng);
    Tensor k0 = tu::random_tensor({2, 2, 3, 3}, rng);
    Tensor b0 = tu::random_tensor({2}, rng);

    const double err_in = tu::gradient_check(
        in0.shape(), {in0.data().begin(), in0.data().end()},
        [&](Graph& g, const Tensor& x) { return g.sum_all(g.conv2d(x, k0, b0, 1, 1)); });
    CHECK(err_in < 1e-5);

    const double err_k = tu::gradient_check(
        k0.shape(), {k0.data().begin(), k0.data().end()},
        [&](Graph& g, const Tensor& k) { return g.sum_all(g.conv2d(in0, k, b0, 2, 1)); });
    CHECK(err_k < 1e-5);

    const double err_b = tu::gradient_check(
        b0.shape(), {b0.data().begin(), b0.data().end()},
        [&](Graph& g, const Tensor& b) { return g.sum_all(g.conv2d(in0, k0, b, 1, 0)); });
    CHECK(err_b < 1e-5);
}

TEST_CASE("conv2d: shape errors") {
    Graph g;
    Tensor in = Tensor::zeros({1, 1, 2, 2});
    Tensor k = Tensor::zeros({1, 1, 3, 3});
    Tensor b = Tensor::zeros({1});
    CHECK_THROWS_AS(g.conv2d(in, k, b, 1, 0), ShapeError);        // kernel larger than input
    CHECK_THROWS_AS(g.conv2d(in, Tensor::zeros({1, 2, 1, 1}), b, 1, 0), ShapeError);
    CHECK_THROWS_AS(g.conv2d(in, Tensor::zeros({1, 1, 1, 1}), b, 0, 0), ShapeError);
}

TEST_CASE("conv2d_transpose: identity and shape closed forms") {
    Graph g;
    SplitMix64 rng(24);
    Tensor x = tu::random_tensor({1, 1, 3, 3}, rng);
    Tensor unit = Tensor::from_data({1, 1, 1, 1}, {1.0});
    Tensor zb = Tensor::zeros({1});
    Tensor y = g.conv2d_transpose(x, unit, zb, 1, 0);
    for (int64_t i = 0; i < 9; ++i) CHECK(y.data()[static_cast<size_t>(i)] == x.data()[static_cast<size_t>(i)]);

    Tensor in2 = tu::random_tensor({1, 2, 2, 2}, rng);
    Tensor k2 = tu::random_tensor({2, 3, 2, 2}, rng);
    Tensor b2 = tu::random_tensor({3}, rng);
    Tensor up = g.conv2d_transpose(in2, k2, b2, 2, 0);
    REQUIRE(up.shape() == Shape{1, 3, 4, 4});
    Tensor want = tu::zero_insert_convt2d(in2, k2, b2, 2, 0);
    for (int64_t i = 0; i < up.numel(); ++i) {
        CHECK(up.data()[static_cast<size_t>(i)] ==
              doctest::Approx(want.data()[static_cast<size_t>(i)]).epsilon(1e-12));
    }
}

TEST_CASE("conv2d_transpose: zero-insertion oracle on general cases") {
    SplitMix64 rng(25);
    Graph g;
    const struct { Shape in, k; int stride, pad; } cases[] = {
        {{1, 2, 3, 4}, {2, 2, 3, 3}, 2, 1},
        {{2, 1, 4, 4}, {1, 2, 2, 2}, 1, 0},
        {{1, 3, 2, 2}, {3, 1, 4, 4}, 3, 1},
    };
    for (const auto& tc : cases) {
        Tensor in = tu::random_tensor(tc.in, rng);
        Tensor k = tu::random_tensor(tc.k, rng);
        Tensor b = tu::random_tensor({tc.k[1]}, rng);
        Tensor got = g.conv2d_transpose(in, k, b, tc.stride, tc.pad);
        Tensor want = tu::zero_insert_convt2d(in, k, b, tc.stride, tc.pad);
        REQUIRE(got.shape() == want.shape());
        for (int64_t i = 0; i < got.numel(); ++i) {
            CHECK(got.data()[static_cast<size_t>(i)] ==
                  doctest::Approx(want.data()[static_cast<size_t>(i)]).epsilon(1e-12));
        }
    }
    CHECK_THROWS_AS(g.conv2d_transpose(Tensor::zeros({1, 1, 1, 1}), Tensor::zeros({1, 1, 1, 1}),
                                       Tensor::zeros({1}), 1, 2),
                    ShapeError); // non-positive output extent
}

TEST_CASE("conv2d_transpose: gradients vs finite differences") {
    SplitMix64 rng(26);
    Tensor in0 = tu::random_tensor({1, 2, 3, 3}, rng);
    Tensor k0 = tu::random_tensor({2, 2, 2, 2}, rng);
    Tensor b0 = tu::random_tensor({2}, rng);
    CHECK(tu::gradient_check(in0.shape(), {in0.data().begin(), in0.data().end()},
                             [&](Graph& g, const Tensor& x) {
                                 return g.sum_all(g.conv2d_transpose(x, k0, b0, 2, 0));
                             }) < 1e-5);
    CHECK(tu::gradient_check(k0.shape(), {k0.data().begin(), k0.data().end()},
                             [&](Graph& g, const Tensor& k) {
                                 return g.sum_all(g.conv2d_transpose(in0, k, b0, 2, 1));
                             }) < 1e-5);
    CHECK(tu::gradient_check(b0.shape(), {b0.data().begin(), b0.data().end()},
                             [&](Graph& g, const Tensor& b) {
                                 return g.sum_all(g.conv2d_transpose(in0, k0, b, 1, 0));
                             }) < 1e-5);
}

TEST_CASE("maxpool2d: closed forms, ties, oracle") {
    Graph g;
    Tensor x = Tensor::from_data({1, 1, 2, 2}, {1, 2, 3, 4});
    Tensor y = g.maxpool2d(x, 2, 2);
    REQUIRE(y.shape() == Shape{1, 1, 1, 1});
    CHECK(y.value() == 4.0);

    // tie rule: constant input routes gradient to the first window element
    Tensor flat = Tensor::full({1, 1, 2, 2}, 3.0, true);
    Graph g2;
    g2.backward(g2.sum_all(g2.maxpool2d(flat, 2, 2)));
    CHECK(flat.grad()[0] == 1.0);
    CHECK(flat.grad()[1] == 0.0);
    CHECK(flat.grad()[2] == 0.0);
    CHECK(flat.grad()[3] == 0.0);

    SplitMix64 rng(27);
    const struct { Shape in; int window, stride; } cases[] = {
        {{2, 4, 8, 8}, 2, 2}, {{1, 2, 7, 7}, 3, 2}, {{1, 1, 5, 5}, 2, 1}};
    for (const auto& tc : cases) {
        Tensor in = tu::random_tensor(tc.in, rng);
        Tensor got = g.maxpool2d(in, tc.window, tc.stride);
        Tensor want = tu::naive_maxpool2d(in, tc.window, tc.stride);
        REQUIRE(got.shape() == want.shape());
        for (int64_t i = 0; i < got.numel(); ++i) {
            CHECK(got.data()[static_cast<size_t>(i)] == want.data()[static_cast<size_t>(i)]);
        }
    }
    CHECK_THROWS_AS(g.maxpool2d(Tensor::zeros({1, 1, 2, 2}), 3, 1), ShapeError);
}

TEST_CASE("maxpool2d: gradient vs finite differences") {
    SplitMix64 rng(28);
    for (int trial = 0; trial < 3; ++trial) {
        CHECK(tu::gradient_check_random({1, 2, 4, 4}, rng, [](Graph& g, const Tensor& x) {
                  return g.sum_all(g.maxpool2d(x, 2, 2));
              }) < 1e-4);
    }
}

TEST_CASE("concat_channels: shapes, gradients, errors") {
    Graph g;
    Tensor a = Tensor::zeros({2, 2, 3, 4});
    Tensor b = Tensor::zeros({2, 3, 3, 4});
    CHECK(g.concat_channels(a, b).shape() == Shape{2, 5, 3, 4});
    CHECK_THROWS_AS(g.concat_channels(a, Tensor::zeros({2, 3, 4, 4})), ShapeError);

    // gradient splits exactly back onto the inputs
    SplitMix64 rng(29);
    Tensor la = tu::random_tensor({1, 2, 2, 2}, rng, -1, 1, true);
    Tensor lb = tu::random_tensor({1, 1, 2, 2}, rng, -1, 1, true);
    Tensor w = tu::random_tensor({1, 3, 2, 2}, rng);
    Graph g2;
    g2.backward(g2.sum_all(g2.mul(g2.concat_channels(la, lb), w)));
    for (int64_t i = 0; i < 8; ++i) {
        CHECK(la.grad()[static_cast<size_t>(i)] == w.data()[static_cast<size_t>(i)]);
    }
    for (int64_t i = 0; i < 4; ++i) {
        CHECK(lb.grad()[static_cast<size_t>(i)] == w.data()[static_cast<size_t>(8 + i)]);
    }

    CHECK(tu::gradient_check_random({1, 2, 2, 2}, rng, [&](Graph& gg, const Tensor& x) {
              return gg.sum_all(gg.mul(gg.concat_channels(x, lb), w));
          }) < 1e-6);
}

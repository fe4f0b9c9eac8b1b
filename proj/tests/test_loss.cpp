#include <doctest.h>

#include "segforge/error.hpp"
#include "segforge/loss.hpp"
#include "segforge/trainer.hpp"
#include "test_util.hpp"

using namespace segforge;

namespace {

/// Independent straight-line restatement of the soft IoU formula.
double ref_soft_iou(const OneHotTarget& target, const Tensor& probs, const LossConfig& cfg) {
    const int64_t c = probs.dim(1);
    const int64_t hw = probs.dim(2) * probs.dim(3);
    const int64_t n = probs.dim(0);
    const int first = cfg.exclude_background_from_overlap ? 1 : 0;
    double mean = 0;
    for (int64_t ch = first; ch < c; ++ch) {
        double inter = 0, uni = 0;
        for (int64_t i = 0; i < n; ++i) {
            for (int64_t p = 0; p < hw; ++p) {
                const double a = target.values.data()[static_cast<size_t>((i * c + ch) * hw + p)];
                const double b = probs.data()[static_cast<size_t>((i * c + ch) * hw + p)];
                inter += a * b;
                uni += a + b - a * b;
            }
        }
        mean += (inter + cfg.smooth_eps) / (uni + cfg.smooth_eps);
    }
    mean /= static_cast<double>(c - first);
    return 1.0 - mean;
}

Tensor random_probs(const Shape& shape, SplitMix64& rng) {
    Graph g;
    return g.softmax_channels(tu::random_tensor(shape, rng, -2.0, 2.0));
}

ClassMask random_mask(int h, int w, int num_classes, SplitMix64& rng) {
    ClassMask m = ClassMask::filled(h, w, 0);
    for (auto& v : m.values) v = static_cast<uint8_t>(rng.uniform_int(0, num_classes - 1));
    return m;
}

/// Single-pixel fixture: C=3 (background + 2 foreground), truth class 1,
/// prediction (0, 0.5, 0.5).
struct SinglePixel {
    OneHotTarget target = one_hot([] {
        ClassMask m = ClassMask::filled(1, 1, 1);
        return m;
    }(), 3);
    Tensor probs = Tensor::from_data({1, 3, 1, 1}, {0.0, 0.5, 0.5});
    LossConfig cfg = [] {
        LossConfig c = LossConfig::defaults(3);
        c.smooth_eps = 1e-12; // closed forms quoted without smoothing
        return c;
    }();
};

} // namespace

TEST_CASE("one_hot: closed forms and round trip") {
    ClassMask m = ClassMask::filled(1, 2, 0);
    m.at(0, 1) = 1;
    const OneHotTarget t = one_hot(m, 2);
    CHECK(t.values.at({0, 0, 0, 0}) == 1.0);
    CHECK(t.values.at({0, 0, 0, 1}) == 0.0);
    CHECK(t.values.at({0, 1, 0, 0}) == 0.0);
    CHECK(t.values.at({0, 1, 0, 1}) == 1.0);

    const OneHotTarget bg = one_hot(ClassMask::filled(2, 2, 0), 3);
    for (int p = 0; p < 4; ++p) {
        CHECK(bg.values.data()[static_cast<size_t>(p)] == 1.0);
    }

    SplitMix64 rng(41);
    for (int trial = 0; trial < 5; ++trial) {
        ClassMask src = random_mask(4, 5, 6, rng);
        const OneHotTarget enc = one_hot(src, 6);
        // argmax round trip recovers the mask exactly
        const ClassMask back = argmax_mask(enc.values);
        CHECK(back.values == src.values);
        // exactly one 1 per pixel
        for (int64_t p = 0; p < 20; ++p) {
            double sum = 0;
            for (int64_t c = 0; c < 6; ++c) sum += enc.values.data()[static_cast<size_t>(c * 20 + p)];
            CHECK(sum == 1.0);
        }
    }

    ClassMask bad = ClassMask::filled(2, 2, 0);
    bad.at(1, 0) = 7;
    CHECK_THROWS_WITH_AS(one_hot(bad, 4), doctest::Contains("(1,0)"), MaskRangeError);
}

TEST_CASE("soft_iou_loss: perfect prediction and the single-pixel closed form") {
    SinglePixel fx;
    {
        Graph g;
        Tensor loss = soft_iou_loss(g, fx.target, fx.target.values, fx.cfg);
        CHECK(std::fabs(loss.value()) < 1e-6);
        LossConfig with_eps = LossConfig::defaults(3);
        CHECK(std::fabs(soft_iou_loss(g, fx.target, fx.target.values, with_eps).value()) < 1e-6);
    }
    Graph g;
    // IoU_1 = 0.5/(1.5-0.5) = 0.5, IoU_2 = 0 -> loss = 1 - 0.25
    CHECK(soft_iou_loss(g, fx.target, fx.probs, fx.cfg).value() == doctest::Approx(0.75).epsilon(1e-9));
}

TEST_CASE("soft_iou_loss: independent reimplementation and gradient") {
    SplitMix64 rng(42);
    const LossConfig cfg = LossConfig::defaults(4);
    for (int trial = 0; trial < 5; ++trial) {
        const OneHotTarget target = one_hot(random_mask(6, 6, 4, rng), 4);
        const Tensor probs = random_probs({1, 4, 6, 6}, rng);
        Graph g;
        const double got = soft_iou_loss(g, target, probs, cfg).value();
        CHECK(std::fabs(got - ref_soft_iou(target, probs, cfg)) < 1e-12);
    }
    const OneHotTarget target = one_hot(random_mask(4, 4, 3, rng), 3);
    const LossConfig cfg3 = LossConfig::defaults(3);
    const double err = tu::gradient_check_random(
        {1, 3, 4, 4}, rng,
        [&](Graph& g, const Tensor& logits) {
            return soft_iou_loss(g, target, g.softmax_channels(logits), cfg3);
        },
        -2.0, 2.0);
    CHECK(err < 1e-4);
}

TEST_CASE("soft_dice_loss: closed forms and the Dice >= IoU property") {
    SinglePixel fx;
    Graph g;
    CHECK(std::fabs(soft_dice_loss(g, fx.target, fx.target.values, fx.cfg).value()) < 1e-6);
    // D_1 = 2*0.5/1.5 = 2/3, D_2 = 0 -> loss = 1 - 1/3
    CHECK(soft_dice_loss(g, fx.target, fx.probs, fx.cfg).value() ==
          doctest::Approx(2.0 / 3.0).epsilon(1e-9));

    SplitMix64 rng(43);
    const LossConfig cfg = LossConfig::defaults(4);
    for (int trial = 0; trial < 100; ++trial) {
        const OneHotTarget target = one_hot(random_mask(5, 5, 4, rng), 4);
        const Tensor probs = random_probs({1, 4, 5, 5}, rng);
        Graph gg;
        const double liou = soft_iou_loss(gg, target, probs, cfg).value();
        const double ldice = soft_dice_loss(gg, target, probs, cfg).value();
        // soft Dice >= soft IoU per class, so 1 - dice <= 1 - iou
        CHECK(ldice <= liou + 1e-12);
    }
}

TEST_CASE("weighted_cross_entropy: closed forms") {
    // single foreground pixel, B at truth = 0.5, weight 1
    {
        ClassMask m = ClassMask::filled(1, 1, 1);
        const OneHotTarget t = one_hot(m, 2);
        const Tensor probs = Tensor::from_data({1, 2, 1, 1}, {0.5, 0.5});
        Graph g;
        CHECK(weighted_cross_entropy(g, t, probs, LossConfig::defaults(2)).value() ==
              doctest::Approx(0.693147).epsilon(1e-6));
    }
    // one background pixel only: beta cancels in the normalization
    {
        const OneHotTarget t = one_hot(ClassMask::filled(1, 1, 0), 2);
        const Tensor probs = Tensor::from_data({1, 2, 1, 1}, {0.5, 0.5});
        Graph g;
        CHECK(weighted_cross_entropy(g, t, probs, LossConfig::defaults(2)).value() ==
              doctest::Approx(0.693147).epsilon(1e-6));
    }
    // background pixel at 0.5 plus a perfectly predicted foreground pixel
    {
        ClassMask m = ClassMask::filled(1, 2, 0);
        m.at(0, 1) = 1;
        const OneHotTarget t = one_hot(m, 2);
        const Tensor probs = Tensor::from_data({1, 2, 1, 2}, {0.5, 0.0, 0.5, 1.0});
        Graph g;
        CHECK(weighted_cross_entropy(g, t, probs, LossConfig::defaults(2)).value() ==
              doctest::Approx(0.090410).epsilon(1e-5));
    }
}

TEST_CASE("weighted_cross_entropy: gradient through softmax") {
    SplitMix64 rng(44);
    const OneHotTarget target = one_hot(random_mask(2, 2, 3, rng), 3);
    const LossConfig cfg = LossConfig::defaults(3);
    const double err = tu::gradient_check_random(
        {1, 3, 2, 2}, rng,
        [&](Graph& g, const Tensor& logits) {
            return weighted_cross_entropy(g, target, g.softmax_channels(logits), cfg);
        },
        -2.0, 2.0);
    CHECK(err < 1e-4);
}

TEST_CASE("combined_loss: weighted composition of the closed forms") {
    SinglePixel fx;
    Graph g;
    const CombinedLoss cl = combined_loss(g, fx.target, fx.probs, fx.cfg);
    CHECK(cl.iou.value() == doctest::Approx(0.75).epsilon(1e-9));
    CHECK(cl.dice.value() == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
    CHECK(cl.ce.value() == doctest::Approx(0.693147).epsilon(1e-6));
    // 0.8*0.75 + 1*(2/3) + 10*ln 2
    CHECK(cl.total.value() == doctest::Approx(8.198137).epsilon(1e-6));

    // perfect hard prediction: only the CE clamp floor contributes
    Graph g2;
    const CombinedLoss perfect = combined_loss(g2, fx.target, fx.target.values, fx.cfg);
    CHECK(perfect.total.value() < 1e-5);
}

TEST_CASE("combined_loss: all-background degenerate case against the hand formula") {
    SplitMix64 rng(45);
    const int c = 3;
    const OneHotTarget target = one_hot(ClassMask::filled(4, 4, 0), c);
    const Tensor probs = random_probs({1, c, 4, 4}, rng);
    LossConfig cfg = LossConfig::defaults(c);
    cfg.lambda_ce = 0.0;
    Graph g;
    const CombinedLoss cl = combined_loss(g, target, probs, cfg);
    // hand formula: I_c = 0, U_c = sum B_c, D denominator = sum B_c
    double iou_mean = 0, dice_mean = 0;
    for (int ch = 1; ch < c; ++ch) {
        double sum_b = 0;
        for (int64_t p = 0; p < 16; ++p) sum_b += probs.data()[static_cast<size_t>(ch * 16 + p)];
        iou_mean += cfg.smooth_eps / (sum_b + cfg.smooth_eps);
        dice_mean += cfg.smooth_eps / (sum_b + cfg.smooth_eps);
    }
    iou_mean /= (c - 1);
    dice_mean /= (c - 1);
    CHECK(cl.iou.value() == doctest::Approx(1.0 - iou_mean).epsilon(1e-12));
    CHECK(cl.dice.value() == doctest::Approx(1.0 - dice_mean).epsilon(1e-12));
    CHECK(cl.total.value() == doctest::Approx(cfg.lambda_iou * cl.iou.value() +
                                              cfg.lambda_dice * cl.dice.value()));
}

TEST_CASE("loss bounds on random instances") {
    SplitMix64 rng(46);
    const LossConfig cfg = LossConfig::defaults(4);
    for (int trial = 0; trial < 200; ++trial) {
        const OneHotTarget target = one_hot(random_mask(4, 4, 4, rng), 4);
        const Tensor probs = random_probs({1, 4, 4, 4}, rng);
        Graph g;
        const CombinedLoss cl = combined_loss(g, target, probs, cfg);
        CHECK(cl.iou.value() >= 0.0);
        CHECK(cl.iou.value() <= 1.0);
        CHECK(cl.dice.value() >= 0.0);
        CHECK(cl.dice.value() <= 1.0);
        CHECK(cl.ce.value() >= 0.0);
        CHECK(cl.total.value() >= 0.0);
    }
}

TEST_CASE("overlap losses ignore the background channel of B directly") {
    SplitMix64 rng(47);
    const OneHotTarget target = one_hot(random_mask(3, 3, 3, rng), 3);
    Tensor probs = random_probs({1, 3, 3, 3}, rng).clone();
    probs.set_requires_grad(true);
    const LossConfig cfg = LossConfig::defaults(3);
    {
        Graph g;
        g.backward(soft_iou_loss(g, target, probs, cfg));
        for (int64_t p = 0; p < 9; ++p) CHECK(probs.grad()[static_cast<size_t>(p)] == 0.0);
    }
    probs.zero_grad();
    {
        Graph g;
        g.backward(soft_dice_loss(g, target, probs, cfg));
        for (int64_t p = 0; p < 9; ++p) CHECK(probs.grad()[static_cast<size_t>(p)] == 0.0);
    }
}

TEST_CASE("zero background weight nulls CE logit gradients at background pixels") {
    SplitMix64 rng(48);
    ClassMask mask = random_mask(3, 3, 3, rng);
    mask.at(0, 0) = 0;
    mask.at(2, 2) = 0;
    const OneHotTarget target = one_hot(mask, 3);
    LossConfig cfg = LossConfig::defaults(3);
    cfg.class_weights[0] = 0.0;

    Tensor logits = tu::random_tensor({1, 3, 3, 3}, rng, -2, 2, true);
    Graph g;
    g.backward(weighted_cross_entropy(g, target, g.softmax_channels(logits), cfg));
    for (int y = 0; y < 3; ++y) {
        for (int x = 0; x < 3; ++x) {
            if (mask.at(y, x) != 0) continue;
            for (int64_t c = 0; c < 3; ++c) {
                CHECK(logits.grad()[static_cast<size_t>(c * 9 + y * 3 + x)] == 0.0);
            }
        }
    }
}

TEST_CASE("combined loss is invariant to consistent foreground relabeling") {
    SplitMix64 rng(49);
    const int c = 5;
    const LossConfig cfg = LossConfig::defaults(c);
    for (int trial = 0; trial < 20; ++trial) {
        ClassMask mask = random_mask(4, 4, c, rng);
        Tensor probs = random_probs({1, c, 4, 4}, rng);
        // permute foreground classes 1..4
        std::vector<int> perm = {1, 2, 3, 4};
        for (size_t i = perm.size(); i > 1; --i) {
            std::swap(perm[i - 1], perm[static_cast<size_t>(rng.uniform_int(0, static_cast<int64_t>(i) - 1))]);
        }
        ClassMask pmask = mask;
        for (auto& v : pmask.values) {
            if (v != 0) v = static_cast<uint8_t>(perm[static_cast<size_t>(v - 1)]);
        }
        Tensor pprobs = Tensor::zeros({1, c, 4, 4});
        for (int64_t ch = 0; ch < c; ++ch) {
            const int64_t dst = ch == 0 ? 0 : perm[static_cast<size_t>(ch - 1)];
            for (int64_t p = 0; p < 16; ++p) {
                pprobs.data()[static_cast<size_t>(dst * 16 + p)] =
                    probs.data()[static_cast<size_t>(ch * 16 + p)];
            }
        }
        Graph g1, g2;
        const double l1 = combined_loss(g1, one_hot(mask, c), probs, cfg).total.value();
        const double l2 = combined_loss(g2, one_hot(pmask, c), pprobs, cfg).total.value();
        CHECK(std::fabs(l1 - l2) < 1e-12);
    }
}

TEST_CASE("raising the truth-channel probability never increases the loss") {
    SplitMix64 rng(50);
    const int c = 4;
    const LossConfig cfg = LossConfig::defaults(c);
    for (int trial = 0; trial < 50; ++trial) {
        ClassMask mask = random_mask(3, 3, c, rng);
        Tensor probs = random_probs({1, c, 3, 3}, rng);
        const OneHotTarget target = one_hot(mask, c);
        Graph g;
        const double before = combined_loss(g, target, probs, cfg).total.value();

        const int64_t p = rng.uniform_int(0, 8);
        const int t = mask.values[static_cast<size_t>(p)];
        const double alpha = rng.uniform(0.01, 0.9);
        Tensor bumped = probs.clone();
        for (int64_t ch = 0; ch < c; ++ch) {
            double& v = bumped.data()[static_cast<size_t>(ch * 9 + p)];
            v = ch == t ? v + alpha * (1.0 - v) : v * (1.0 - alpha);
        }
        Graph g2;
        const double after = combined_loss(g2, target, bumped, cfg).total.value();
        CHECK(after <= before + 1e-12);
    }
}

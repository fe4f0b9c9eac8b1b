#include <doctest.h>

#include <fstream>
#include <sstream>

#include "segforge/checkpoint.hpp"
#include "segforge/error.hpp"
#include "segforge/trainer.hpp"
#include "segforge/unet.hpp"
#include "test_util.hpp"

using namespace segforge;

namespace {

std::string read_bytes(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    REQUIRE(f.good());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

UNetConfig micro_config() {
    UNetConfig cfg;
    cfg.num_classes = 3;
    cfg.encoder_widths = {2, 3, 4, 5};
    cfg.bottleneck_width = 6;
    return cfg;
}

} // namespace

TEST_CASE("checkpoint: save -> load -> save is byte-exact") {
    tu::TempDir tmp;
    SplitMix64 rng(101);
    Checkpoint ckpt;
    ckpt.meta_json = R"({"kind":"segforge-checkpoint","model":{"num_classes":3}})";
    ckpt.tensors.emplace_back("alpha", tu::random_tensor({2, 3}, rng));
    ckpt.tensors.emplace_back("beta.bias", tu::random_tensor({7}, rng));
    ckpt.tensors.emplace_back("scalar", Tensor::scalar(0.25));

    const auto p1 = tmp.path() / "a.ckpt";
    const auto p2 = tmp.path() / "b.ckpt";
    save_checkpoint(p1, ckpt);
    const Checkpoint loaded = load_checkpoint(p1);
    save_checkpoint(p2, loaded);
    CHECK(read_bytes(p1) == read_bytes(p2));

    REQUIRE(loaded.tensors.size() == 3);
    CHECK(loaded.meta_json == ckpt.meta_json);
    CHECK(loaded.tensors[0].first == "alpha");
    CHECK(loaded.tensors[0].second.shape() == Shape{2, 3});
    for (int64_t i = 0; i < 6; ++i) {
        CHECK(loaded.tensors[0].second.data()[static_cast<size_t>(i)] ==
              ckpt.tensors[0].second.data()[static_cast<size_t>(i)]);
    }
}

TEST_CASE("checkpoint: magic and truncation errors") {
    tu::TempDir tmp;
    const auto bad = tmp.path() / "bad.ckpt";
    {
        std::ofstream f(bad, std::ios::binary);
        f << "NOPE";
    }
    CHECK_THROWS_AS(load_checkpoint(bad), MalformedFileError);

    Checkpoint ckpt;
    ckpt.meta_json = "{}";
    ckpt.tensors.emplace_back("t", Tensor::scalar(1.0));
    const auto good = tmp.path() / "good.ckpt";
    save_checkpoint(good, ckpt);
    const std::string bytes = read_bytes(good);
    {
        std::ofstream f(tmp.path() / "cut.ckpt", std::ios::binary);
        f.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 5));
    }
    CHECK_THROWS_AS(load_checkpoint(tmp.path() / "cut.ckpt"), TruncatedFileError);
}

TEST_CASE("train checkpoint: parameters, optimizer state, augment config round trip") {
    tu::TempDir tmp;
    const UNetConfig cfg = micro_config();
    UNetModel model = UNetModel::build(cfg, 42);
    TrainState state;
    state.opt.init(model.parameters());
    state.opt.t = 17;
    state.next_epoch = 5;
    state.best_miou = 0.625;
    state.best_epoch = 3;
    SplitMix64 rng(102);
    for (auto& m : state.opt.m) {
        for (double& v : m) v = rng.uniform(-1, 1);
    }
    for (auto& v2 : state.opt.v) {
        for (double& v : v2) v = rng.uniform(0, 1);
    }
    AugmentConfig aug;
    aug.output_size = 32;
    aug.normalize_mean = {0.5, 0.5, 0.5};
    aug.normalize_std = {0.25, 0.25, 0.25};
    aug.master_seed = 9;

    const auto path = tmp.path() / "model.ckpt";
    save_train_checkpoint(path, model, &state, &aug);
    const LoadedCheckpoint loaded = load_train_checkpoint(path);

    CHECK(loaded.model.config().num_classes == cfg.num_classes);
    CHECK(loaded.model.config().encoder_widths == cfg.encoder_widths);
    REQUIRE(loaded.model.parameters().size() == model.parameters().size());
    for (size_t i = 0; i < model.parameters().size(); ++i) {
        const auto& a = model.parameters()[i].second;
        const auto& b = loaded.model.parameters()[i].second;
        for (int64_t j = 0; j < a.numel(); ++j) {
            CHECK(a.data()[static_cast<size_t>(j)] == b.data()[static_cast<size_t>(j)]);
        }
    }
    REQUIRE(loaded.has_state);
    CHECK(loaded.state.next_epoch == 5);
    CHECK(loaded.state.best_miou == 0.625);
    CHECK(loaded.state.best_epoch == 3);
    CHECK(loaded.state.opt.t == 17);
    for (size_t i = 0; i < state.opt.m.size(); ++i) {
        CHECK(loaded.state.opt.m[i] == state.opt.m[i]);
        CHECK(loaded.state.opt.v[i] == state.opt.v[i]);
    }
    REQUIRE(loaded.has_augment);
    CHECK(loaded.augment.output_size == 32);
    CHECK(loaded.augment.master_seed == 9);
    CHECK(loaded.augment.normalize_std[1] == 0.25);

    // file-level byte-exactness through a save of the loaded state
    const auto path2 = tmp.path() / "model2.ckpt";
    save_train_checkpoint(path2, loaded.model, &loaded.state, &loaded.augment);
    CHECK(read_bytes(path) == read_bytes(path2));
}

TEST_CASE("train checkpoint: eval-only checkpoints carry no state") {
    tu::TempDir tmp;
    UNetModel model = UNetModel::build(micro_config(), 1);
    const auto path = tmp.path() / "eval.ckpt";
    save_train_checkpoint(path, model, nullptr);
    const LoadedCheckpoint loaded = load_train_checkpoint(path);
    CHECK_FALSE(loaded.has_state);
    CHECK_FALSE(loaded.has_augment);
    CHECK(loaded.model.count_params() == model.count_params());
}

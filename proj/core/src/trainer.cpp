#include "segforge/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <unordered_map>

#include "config_json.hpp"
#include "segforge/checkpoint.hpp"
#include "segforge/error.hpp"
#include "segforge/parallel.hpp"
#include "segforge/rng.hpp"

namespace segforge {

void TrainConfig::validate() const {
    if (!(learning_rate > 0)) throw ConfigError("train.learning_rate must be > 0");
    if (epochs < 0) throw ConfigError("train.epochs must be >= 0");
    if (micro_batch < 1) throw ConfigError("train.micro_batch must be >= 1");
    if (accumulation_steps < 1) throw ConfigError("train.accumulation_steps must be >= 1");
    if (!(clip_threshold > 0)) throw ConfigError("train.clip_threshold must be > 0");
    if (adam_beta1 < 0 || adam_beta1 >= 1 || adam_beta2 < 0 || adam_beta2 >= 1) {
        throw ConfigError("train.adam betas must lie in [0,1)");
    }
    if (!(adam_eps > 0)) throw ConfigError("train.adam_eps must be > 0");
    if (workers < 0) throw ConfigError("train.workers must be >= 0");
}

Tensor image_to_tensor(const Image& image) {
    const int64_t h = image.height, w = image.width;
    Tensor t = Tensor::zeros({1, 3, h, w});
    auto out = t.data();
    for (int64_t y = 0; y < h; ++y) {
        for (int64_t x = 0; x < w; ++x) {
            for (int64_t c = 0; c < 3; ++c) {
                out[static_cast<size_t>(c * h * w + y * w + x)] =
                    image.data[static_cast<size_t>((y * w + x) * 3 + c)];
            }
        }
    }
    return t;
}

ClassMask argmax_mask(const Tensor& logits) {
    if (logits.rank() != 4 || logits.dim(0) != 1) {
        throw ShapeError("argmax_mask: expected (1,C,H,W) logits");
    }
    const int64_t c = logits.dim(1), h = logits.dim(2), w = logits.dim(3);
    ClassMask mask = ClassMask::filled(static_cast<int>(h), static_cast<int>(w), 0);
    auto data = logits.data();
    for (int64_t p = 0; p < h * w; ++p) {
        double best = data[static_cast<size_t>(p)];
        int64_t best_c = 0;
        for (int64_t ch = 1; ch < c; ++ch) {
            const double v = data[static_cast<size_t>(ch * h * w + p)];
            if (v > best) {
                best = v;
                best_c = ch;
            }
        }
        mask.values[static_cast<size_t>(p)] = static_cast<uint8_t>(best_c);
    }
    return mask;
}

namespace {

struct SampleResult {
    std::vector<std::vector<double>> grads; // aligned with model parameters
    double loss = 0, iou = 0, dice = 0, ce = 0;
};

SampleResult run_training_sample(const UNetModel& model, const ImageSample& sample, int epoch,
                                 const LossConfig& loss_cfg, const AugmentConfig& aug_cfg) {
    const ImageSample aug = augment_pair(sample, static_cast<uint64_t>(epoch), aug_cfg);
    Graph g;
    const Tensor logits = model.forward(g, image_to_tensor(aug.image));
    const Tensor probs = g.softmax_channels(logits);
    const OneHotTarget target = one_hot(aug.mask, model.config().num_classes);
    const CombinedLoss cl = combined_loss(g, target, probs, loss_cfg);

    SampleResult r;
    r.loss = cl.total.value();
    r.iou = cl.iou.value();
    r.dice = cl.dice.value();
    r.ce = cl.ce.value();
    if (!std::isfinite(r.loss)) {
        throw NumericError("non-finite loss on sample '" + sample.id + "' at epoch " +
                           std::to_string(epoch));
    }
    g.backward(cl.total, /*write_leaf_grads=*/false);
    const auto& params = model.parameters();
    r.grads.resize(params.size());
    for (size_t i = 0; i < params.size(); ++i) {
        const std::vector<double>* gp = g.grad_of(params[i].second);
        if (gp != nullptr) {
            r.grads[i] = *gp;
        } else {
            r.grads[i].assign(static_cast<size_t>(params[i].second.numel()), 0.0);
        }
    }
    return r;
}

std::vector<size_t> shuffled_order(size_t n, uint64_t seed, int epoch) {
    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    SplitMix64 rng(mix64(seed ^ mix64(0x45504f43ULL + static_cast<uint64_t>(epoch))));
    for (size_t i = n; i > 1; --i) {
        const size_t j = static_cast<size_t>(rng.uniform_int(0, static_cast<int64_t>(i) - 1));
        std::swap(order[i - 1], order[j]);
    }
    return order;
}

} // namespace

EpochStats train_epoch(UNetModel& model, const std::vector<ImageSample>& train_set,
                       const LossConfig& loss_cfg, const AugmentConfig& aug_cfg,
                       const TrainConfig& cfg, OptimizerState& opt, int epoch) {
    cfg.validate();
    loss_cfg.validate(model.config().num_classes);
    aug_cfg.validate();
    if (train_set.empty()) throw ConfigError("train_epoch: empty training set");

    auto& params = model.parameters();
    if (!opt.initialized()) opt.init(params);

    const size_t n = train_set.size();
    const std::vector<size_t> order = shuffled_order(n, cfg.seed, epoch);
    const size_t group = static_cast<size_t>(cfg.micro_batch) * static_cast<size_t>(cfg.accumulation_steps);
    const int workers = std::min(resolve_workers(cfg.workers), cfg.micro_batch);

    EpochStats sums;
    size_t counted = 0;
    std::vector<SampleResult> results;
    for (size_t start = 0; start < n; start += group) {
        const size_t n_eff = std::min(group, n - start);
        const double inv = 1.0 / static_cast<double>(n_eff);
        zero_grads(params);
        for (size_t mstart = start; mstart < start + n_eff; mstart += static_cast<size_t>(cfg.micro_batch)) {
            const size_t msize = std::min(static_cast<size_t>(cfg.micro_batch), start + n_eff - mstart);
            results.assign(msize, {});
            parallel_for(static_cast<int64_t>(msize), workers, [&](int64_t i) {
                results[static_cast<size_t>(i)] = run_training_sample(
                    model, train_set[order[mstart + static_cast<size_t>(i)]], epoch, loss_cfg, aug_cfg);
            });
            // reduce in sample order: bit-identical for any worker count
            for (size_t i = 0; i < msize; ++i) {
                const SampleResult& r = results[i];
                for (size_t p = 0; p < params.size(); ++p) {
                    auto dst = params[p].second.grad();
                    const auto& src = r.grads[p];
                    for (size_t j = 0; j < src.size(); ++j) dst[j] += inv * src[j];
                }
                sums.loss += r.loss;
                sums.loss_iou += r.iou;
                sums.loss_dice += r.dice;
                sums.loss_ce += r.ce;
                ++counted;
            }
        }
        clip_gradients(params, cfg.clip_threshold);
        adam_step(params, opt, cfg.adam());
    }
    EpochStats stats;
    const double inv_count = 1.0 / static_cast<double>(counted);
    stats.loss = sums.loss * inv_count;
    stats.loss_iou = sums.loss_iou * inv_count;
    stats.loss_dice = sums.loss_dice * inv_count;
    stats.loss_ce = sums.loss_ce * inv_count;
    return stats;
}

ValidationResult validate(const UNetModel& model, const std::vector<ImageSample>& val_set,
                          const AugmentConfig& aug_cfg, int workers) {
    if (val_set.empty()) throw ConfigError("validate: empty validation set");
    const int c = model.config().num_classes;
    std::vector<ClassMask> preds(val_set.size());
    parallel_for(static_cast<int64_t>(val_set.size()), resolve_workers(workers), [&](int64_t i) {
        const ImageSample s = normalize(val_set[static_cast<size_t>(i)], aug_cfg);
        Graph g;
        const Tensor logits = model.forward(g, image_to_tensor(s.image));
        preds[static_cast<size_t>(i)] = argmax_mask(logits);
    });
    ValidationResult out;
    out.cm = ConfusionMatrix(c);
    for (size_t i = 0; i < val_set.size(); ++i) out.cm.accumulate(val_set[i].mask, preds[i]);
    out.iou = per_class_iou(out.cm);
    out.dice = per_class_dice(out.cm);
    out.miou = mean_foreground(out.iou);
    out.mdice = mean_foreground(out.dice);
    return out;
}

namespace {

std::string csv_row(const EpochRecord& rec) {
    char buf[256];
    if (rec.trained) {
        std::snprintf(buf, sizeof(buf), "%d,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f", rec.epoch,
                      rec.stats.loss, rec.stats.loss_iou, rec.stats.loss_dice, rec.stats.loss_ce,
                      rec.miou, rec.mdice);
    } else {
        std::snprintf(buf, sizeof(buf), "%d,,,,,%.6f,%.6f", rec.epoch, rec.miou, rec.mdice);
    }
    return buf;
}

jsonu::json checkpoint_meta(const UNetModel& model, const TrainState* state,
                            const AugmentConfig* augment) {
    jsonu::json meta;
    meta["kind"] = "segforge-checkpoint";
    meta["model"] = jsonu::to_json(model.config());
    if (augment != nullptr) meta["augment"] = jsonu::to_json(*augment);
    if (state != nullptr) {
        jsonu::json train;
        train["next_epoch"] = state->next_epoch;
        train["best_miou"] = state->best_miou;
        train["best_epoch"] = state->best_epoch;
        train["adam_t"] = state->opt.t;
        meta["train"] = std::move(train);
    }
    return meta;
}

} // namespace

void save_train_checkpoint(const std::filesystem::path& path, const UNetModel& model,
                           const TrainState* state, const AugmentConfig* augment) {
    Checkpoint ckpt;
    ckpt.meta_json = checkpoint_meta(model, state, augment).dump();
    for (const auto& [name, t] : model.parameters()) ckpt.tensors.emplace_back(name, t);
    if (state != nullptr && state->opt.initialized()) {
        const auto& params = model.parameters();
        for (size_t i = 0; i < params.size(); ++i) {
            ckpt.tensors.emplace_back(
                "adam.m." + params[i].first,
                Tensor::from_data({static_cast<int64_t>(state->opt.m[i].size())}, state->opt.m[i]));
            ckpt.tensors.emplace_back(
                "adam.v." + params[i].first,
                Tensor::from_data({static_cast<int64_t>(state->opt.v[i].size())}, state->opt.v[i]));
        }
    }
    save_checkpoint(path, ckpt);
}

LoadedCheckpoint load_train_checkpoint(const std::filesystem::path& path) {
    const Checkpoint ckpt = load_checkpoint(path);
    jsonu::json meta;
    try {
        meta = jsonu::json::parse(ckpt.meta_json);
    } catch (const jsonu::json::parse_error&) {
        throw MalformedFileError("checkpoint metadata is not valid JSON: " + path.string());
    }
    jsonu::ObjectReader r(meta, "checkpoint");
    if (r.get<std::string>("kind", "") != "segforge-checkpoint") {
        throw MalformedFileError("unexpected checkpoint kind in " + path.string());
    }
    const UNetConfig cfg = jsonu::unet_from_json(r.child("model"));

    LoadedCheckpoint out;
    out.model = UNetModel::build(cfg, 0);

    std::unordered_map<std::string, const Tensor*> by_name;
    for (const auto& [name, t] : ckpt.tensors) by_name[name] = &t;

    auto& params = out.model.parameters();
    for (auto& [name, t] : params) {
        auto it = by_name.find(name);
        if (it == by_name.end()) {
            throw MalformedFileError("checkpoint misses parameter '" + name + "': " + path.string());
        }
        if (!same_shape(it->second->shape(), t.shape())) {
            throw MalformedFileError("checkpoint parameter '" + name + "' has wrong shape: " + path.string());
        }
        std::copy(it->second->data().begin(), it->second->data().end(), t.data().begin());
    }

    if (r.has_child("augment")) {
        out.augment = jsonu::augment_from_json(r.child("augment"));
        out.has_augment = true;
    }
    if (r.has_child("train")) {
        jsonu::ObjectReader tr(r.child("train"), "checkpoint.train");
        out.state.next_epoch = tr.get("next_epoch", 1);
        out.state.best_miou = tr.get("best_miou", -1.0);
        out.state.best_epoch = tr.get("best_epoch", 0);
        const int64_t adam_t = tr.get<int64_t>("adam_t", 0);
        tr.done();
        out.state.opt.init(params);
        out.state.opt.t = adam_t;
        for (size_t i = 0; i < params.size(); ++i) {
            for (const char* kind : {"m", "v"}) {
                auto it = by_name.find(std::string("adam.") + kind + "." + params[i].first);
                if (it == by_name.end()) continue; // fresh-state checkpoint
                auto& dst = kind[0] == 'm' ? out.state.opt.m[i] : out.state.opt.v[i];
                if (it->second->data().size() != dst.size()) {
                    throw MalformedFileError("checkpoint moment shape mismatch: " + path.string());
                }
                std::copy(it->second->data().begin(), it->second->data().end(), dst.begin());
            }
        }
        out.has_state = true;
    }
    r.done();
    return out;
}

FitResult fit(UNetModel& model, const std::vector<ImageSample>& train_set,
              const std::vector<ImageSample>& val_set, const LossConfig& loss_cfg,
              const AugmentConfig& aug_cfg, const TrainConfig& cfg, TrainState& state,
              const FitOptions& options) {
    const int c = model.config().num_classes;
    cfg.validate();
    loss_cfg.validate(c);
    aug_cfg.validate();

    const bool files = !options.out_dir.empty();
    std::ofstream log;
    std::ofstream plot;
    if (files) {
        std::error_code ec;
        std::filesystem::create_directories(options.out_dir, ec);
        if (ec) throw IoError("cannot create output dir " + options.out_dir.string());
        const bool fresh = state.next_epoch <= 1;
        log.open(options.out_dir / "log.csv", fresh ? std::ios::trunc : std::ios::app);
        if (!log) throw IoError("cannot open log.csv in " + options.out_dir.string());
        if (fresh) log << "epoch,L,L_iou,L_dice,L_ce,mIoU,mDice\n";
        if (options.emit_plot_data) {
            plot.open(options.out_dir / "plot_per_class.csv", fresh ? std::ios::trunc : std::ios::app);
            if (!plot) throw IoError("cannot open plot_per_class.csv in " + options.out_dir.string());
            if (fresh) plot << "epoch,class,iou,dice\n";
        }
    }

    FitResult result;
    const std::vector<std::string> names = report_class_names(c);

    auto record = [&](EpochRecord rec) {
        if (files) {
            log << csv_row(rec) << "\n";
            log.flush();
            if (options.emit_plot_data) {
                for (int k = 1; k < c; ++k) {
                    plot << rec.epoch << "," << names[static_cast<size_t>(k - 1)] << ",";
                    if (rec.iou[static_cast<size_t>(k)]) {
                        char b[32];
                        std::snprintf(b, sizeof(b), "%.6f", *rec.iou[static_cast<size_t>(k)]);
                        plot << b;
                    }
                    plot << ",";
                    if (rec.dice[static_cast<size_t>(k)]) {
                        char b[32];
                        std::snprintf(b, sizeof(b), "%.6f", *rec.dice[static_cast<size_t>(k)]);
                        plot << b;
                    }
                    plot << "\n";
                }
                plot.flush();
            }
        }
        result.history.push_back(std::move(rec));
    };

    auto checkpoint = [&](bool best_updated) {
        if (!files) return;
        save_train_checkpoint(options.out_dir / "last.ckpt", model, &state, &aug_cfg);
        if (best_updated) save_train_checkpoint(options.out_dir / "best.ckpt", model, &state, &aug_cfg);
    };

    auto run_validation = [&](int epoch, bool trained, const EpochStats& stats) {
        const ValidationResult val = validate(model, val_set, aug_cfg, cfg.workers);
        EpochRecord rec;
        rec.epoch = epoch;
        rec.trained = trained;
        rec.stats = stats;
        rec.miou = val.miou;
        rec.mdice = val.mdice;
        rec.iou = val.iou;
        rec.dice = val.dice;
        record(std::move(rec));
        bool best = false;
        if (val.miou > state.best_miou) {
            state.best_miou = val.miou;
            state.best_epoch = epoch;
            best = true;
        }
        return best;
    };

    if (cfg.epochs == 0) {
        const bool best = run_validation(0, false, {});
        checkpoint(best);
    } else {
        for (int epoch = state.next_epoch; epoch <= cfg.epochs; ++epoch) {
            const EpochStats stats = train_epoch(model, train_set, loss_cfg, aug_cfg, cfg, state.opt, epoch);
            const bool best = run_validation(epoch, true, stats);
            state.next_epoch = epoch + 1;
            checkpoint(best);
        }
    }
    result.best_miou = state.best_miou;
    result.best_epoch = state.best_epoch;
    return result;
}

InferenceReport measure_inference(const UNetModel& model, const std::vector<ImageSample>& samples,
                                  const AugmentConfig& aug_cfg, int repetitions) {
    if (repetitions < 1) throw ConfigError("measure_inference: repetitions must be >= 1");
    if (samples.empty()) throw ConfigError("measure_inference: empty sample batch");
    std::vector<Tensor> inputs;
    inputs.reserve(samples.size());
    for (const ImageSample& s : samples) inputs.push_back(image_to_tensor(normalize(s, aug_cfg).image));

    auto run_batch = [&] {
        for (const Tensor& t : inputs) {
            Graph g;
            model.forward(g, t);
        }
    };
    run_batch(); // warmup

    const auto t0 = std::chrono::steady_clock::now();
    for (int r = 0; r < repetitions; ++r) run_batch();
    const auto t1 = std::chrono::steady_clock::now();

    InferenceReport report;
    report.mean_seconds_per_batch =
        std::chrono::duration<double>(t1 - t0).count() / static_cast<double>(repetitions);
    report.batch_size = static_cast<int>(samples.size());
    report.repetitions = repetitions;
    report.params = model.count_params();
    const Image& first = samples.front().image;
    if (first.height == first.width && first.height % 16 == 0) {
        report.flops_per_image = estimate_flops(model.config(), first.height);
    }
    return report;
}

} // namespace segforge

// segforge CLI: dataset generation, training, evaluation, model accounting
// and augmentation previews behind one executable.
//
// Exit codes: 0 success, 1 runtime/numerical failure, 2 usage/config error.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "segforge/augment.hpp"
#include "segforge/dataset.hpp"
#include "segforge/error.hpp"
#include "segforge/image_io.hpp"
#include "segforge/metrics.hpp"
#include "segforge/rng.hpp"
#include "segforge/run_config.hpp"
#include "segforge/trainer.hpp"
#include "segforge/unet.hpp"

namespace {

using namespace segforge;

std::optional<uint64_t> env_seed() {
    const char* v = std::getenv("SEGFORGE_SEED");
    if (v == nullptr || *v == '\0') return std::nullopt;
    char* end = nullptr;
    const unsigned long long parsed = std::strtoull(v, &end, 10);
    if (end == nullptr || *end != '\0') {
        throw ConfigError("SEGFORGE_SEED must be an unsigned integer, got '" + std::string(v) + "'");
    }
    return static_cast<uint64_t>(parsed);
}

/// flag > environment > config file
std::optional<uint64_t> resolve_seed_override(const std::optional<uint64_t>& flag) {
    if (flag) return flag;
    return env_seed();
}

struct TrainArgs {
    std::string config;
    std::string out;
    std::string resume;
    std::optional<uint64_t> seed;
    std::optional<int> epochs;
    std::optional<int> workers;
};

int cmd_gen_data(const std::string& spec_path, const std::string& out_dir) {
    const SyntheticSpec spec = parse_synthetic_spec_file(spec_path);
    const DatasetManifest manifest = generate(spec, out_dir);
    std::cout << "wrote " << manifest.entries.size() << " samples (" << manifest.num_classes
              << " classes) under " << out_dir << "\n";
    return 0;
}

int cmd_train(const TrainArgs& args) {
    RunConfig cfg = parse_run_config_file(args.config, resolve_seed_override(args.seed));
    if (args.epochs) cfg.train.epochs = *args.epochs;
    if (args.workers) cfg.train.workers = *args.workers;
    cfg.validate();
    if (cfg.data_root.empty()) throw ConfigError("config.data_root must point at a dataset");

    const DatasetManifest manifest = load_manifest(cfg.data_root / "manifest.json");
    if (manifest.num_classes != cfg.model.num_classes) {
        throw ConfigError("model.num_classes (" + std::to_string(cfg.model.num_classes) +
                          ") does not match dataset num_classes (" +
                          std::to_string(manifest.num_classes) + ")");
    }
    const std::vector<ImageSample> train_set = load_split(manifest, "train");
    const std::vector<ImageSample> val_set = load_split(manifest, "val");

    UNetModel model;
    TrainState state;
    if (!args.resume.empty()) {
        LoadedCheckpoint loaded = load_train_checkpoint(args.resume);
        if (!loaded.has_state) {
            throw ConfigError("checkpoint '" + args.resume + "' carries no training state to resume");
        }
        if (loaded.model.config().num_classes != manifest.num_classes) {
            throw ConfigError("checkpoint num_classes does not match dataset");
        }
        model = std::move(loaded.model);
        state = std::move(loaded.state);
    } else {
        model = UNetModel::build(cfg.model, mix64(cfg.seed ^ 0x696e6974ULL));
    }

    std::filesystem::create_directories(args.out);
    write_run_config(std::filesystem::path(args.out) / "resolved_config.json", cfg);

    FitOptions options;
    options.out_dir = args.out;
    options.emit_plot_data = cfg.emit_plot_data;
    const FitResult result = fit(model, train_set, val_set, cfg.loss, cfg.augment, cfg.train,
                                 state, options);
    std::printf("best mIoU %.6f at epoch %d; wrote %s/log.csv\n", result.best_miou,
                result.best_epoch, args.out.c_str());
    return 0;
}

int cmd_eval(const std::string& ckpt_path, const std::string& data_dir, const std::string& split,
             const std::string& report_dir) {
    const LoadedCheckpoint loaded = load_train_checkpoint(ckpt_path);
    const DatasetManifest manifest = load_manifest(std::filesystem::path(data_dir) / "manifest.json");
    if (manifest.num_classes != loaded.model.config().num_classes) {
        throw ConfigError("checkpoint num_classes (" +
                          std::to_string(loaded.model.config().num_classes) +
                          ") does not match dataset (" + std::to_string(manifest.num_classes) + ")");
    }
    const std::vector<ImageSample> samples = load_split(manifest, split);
    if (samples.empty()) throw ConfigError("split '" + split + "' is empty");

    const AugmentConfig aug = loaded.has_augment ? loaded.augment : AugmentConfig{};
    const ValidationResult val = validate(loaded.model, samples, aug, 0);

    ReportMetadata meta;
    meta.num_classes = manifest.num_classes;
    meta.params = loaded.model.count_params();
    const Image& first = samples.front().image;
    if (first.height == first.width && first.height % 16 == 0) {
        meta.flops = estimate_flops(loaded.model.config(), first.height);
    }
    const Report report = render_report(val.iou, val.dice, meta);

    std::filesystem::create_directories(report_dir);
    auto write_text = [](const std::filesystem::path& p, const std::string& s) {
        std::ofstream f(p, std::ios::binary);
        if (!f) throw IoError("cannot open for writing: " + p.string());
        f << s;
    };
    write_text(std::filesystem::path(report_dir) / "report.csv", report.csv);
    write_text(std::filesystem::path(report_dir) / "report.txt", report.text);
    std::printf("mIoU %.6f mDice %.6f\n", val.miou, val.mdice);
    return 0;
}

int cmd_model_info(const std::string& config_path, int input_side, bool time_it,
                   const std::string& ckpt_path, int batch, int reps) {
    const RunConfig cfg = parse_run_config_file(config_path, std::nullopt);
    UNetModel model;
    if (!ckpt_path.empty()) {
        model = load_train_checkpoint(ckpt_path).model;
    } else {
        model = UNetModel::build(cfg.model, mix64(cfg.seed ^ 0x696e6974ULL));
    }
    const int64_t params = model.count_params();
    const int64_t flops = estimate_flops(model.config(), input_side);

    std::string time_cell = "-";
    if (time_it) {
        // synthetic timing batch at the requested input size
        std::vector<ImageSample> batch_samples;
        SplitMix64 rng(7);
        for (int i = 0; i < batch; ++i) {
            ImageSample s;
            s.id = "timing_" + std::to_string(i);
            s.image = Image::filled(input_side, input_side, 0.0);
            for (double& v : s.image.data) v = rng.next_double();
            s.mask = ClassMask::filled(input_side, input_side, 0);
            batch_samples.push_back(std::move(s));
        }
        const InferenceReport r = measure_inference(model, batch_samples, cfg.augment, reps);
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.2fs", r.mean_seconds_per_batch);
        time_cell = buf;
    }

    std::printf("%-12s %-16s %-12s %s\n", "Model Name", "# of Parameters", "FLOPS", "Inference Time");
    char pbuf[32];
    if (params >= 1000000) {
        std::snprintf(pbuf, sizeof(pbuf), "%.1fM", static_cast<double>(params) / 1e6);
    } else {
        std::snprintf(pbuf, sizeof(pbuf), "%lld", static_cast<long long>(params));
    }
    char fbuf[32];
    if (flops >= 1000000000) {
        std::snprintf(fbuf, sizeof(fbuf), "%.2f G", static_cast<double>(flops) / 1e9);
    } else {
        std::snprintf(fbuf, sizeof(fbuf), "%.2f M", static_cast<double>(flops) / 1e6);
    }
    std::printf("%-12s %-16s %-12s %s\n", "UNet CNN", pbuf, fbuf, time_cell.c_str());
    std::printf("params_exact %lld\nflops_exact %lld at input %d\n",
                static_cast<long long>(params), static_cast<long long>(flops), input_side);
    return 0;
}

int cmd_augment_preview(const std::string& config_path, const std::string& sample_id, int epoch,
                        const std::string& out_dir) {
    const RunConfig cfg = parse_run_config_file(config_path, std::nullopt);
    if (cfg.data_root.empty()) throw ConfigError("config.data_root must point at a dataset");
    const DatasetManifest manifest = load_manifest(cfg.data_root / "manifest.json");
    const ManifestEntry* entry = nullptr;
    for (const ManifestEntry& e : manifest.entries) {
        if (e.id == sample_id) {
            entry = &e;
            break;
        }
    }
    if (entry == nullptr) throw ConfigError("sample '" + sample_id + "' not found in manifest");
    const ImageSample sample = load_sample(manifest.root / entry->image, manifest.root / entry->mask,
                                           entry->id, manifest.num_classes);
    const ImageSample augmented = augment_pair(sample, static_cast<uint64_t>(epoch), cfg.augment);
    const ImageSample viewable = denormalize(augmented, cfg.augment);

    std::filesystem::create_directories(out_dir);
    const std::string stem = sample_id + "_epoch" + std::to_string(epoch);
    const auto image_path = std::filesystem::path(out_dir) / (stem + ".ppm");
    const auto mask_path = std::filesystem::path(out_dir) / (stem + "_mask.pgm");
    write_ppm(image_path, viewable.image);
    write_pgm(mask_path, viewable.mask);
    std::cout << "wrote " << image_path.string() << " and " << mask_path.string() << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"segforge: semantic-segmentation training toolkit"};
    app.require_subcommand(1);

    std::string spec_path, out_dir;
    auto* gen = app.add_subcommand("gen-data", "Generate a synthetic dataset");
    gen->add_option("--spec", spec_path, "SyntheticSpec JSON file")->required();
    gen->add_option("--out", out_dir, "Output dataset directory")->required();

    TrainArgs train_args;
    auto* train = app.add_subcommand("train", "Train a model from a run config");
    train->add_option("--config", train_args.config, "Run config JSON")->required();
    train->add_option("--out", train_args.out, "Output directory")->required();
    train->add_option("--resume", train_args.resume, "Checkpoint to resume from");
    train->add_option("--seed", train_args.seed, "Seed override (flag > env > config)");
    train->add_option("--epochs", train_args.epochs, "Epoch count override");
    train->add_option("--workers", train_args.workers, "Worker thread cap");

    std::string eval_ckpt, eval_data, eval_split = "val", eval_report;
    auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset split");
    eval->add_option("--checkpoint", eval_ckpt, "Checkpoint file")->required();
    eval->add_option("--data", eval_data, "Dataset directory")->required();
    eval->add_option("--split", eval_split, "Split name (train|val|test)");
    eval->add_option("--report", eval_report, "Report output directory")->required();

    std::string info_config, info_ckpt;
    int info_input = 512, info_batch = 6, info_reps = 5;
    bool info_time = false;
    auto* info = app.add_subcommand("model-info", "Parameter and FLOP accounting");
    info->add_option("--config", info_config, "Run config JSON")->required();
    info->add_option("--input", info_input, "Input side for the FLOP estimate");
    info->add_flag("--time", info_time, "Measure inference latency");
    info->add_option("--checkpoint", info_ckpt, "Optional checkpoint to time/count");
    info->add_option("--batch", info_batch, "Timing batch size");
    info->add_option("--reps", info_reps, "Timing repetitions");

    std::string prev_config, prev_sample, prev_out;
    int prev_epoch = 0;
    auto* prev = app.add_subcommand("augment-preview", "Write one augmented sample for inspection");
    prev->add_option("--config", prev_config, "Run config JSON")->required();
    prev->add_option("--sample", prev_sample, "Sample id")->required();
    prev->add_option("--epoch", prev_epoch, "Epoch used for seed derivation");
    prev->add_option("--out", prev_out, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (gen->parsed()) return cmd_gen_data(spec_path, out_dir);
        if (train->parsed()) return cmd_train(train_args);
        if (eval->parsed()) return cmd_eval(eval_ckpt, eval_data, eval_split, eval_report);
        if (info->parsed()) return cmd_model_info(info_config, info_input, info_time, info_ckpt,
                                                  info_batch, info_reps);
        if (prev->parsed()) return cmd_augment_preview(prev_config, prev_sample, prev_epoch, prev_out);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ShapeError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

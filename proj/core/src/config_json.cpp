#include "config_json.hpp"

namespace segforge::jsonu {

json to_json(const SyntheticSpec& spec) {
    json j;
    j["num_train"] = spec.num_train;
    j["num_val"] = spec.num_val;
    j["num_test"] = spec.num_test;
    j["image_side"] = spec.image_side;
    j["num_foreground_classes"] = spec.num_foreground_classes;
    j["shapes_min"] = spec.shapes_min;
    j["shapes_max"] = spec.shapes_max;
    j["background_noise"] = spec.background_noise;
    j["seed"] = spec.seed;
    return j;
}

SyntheticSpec synthetic_from_json(const json& j) {
    ObjectReader r(j, "synthetic");
    SyntheticSpec s;
    s.num_train = r.get("num_train", s.num_train);
    s.num_val = r.get("num_val", s.num_val);
    s.num_test = r.get("num_test", s.num_test);
    s.image_side = r.get("image_side", s.image_side);
    s.num_foreground_classes = r.get("num_foreground_classes", s.num_foreground_classes);
    s.shapes_min = r.get("shapes_min", s.shapes_min);
    s.shapes_max = r.get("shapes_max", s.shapes_max);
    s.background_noise = r.get("background_noise", s.background_noise);
    s.seed = r.get("seed", s.seed);
    r.done();
    s.validate();
    return s;
}

json to_json(const AugmentConfig& cfg) {
    json j;
    j["crop_area_range"] = {cfg.crop_area_range.first, cfg.crop_area_range.second};
    j["output_size"] = cfg.output_size;
    j["crop_aspect_range"] = {cfg.crop_aspect_range.first, cfg.crop_aspect_range.second};
    j["flip_prob"] = cfg.flip_prob;
    j["rotation_range_deg"] = {cfg.rotation_range_deg.first, cfg.rotation_range_deg.second};
    j["photometric_prob"] = cfg.photometric_prob;
    j["brightness_delta_max"] = cfg.brightness_delta_max;
    j["contrast_factor_range"] = {cfg.contrast_factor_range.first, cfg.contrast_factor_range.second};
    j["normalize_mean"] = cfg.normalize_mean;
    j["normalize_std"] = cfg.normalize_std;
    j["master_seed"] = cfg.master_seed;
    return j;
}

namespace {
std::pair<double, double> read_pair(ObjectReader& r, const std::string& key,
                                    std::pair<double, double> fallback) {
    auto v = r.get<std::vector<double>>(key, {fallback.first, fallback.second});
    if (v.size() != 2) throw ConfigError("augment." + key + " must hold exactly 2 numbers");
    return {v[0], v[1]};
}
} // namespace

AugmentConfig augment_from_json(const json& j) {
    ObjectReader r(j, "augment");
    AugmentConfig c;
    c.crop_area_range = read_pair(r, "crop_area_range", c.crop_area_range);
    c.output_size = r.get("output_size", c.output_size);
    c.crop_aspect_range = read_pair(r, "crop_aspect_range", c.crop_aspect_range);
    c.flip_prob = r.get("flip_prob", c.flip_prob);
    c.rotation_range_deg = read_pair(r, "rotation_range_deg", c.rotation_range_deg);
    c.photometric_prob = r.get("photometric_prob", c.photometric_prob);
    c.brightness_delta_max = r.get("brightness_delta_max", c.brightness_delta_max);
    c.contrast_factor_range = read_pair(r, "contrast_factor_range", c.contrast_factor_range);
    auto mean = r.get<std::vector<double>>("normalize_mean",
                                           {c.normalize_mean[0], c.normalize_mean[1], c.normalize_mean[2]});
    auto std_ = r.get<std::vector<double>>("normalize_std",
                                           {c.normalize_std[0], c.normalize_std[1], c.normalize_std[2]});
    if (mean.size() != 3 || std_.size() != 3) {
        throw ConfigError("augment.normalize_mean/std must hold exactly 3 numbers");
    }
    std::copy(mean.begin(), mean.end(), c.normalize_mean.begin());
    std::copy(std_.begin(), std_.end(), c.normalize_std.begin());
    c.master_seed = r.get("master_seed", c.master_seed);
    r.done();
    c.validate();
    return c;
}

json to_json(const UNetConfig& cfg) {
    json j;
    j["in_channels"] = cfg.in_channels;
    j["num_classes"] = cfg.num_classes;
    j["encoder_widths"] = cfg.encoder_widths;
    j["bottleneck_width"] = cfg.bottleneck_width;
    j["kernel_size"] = cfg.kernel_size;
    j["convs_per_block"] = cfg.convs_per_block;
    return j;
}

UNetConfig unet_from_json(const json& j) {
    ObjectReader r(j, "model");
    UNetConfig c;
    c.in_channels = r.get("in_channels", c.in_channels);
    c.num_classes = r.get("num_classes", c.num_classes);
    auto widths = r.get<std::vector<int>>("encoder_widths",
                                          {c.encoder_widths[0], c.encoder_widths[1],
                                           c.encoder_widths[2], c.encoder_widths[3]});
    if (widths.size() != 4) throw ConfigError("model.encoder_widths must hold exactly 4 entries");
    std::copy(widths.begin(), widths.end(), c.encoder_widths.begin());
    c.bottleneck_width = r.get("bottleneck_width", c.bottleneck_width);
    c.kernel_size = r.get("kernel_size", c.kernel_size);
    c.convs_per_block = r.get("convs_per_block", c.convs_per_block);
    r.done();
    c.validate();
    return c;
}

json to_json(const LossConfig& cfg) {
    json j;
    j["lambda_iou"] = cfg.lambda_iou;
    j["lambda_dice"] = cfg.lambda_dice;
    j["lambda_ce"] = cfg.lambda_ce;
    j["class_weights"] = cfg.class_weights;
    j["exclude_background_from_overlap"] = cfg.exclude_background_from_overlap;
    j["smooth_eps"] = cfg.smooth_eps;
    return j;
}

LossConfig loss_from_json(const json& j, int num_classes) {
    ObjectReader r(j, "loss");
    LossConfig c = LossConfig::defaults(num_classes);
    c.lambda_iou = r.get("lambda_iou", c.lambda_iou);
    c.lambda_dice = r.get("lambda_dice", c.lambda_dice);
    c.lambda_ce = r.get("lambda_ce", c.lambda_ce);
    if (r.has("background_weight")) {
        c.class_weights[0] = r.get("background_weight", 0.15);
    }
    c.class_weights = r.get("class_weights", c.class_weights);
    c.exclude_background_from_overlap =
        r.get("exclude_background_from_overlap", c.exclude_background_from_overlap);
    c.smooth_eps = r.get("smooth_eps", c.smooth_eps);
    r.done();
    c.validate(num_classes);
    return c;
}

json to_json(const TrainConfig& cfg) {
    json j;
    j["learning_rate"] = cfg.learning_rate;
    j["epochs"] = cfg.epochs;
    j["micro_batch"] = cfg.micro_batch;
    j["accumulation_steps"] = cfg.accumulation_steps;
    j["clip_threshold"] = cfg.clip_threshold;
    j["adam_beta1"] = cfg.adam_beta1;
    j["adam_beta2"] = cfg.adam_beta2;
    j["adam_eps"] = cfg.adam_eps;
    j["seed"] = cfg.seed;
    j["workers"] = cfg.workers;
    return j;
}

TrainConfig train_from_json(const json& j) {
    ObjectReader r(j, "train");
    TrainConfig c;
    c.learning_rate = r.get("learning_rate", c.learning_rate);
    c.epochs = r.get("epochs", c.epochs);
    c.micro_batch = r.get("micro_batch", c.micro_batch);
    c.accumulation_steps = r.get("accumulation_steps", c.accumulation_steps);
    c.clip_threshold = r.get("clip_threshold", c.clip_threshold);
    c.adam_beta1 = r.get("adam_beta1", c.adam_beta1);
    c.adam_beta2 = r.get("adam_beta2", c.adam_beta2);
    c.adam_eps = r.get("adam_eps", c.adam_eps);
    c.seed = r.get("seed", c.seed);
    c.workers = r.get("workers", c.workers);
    r.done();
    c.validate();
    return c;
}

} // namespace segforge::jsonu

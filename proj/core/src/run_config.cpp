#include "segforge/run_config.hpp"

#include <fstream>

#include "config_json.hpp"
#include "segforge/rng.hpp"

namespace segforge {

void RunConfig::validate() const {
    synthetic.validate();
    augment.validate();
    model.validate();
    loss.validate(model.num_classes);
    train.validate();
}

void RunConfig::resolve_seeds() {
    if (augment.master_seed == 0) augment.master_seed = mix64(seed ^ 0x6175676dULL);
    if (train.seed == 0) train.seed = mix64(seed ^ 0x74726169ULL);
}

namespace {

RunConfig parse_doc(const jsonu::json& doc, std::optional<uint64_t> seed_override) {
    jsonu::ObjectReader r(doc, "config");
    RunConfig cfg;
    cfg.seed = r.get<uint64_t>("seed", cfg.seed);
    if (seed_override) cfg.seed = *seed_override;
    cfg.data_root = r.get<std::string>("data_root", "");
    if (r.has_child("synthetic")) cfg.synthetic = jsonu::synthetic_from_json(r.child("synthetic"));
    if (r.has_child("augment")) cfg.augment = jsonu::augment_from_json(r.child("augment"));
    if (r.has_child("model")) cfg.model = jsonu::unet_from_json(r.child("model"));
    if (r.has_child("loss")) {
        cfg.loss = jsonu::loss_from_json(r.child("loss"), cfg.model.num_classes);
    } else {
        cfg.loss = LossConfig::defaults(cfg.model.num_classes);
    }
    if (r.has_child("train")) cfg.train = jsonu::train_from_json(r.child("train"));
    if (r.has_child("report")) {
        jsonu::ObjectReader rp(r.child("report"), "report");
        cfg.emit_plot_data = rp.get("emit_plot_data", cfg.emit_plot_data);
        rp.done();
    }
    r.done();
    cfg.resolve_seeds();
    cfg.validate();
    return cfg;
}

} // namespace

RunConfig parse_run_config_file(const std::filesystem::path& path,
                                std::optional<uint64_t> seed_override) {
    return parse_doc(jsonu::parse_file(path), seed_override);
}

RunConfig parse_run_config_text(const std::string& text, std::optional<uint64_t> seed_override) {
    jsonu::json doc;
    try {
        doc = jsonu::json::parse(text);
    } catch (const jsonu::json::parse_error& e) {
        throw ConfigError(std::string("invalid JSON config: ") + e.what());
    }
    return parse_doc(doc, seed_override);
}

std::string run_config_to_text(const RunConfig& cfg) {
    jsonu::json doc;
    doc["seed"] = cfg.seed;
    doc["data_root"] = cfg.data_root.generic_string();
    doc["synthetic"] = jsonu::to_json(cfg.synthetic);
    doc["augment"] = jsonu::to_json(cfg.augment);
    doc["model"] = jsonu::to_json(cfg.model);
    doc["loss"] = jsonu::to_json(cfg.loss);
    doc["train"] = jsonu::to_json(cfg.train);
    jsonu::json report;
    report["emit_plot_data"] = cfg.emit_plot_data;
    doc["report"] = std::move(report);
    return doc.dump(2) + "\n";
}

void write_run_config(const std::filesystem::path& path, const RunConfig& cfg) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for writing: " + path.string());
    f << run_config_to_text(cfg);
    if (!f) throw IoError("write failed: " + path.string());
}

} // namespace segforge

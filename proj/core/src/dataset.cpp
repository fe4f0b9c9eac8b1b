#include "segforge/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "config_json.hpp"
#include "json_util.hpp"
#include "segforge/error.hpp"
#include "segforge/image_io.hpp"
#include "segforge/rng.hpp"

namespace segforge {

void SyntheticSpec::validate() const {
    if (num_train < 0 || num_val < 0 || num_test < 0) {
        throw ConfigError("synthetic.num_train/num_val/num_test must be >= 0");
    }
    if (image_side < 16 || image_side % 16 != 0) {
        throw ConfigError("synthetic.image_side must be a positive multiple of 16, got " +
                          std::to_string(image_side));
    }
    if (num_foreground_classes < 1 || num_foreground_classes > 15) {
        throw ConfigError("synthetic.num_foreground_classes must be in [1,15]");
    }
    if (shapes_min < 0 || shapes_min > shapes_max) {
        throw ConfigError("synthetic.shapes_min/shapes_max must satisfy 0 <= min <= max");
    }
    if (background_noise < 0 || background_noise > 0.5) {
        throw ConfigError("synthetic.background_noise must be in [0,0.5]");
    }
}

namespace {

enum class ShapeKind { circle, rectangle, triangle, ring, bar };

constexpr const char* kKindNames[5] = {"circle", "rectangle", "triangle", "ring", "bar"};

std::string class_name(int class_id) {
    const int kind = (class_id - 1) % 5;
    const int rep = (class_id - 1) / 5;
    std::string name = kKindNames[kind];
    if (rep > 0) name += std::to_string(rep + 1);
    return name;
}

void hsv_to_rgb(double h, double s, double v, double rgb[3]) {
    const double c = v * s;
    const double hp = h / 60.0;
    const double x = c * (1.0 - std::fabs(std::fmod(hp, 2.0) - 1.0));
    double r = 0, g = 0, b = 0;
    if (hp < 1) { r = c; g = x; }
    else if (hp < 2) { r = x; g = c; }
    else if (hp < 3) { g = c; b = x; }
    else if (hp < 4) { g = x; b = c; }
    else if (hp < 5) { r = x; b = c; }
    else { r = c; b = x; }
    const double m = v - c;
    rgb[0] = r + m;
    rgb[1] = g + m;
    rgb[2] = b + m;
}

struct Placement {
    double cx, cy, radius; // circumscribed radius, used for non-occlusion
};

bool overlaps(const std::vector<Placement>& placed, double cx, double cy, double r) {
    for (const Placement& p : placed) {
        const double dx = p.cx - cx, dy = p.cy - cy;
        const double rr = p.radius + r + 1.0;
        if (dx * dx + dy * dy < rr * rr) return true;
    }
    return false;
}

void paint_shape(ImageSample& s, SplitMix64& rng, int class_id, int num_fg,
                 std::vector<Placement>& placed) {
    const int side = s.image.width;
    const ShapeKind kind = static_cast<ShapeKind>((class_id - 1) % 5);

    // color: hue banded per class family when kinds repeat, otherwise free
    double hue;
    if (num_fg > 5) {
        const int band = (class_id - 1) / 5;
        hue = 120.0 * band + rng.uniform(5.0, 115.0);
    } else {
        hue = rng.uniform(0.0, 360.0);
    }
    double rgb[3];
    hsv_to_rgb(hue, rng.uniform(0.7, 1.0), rng.uniform(0.7, 1.0), rgb);

    // pose and extent; sized so boundary quantization stays small next to
    // the shape area
    const double theta = rng.uniform(0.0, std::numbers::pi);
    double a = 0, b = 0, radius = 0, inner = 0;
    switch (kind) {
        case ShapeKind::circle:
            radius = rng.uniform(0.14, 0.24) * side;
            break;
        case ShapeKind::rectangle:
            a = rng.uniform(0.14, 0.24) * side;
            b = rng.uniform(0.10, 0.17) * side;
            radius = std::sqrt(a * a + b * b);
            break;
        case ShapeKind::triangle:
            radius = rng.uniform(0.16, 0.26) * side;
            break;
        case ShapeKind::ring:
            radius = rng.uniform(0.14, 0.22) * side;
            inner = radius * rng.uniform(0.45, 0.6);
            break;
        case ShapeKind::bar:
            a = rng.uniform(0.20, 0.30) * side;
            b = rng.uniform(0.05, 0.08) * side;
            radius = std::sqrt(a * a + b * b);
            break;
    }

    // non-occluding placement; give up on this shape after 40 tries
    double cx = 0, cy = 0;
    bool found = false;
    for (int attempt = 0; attempt < 40 && !found; ++attempt) {
        const double margin = radius + 1.0;
        if (2 * margin >= side - 2) break;
        cx = rng.uniform(margin, side - 1 - margin);
        cy = rng.uniform(margin, side - 1 - margin);
        found = !overlaps(placed, cx, cy, radius);
    }
    if (!found) return;
    placed.push_back({cx, cy, radius});

    const double ct = std::cos(theta), st = std::sin(theta);
    const int y0 = std::max(0, static_cast<int>(std::floor(cy - radius)));
    const int y1 = std::min(side - 1, static_cast<int>(std::ceil(cy + radius)));
    const int x0 = std::max(0, static_cast<int>(std::floor(cx - radius)));
    const int x1 = std::min(side - 1, static_cast<int>(std::ceil(cx + radius)));

    // triangle vertices (circumscribed, rotated)
    double vx[3], vy[3];
    if (kind == ShapeKind::triangle) {
        for (int k = 0; k < 3; ++k) {
            const double ang = theta + std::numbers::pi * (0.5 + 2.0 * k / 3.0);
            vx[k] = cx + radius * std::cos(ang);
            vy[k] = cy + radius * std::sin(ang);
        }
    }

    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            const double dx = x - cx, dy = y - cy;
            bool inside = false;
            switch (kind) {
                case ShapeKind::circle:
                    inside = dx * dx + dy * dy <= radius * radius;
                    break;
                case ShapeKind::rectangle:
                case ShapeKind::bar: {
                    const double u = ct * dx + st * dy;
                    const double v = -st * dx + ct * dy;
                    inside = std::fabs(u) <= a && std::fabs(v) <= b;
                    break;
                }
                case ShapeKind::triangle: {
                    double sign = 0;
                    inside = true;
                    for (int k = 0; k < 3 && inside; ++k) {
                        const int j = (k + 1) % 3;
                        const double cross = (vx[j] - vx[k]) * (y - vy[k]) - (vy[j] - vy[k]) * (x - vx[k]);
                        if (cross == 0) continue;
                        if (sign == 0) sign = cross;
                        else if ((cross > 0) != (sign > 0)) inside = false;
                    }
                    break;
                }
                case ShapeKind::ring: {
                    const double d2 = dx * dx + dy * dy;
                    inside = d2 <= radius * radius && d2 >= inner * inner;
                    break;
                }
            }
            if (!inside) continue;
            for (int c = 0; c < 3; ++c) s.image.at(y, x, c) = rgb[c];
            s.mask.at(y, x) = static_cast<uint8_t>(class_id);
        }
    }
}

ImageSample render_image(const SyntheticSpec& spec, uint64_t seed, std::string id) {
    SplitMix64 rng(seed);
    const int side = spec.image_side;
    ImageSample s;
    s.id = std::move(id);
    s.image = Image::filled(side, side, 0.0);
    s.mask = ClassMask::filled(side, side, 0);

    // textured background
    double base[3];
    for (double& v : base) v = rng.uniform(0.08, 0.35);
    for (int y = 0; y < side; ++y) {
        for (int x = 0; x < side; ++x) {
            for (int c = 0; c < 3; ++c) {
                const double v = base[c] + rng.uniform(-spec.background_noise, spec.background_noise);
                s.image.at(y, x, c) = std::clamp(v, 0.0, 1.0);
            }
        }
    }

    const int64_t count = rng.uniform_int(spec.shapes_min, spec.shapes_max);
    std::vector<Placement> placed;
    for (int64_t k = 0; k < count; ++k) {
        const int class_id = static_cast<int>(rng.uniform_int(1, spec.num_foreground_classes));
        paint_shape(s, rng, class_id, spec.num_foreground_classes, placed);
    }
    return s;
}

std::vector<ImageSample> render_split(const SyntheticSpec& spec, const std::string& split,
                                      int count, uint64_t round) {
    std::vector<ImageSample> out;
    out.reserve(static_cast<size_t>(count));
    for (int i = 0; i < count; ++i) {
        char idbuf[32];
        std::snprintf(idbuf, sizeof(idbuf), "%s_%04d", split.c_str(), i);
        const uint64_t seed =
            mix64(spec.seed ^ mix64(hash_bytes(split) + static_cast<uint64_t>(i)) ^ mix64(round * 0x9e37ULL + round));
        out.push_back(render_image(spec, seed, idbuf));
    }
    return out;
}

bool covers_all_classes(const std::vector<ImageSample>& samples, int num_fg) {
    std::vector<bool> seen(static_cast<size_t>(num_fg + 1), false);
    for (const auto& s : samples) {
        for (uint8_t v : s.mask.values) seen[v] = true;
    }
    for (int c = 1; c <= num_fg; ++c) {
        if (!seen[static_cast<size_t>(c)]) return false;
    }
    return true;
}

} // namespace

SyntheticSpec parse_synthetic_spec_file(const std::filesystem::path& path) {
    return jsonu::synthetic_from_json(jsonu::parse_file(path));
}

DatasetManifest generate(const SyntheticSpec& spec, const std::filesystem::path& out_root) {
    spec.validate();
    std::error_code ec;
    std::filesystem::create_directories(out_root, ec);
    if (ec) throw IoError("cannot create dataset root " + out_root.string() + ": " + ec.message());

    DatasetManifest manifest;
    manifest.root = out_root;
    manifest.num_classes = spec.num_classes();
    manifest.class_names.push_back("background");
    for (int c = 1; c < spec.num_classes(); ++c) manifest.class_names.push_back(class_name(c));

    const std::pair<std::string, int> splits[] = {
        {"train", spec.num_train}, {"val", spec.num_val}, {"test", spec.num_test}};
    for (const auto& [split, count] : splits) {
        if (count == 0) continue;
        std::filesystem::create_directories(out_root / split, ec);
        if (ec) throw IoError("cannot create split dir: " + (out_root / split).string());

        std::vector<ImageSample> samples = render_split(spec, split, count, 0);
        if (split == "train" && spec.shapes_max > 0 && count > 0) {
            uint64_t round = 0;
            while (!covers_all_classes(samples, spec.num_foreground_classes)) {
                if (++round > 200) {
                    throw DatasetError("generate: could not cover every class in the training split");
                }
                samples = render_split(spec, split, count, round);
            }
        }
        for (const ImageSample& s : samples) {
            const std::string image_rel = split + "/" + s.id + ".ppm";
            const std::string mask_rel = split + "/" + s.id + "_mask.pgm";
            save_sample(s, out_root / image_rel, out_root / mask_rel);
            manifest.entries.push_back({s.id, image_rel, mask_rel, split});
        }
    }
    save_manifest(manifest, out_root / "manifest.json");
    return manifest;
}

void save_sample(const ImageSample& sample, const std::filesystem::path& image_path,
                 const std::filesystem::path& mask_path) {
    write_ppm(image_path, sample.image);
    write_pgm(mask_path, sample.mask);
}

ImageSample load_sample(const std::filesystem::path& image_path,
                        const std::filesystem::path& mask_path, std::string id, int num_classes) {
    ImageSample s;
    s.image = read_ppm(image_path);
    s.mask = read_pgm(mask_path);
    s.id = std::move(id);
    if (s.image.height != s.mask.height || s.image.width != s.mask.width) {
        throw MalformedFileError("image/mask dimensions differ for sample " + s.id);
    }
    if (num_classes > 0 && s.mask.max_value() >= num_classes) {
        throw MaskRangeError("mask " + mask_path.string() + " holds class " +
                             std::to_string(int(s.mask.max_value())) + " >= num_classes " +
                             std::to_string(num_classes));
    }
    return s;
}

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& file) {
    jsonu::json doc;
    doc["num_classes"] = manifest.num_classes;
    doc["class_names"] = manifest.class_names;
    jsonu::json entries = jsonu::json::array();
    for (const ManifestEntry& e : manifest.entries) {
        jsonu::json je;
        je["id"] = e.id;
        je["image"] = e.image;
        je["mask"] = e.mask;
        je["split"] = e.split;
        entries.push_back(std::move(je));
    }
    doc["entries"] = std::move(entries);
    jsonu::write_file(file, doc);
}

DatasetManifest load_manifest(const std::filesystem::path& file) {
    const jsonu::json doc = jsonu::parse_file(file);
    jsonu::ObjectReader r(doc, "manifest");
    DatasetManifest m;
    m.root = file.parent_path();
    m.num_classes = r.require<int>("num_classes");
    m.class_names = r.require<std::vector<std::string>>("class_names");
    const jsonu::json& entries = r.child("entries");
    if (!entries.is_array()) throw ConfigError("manifest: 'entries' must be an array");
    std::set<std::string> ids;
    for (const auto& je : entries) {
        jsonu::ObjectReader er(je, "manifest entry");
        ManifestEntry e;
        e.id = er.require<std::string>("id");
        e.image = er.require<std::string>("image");
        e.mask = er.require<std::string>("mask");
        e.split = er.require<std::string>("split");
        er.done();
        if (!ids.insert(e.id).second) throw DatasetError("manifest: duplicate id '" + e.id + "'");
        if (e.split != "train" && e.split != "val" && e.split != "test") {
            throw DatasetError("manifest: unknown split '" + e.split + "' for entry '" + e.id + "'");
        }
        for (const std::string& rel : {e.image, e.mask}) {
            if (!std::filesystem::exists(m.root / rel)) {
                throw DatasetError("manifest: missing file '" + rel + "' for entry '" + e.id + "'");
            }
        }
        m.entries.push_back(std::move(e));
    }
    r.done();
    if (m.num_classes < 2) throw ConfigError("manifest: num_classes must be >= 2");
    if (static_cast<int>(m.class_names.size()) != m.num_classes) {
        throw ConfigError("manifest: class_names must have num_classes entries");
    }
    return m;
}

std::vector<const ManifestEntry*> split_entries(const DatasetManifest& manifest, std::string_view split) {
    if (split != "train" && split != "val" && split != "test") {
        throw DatasetError("unknown split '" + std::string(split) + "'");
    }
    std::vector<const ManifestEntry*> out;
    for (const ManifestEntry& e : manifest.entries) {
        if (e.split == split) out.push_back(&e);
    }
    std::sort(out.begin(), out.end(),
              [](const ManifestEntry* a, const ManifestEntry* b) { return a->id < b->id; });
    return out;
}

std::vector<ImageSample> load_split(const DatasetManifest& manifest, std::string_view split) {
    std::vector<ImageSample> out;
    for (const ManifestEntry* e : split_entries(manifest, split)) {
        out.push_back(load_sample(manifest.root / e->image, manifest.root / e->mask, e->id,
                                  manifest.num_classes));
    }
    return out;
}

} // namespace segforge

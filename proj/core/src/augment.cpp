#include "segforge/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "segforge/error.hpp"

namespace segforge {

void AugmentConfig::validate() const {
    if (!(crop_area_range.first > 0) || crop_area_range.first > crop_area_range.second ||
        crop_area_range.second > 1.0) {
        throw ConfigError("augment.crop_area_range must satisfy 0 < min <= max <= 1");
    }
    if (output_size < 8) throw ConfigError("augment.output_size must be >= 8");
    if (!(crop_aspect_range.first > 0) || crop_aspect_range.first > crop_aspect_range.second) {
        throw ConfigError("augment.crop_aspect_range must be positive and ordered");
    }
    if (flip_prob < 0 || flip_prob > 1) throw ConfigError("augment.flip_prob must be in [0,1]");
    if (photometric_prob < 0 || photometric_prob > 1) {
        throw ConfigError("augment.photometric_prob must be in [0,1]");
    }
    if (rotation_range_deg.first < 0 || rotation_range_deg.first > rotation_range_deg.second ||
        rotation_range_deg.second > 360.0) {
        throw ConfigError("augment.rotation_range_deg must lie in [0,360] and be ordered");
    }
    if (brightness_delta_max < 0) throw ConfigError("augment.brightness_delta_max must be >= 0");
    if (!(contrast_factor_range.first > 0) || contrast_factor_range.first > contrast_factor_range.second) {
        throw ConfigError("augment.contrast_factor_range must be positive and ordered");
    }
    for (double s : normalize_std) {
        if (s == 0.0) throw ConfigError("augment.normalize_std entries must be nonzero");
    }
}

namespace {

void check_sample(const ImageSample& s) {
    if (s.image.height != s.mask.height || s.image.width != s.mask.width) {
        throw ShapeError("augment: image and mask dimensions differ for sample " + s.id);
    }
    if (s.image.height < 2 || s.image.width < 2) {
        throw ShapeError("augment: degenerate source (extent < 2) for sample " + s.id);
    }
}

Image crop_image(const Image& src, const CropWindow& w) {
    Image out = Image::filled(w.h, w.w, 0.0);
    for (int y = 0; y < w.h; ++y) {
        for (int x = 0; x < w.w; ++x) {
            for (int c = 0; c < 3; ++c) out.at(y, x, c) = src.at(w.y + y, w.x + x, c);
        }
    }
    return out;
}

ClassMask crop_mask(const ClassMask& src, const CropWindow& w) {
    ClassMask out = ClassMask::filled(w.h, w.w, 0);
    for (int y = 0; y < w.h; ++y) {
        for (int x = 0; x < w.w; ++x) out.at(y, x) = src.at(w.y + y, w.x + x);
    }
    return out;
}

Image bilinear_resize(const Image& src, int oh, int ow) {
    Image out = Image::filled(oh, ow, 0.0);
    const double sy = static_cast<double>(src.height) / oh;
    const double sx = static_cast<double>(src.width) / ow;
    for (int y = 0; y < oh; ++y) {
        const double fy = (y + 0.5) * sy - 0.5;
        const int y0 = static_cast<int>(std::floor(fy));
        const double wy = fy - y0;
        const int ya = std::clamp(y0, 0, src.height - 1);
        const int yb = std::clamp(y0 + 1, 0, src.height - 1);
        for (int x = 0; x < ow; ++x) {
            const double fx = (x + 0.5) * sx - 0.5;
            const int x0 = static_cast<int>(std::floor(fx));
            const double wx = fx - x0;
            const int xa = std::clamp(x0, 0, src.width - 1);
            const int xb = std::clamp(x0 + 1, 0, src.width - 1);
            for (int c = 0; c < 3; ++c) {
                const double top = src.at(ya, xa, c) * (1.0 - wx) + src.at(ya, xb, c) * wx;
                const double bot = src.at(yb, xa, c) * (1.0 - wx) + src.at(yb, xb, c) * wx;
                out.at(y, x, c) = top * (1.0 - wy) + bot * wy;
            }
        }
    }
    return out;
}

ClassMask nearest_resize(const ClassMask& src, int oh, int ow) {
    ClassMask out = ClassMask::filled(oh, ow, 0);
    const double sy = static_cast<double>(src.height) / oh;
    const double sx = static_cast<double>(src.width) / ow;
    for (int y = 0; y < oh; ++y) {
        const int iy = std::min(src.height - 1, static_cast<int>((y + 0.5) * sy));
        for (int x = 0; x < ow; ++x) {
            const int ix = std::min(src.width - 1, static_cast<int>((x + 0.5) * sx));
            out.at(y, x) = src.at(iy, ix);
        }
    }
    return out;
}

void flip_vertical(ImageSample& s) {
    const int h = s.image.height, w = s.image.width;
    for (int y = 0; y < h / 2; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < 3; ++c) std::swap(s.image.at(y, x, c), s.image.at(h - 1 - y, x, c));
            std::swap(s.mask.at(y, x), s.mask.at(h - 1 - y, x));
        }
    }
}

void flip_horizontal(ImageSample& s) {
    const int h = s.image.height, w = s.image.width;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w / 2; ++x) {
            for (int c = 0; c < 3; ++c) std::swap(s.image.at(y, x, c), s.image.at(y, w - 1 - x, c));
            std::swap(s.mask.at(y, x), s.mask.at(y, w - 1 - x));
        }
    }
}

} // namespace

CropWindow draw_crop_window(SplitMix64& rng, const AugmentConfig& cfg, int src_w, int src_h) {
    const double src_area = static_cast<double>(src_w) * src_h;
    const double lo = cfg.crop_area_range.first;
    const double hi = cfg.crop_area_range.second;

    auto fixup = [&](int64_t& cw, int64_t& ch, double target) {
        cw = std::clamp<int64_t>(cw, 1, src_w);
        ch = std::clamp<int64_t>(ch, 1, src_h);
        (void)target;
        // Nudge the realized integer area back into [lo, hi] if rounding
        // pushed it out; the band is wide relative to one row/column.
        for (int iter = 0; iter < 64; ++iter) {
            const double frac = static_cast<double>(cw * ch) / src_area;
            if (frac < lo) {
                if (ch < src_h) ++ch;
                else if (cw < src_w) ++cw;
                else break;
            } else if (frac > hi) {
                if (ch > 1) --ch;
                else if (cw > 1) --cw;
                else break;
            } else {
                break;
            }
        }
    };

    double target = lo * src_area;
    for (int attempt = 0; attempt < 10; ++attempt) {
        const double u = rng.uniform(lo, hi);
        const double ar = rng.uniform(cfg.crop_aspect_range.first, cfg.crop_aspect_range.second);
        target = u * src_area;
        int64_t cw = std::llround(std::sqrt(target * ar));
        int64_t ch = std::llround(target / std::max<double>(cw, 1));
        if (cw < 1 || ch < 1 || cw > src_w || ch > src_h) continue;
        fixup(cw, ch, target);
        const int x = static_cast<int>(rng.uniform_int(0, src_w - cw));
        const int y = static_cast<int>(rng.uniform_int(0, src_h - ch));
        return CropWindow{x, y, static_cast<int>(cw), static_cast<int>(ch)};
    }
    // Centered square fallback with the last drawn area.
    int64_t side = std::llround(std::sqrt(target));
    int64_t cw = side, ch = side;
    fixup(cw, ch, target);
    return CropWindow{static_cast<int>((src_w - cw) / 2), static_cast<int>((src_h - ch) / 2),
                      static_cast<int>(cw), static_cast<int>(ch)};
}

double draw_rotation_angle(SplitMix64& rng, const AugmentConfig& cfg) {
    return rng.uniform(cfg.rotation_range_deg.first, cfg.rotation_range_deg.second);
}

ImageSample random_resized_crop(const ImageSample& sample, SplitMix64& rng, const AugmentConfig& cfg) {
    check_sample(sample);
    const CropWindow w = draw_crop_window(rng, cfg, sample.image.width, sample.image.height);
    ImageSample out;
    out.id = sample.id;
    out.image = bilinear_resize(crop_image(sample.image, w), cfg.output_size, cfg.output_size);
    out.mask = nearest_resize(crop_mask(sample.mask, w), cfg.output_size, cfg.output_size);
    return out;
}

ImageSample random_flip(const ImageSample& sample, SplitMix64& rng, const AugmentConfig& cfg) {
    ImageSample out = sample;
    if (rng.bernoulli(cfg.flip_prob)) flip_vertical(out);
    if (rng.bernoulli(cfg.flip_prob)) flip_horizontal(out);
    return out;
}

ImageSample random_rotate(const ImageSample& sample, SplitMix64& rng, const AugmentConfig& cfg) {
    const double angle = draw_rotation_angle(rng, cfg);
    if (angle == 0.0) return sample;

    const int h = sample.image.height, w = sample.image.width;
    const double cy = (h - 1) * 0.5, cx = (w - 1) * 0.5;
    const double rad = angle * std::numbers::pi / 180.0;
    const double c = std::cos(rad), s = std::sin(rad);

    ImageSample out;
    out.id = sample.id;
    out.image = Image::filled(h, w, 0.0);
    out.mask = ClassMask::filled(h, w, 0);

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double dx = x - cx, dy = y - cy;
            const double sx = cx + c * dx + s * dy;
            const double sy = cy - s * dx + c * dy;

            // image: bilinear, out-of-bounds taps contribute 0
            const int x0 = static_cast<int>(std::floor(sx));
            const int y0 = static_cast<int>(std::floor(sy));
            const double wx = sx - x0, wy = sy - y0;
            for (int ch = 0; ch < 3; ++ch) {
                double acc = 0.0;
                for (int dyy = 0; dyy <= 1; ++dyy) {
                    for (int dxx = 0; dxx <= 1; ++dxx) {
                        const int yy = y0 + dyy, xx = x0 + dxx;
                        if (yy < 0 || yy >= h || xx < 0 || xx >= w) continue;
                        const double wgt = (dxx ? wx : 1.0 - wx) * (dyy ? wy : 1.0 - wy);
                        acc += wgt * sample.image.at(yy, xx, ch);
                    }
                }
                out.image.at(y, x, ch) = acc;
            }

            // mask: nearest, background fill
            const int nx = static_cast<int>(std::llround(sx));
            const int ny = static_cast<int>(std::llround(sy));
            if (nx >= 0 && nx < w && ny >= 0 && ny < h) out.mask.at(y, x) = sample.mask.at(ny, nx);
        }
    }
    return out;
}

ImageSample random_photometric(const ImageSample& sample, SplitMix64& rng, const AugmentConfig& cfg) {
    ImageSample out = sample;
    bool touched = false;
    if (rng.bernoulli(cfg.photometric_prob)) {
        const double delta = rng.uniform(-cfg.brightness_delta_max, cfg.brightness_delta_max);
        for (double& v : out.image.data) v += delta;
        touched = true;
    }
    if (rng.bernoulli(cfg.photometric_prob)) {
        const double scale = rng.uniform(cfg.contrast_factor_range.first, cfg.contrast_factor_range.second);
        double mean = 0.0;
        for (double v : out.image.data) mean += v;
        mean /= static_cast<double>(out.image.data.size());
        for (double& v : out.image.data) v = mean + scale * (v - mean);
        touched = true;
    }
    if (touched) {
        for (double& v : out.image.data) v = std::clamp(v, 0.0, 1.0);
    }
    return out;
}

ImageSample normalize(const ImageSample& sample, const AugmentConfig& cfg) {
    for (double s : cfg.normalize_std) {
        if (s == 0.0) throw ConfigError("normalize: zero standard deviation");
    }
    ImageSample out = sample;
    const int64_t n = out.image.pixel_count();
    for (int64_t p = 0; p < n; ++p) {
        for (int c = 0; c < 3; ++c) {
            double& v = out.image.data[static_cast<size_t>(p * 3 + c)];
            v = (v - cfg.normalize_mean[static_cast<size_t>(c)]) / cfg.normalize_std[static_cast<size_t>(c)];
        }
    }
    return out;
}

ImageSample denormalize(const ImageSample& sample, const AugmentConfig& cfg) {
    ImageSample out = sample;
    const int64_t n = out.image.pixel_count();
    for (int64_t p = 0; p < n; ++p) {
        for (int c = 0; c < 3; ++c) {
            double& v = out.image.data[static_cast<size_t>(p * 3 + c)];
            v = std::clamp(v * cfg.normalize_std[static_cast<size_t>(c)] + cfg.normalize_mean[static_cast<size_t>(c)],
                           0.0, 1.0);
        }
    }
    return out;
}

ImageSample augment_pair(const ImageSample& sample, uint64_t epoch, const AugmentConfig& cfg) {
    SplitMix64 rng(derive_seed(cfg.master_seed, sample.id, epoch));
    ImageSample s = random_resized_crop(sample, rng, cfg);
    s = random_flip(s, rng, cfg);
    s = random_rotate(s, rng, cfg);
    s = random_photometric(s, rng, cfg);
    return normalize(s, cfg);
}

} // namespace segforge

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include <json.hpp>

#include "uavsat/errors.hpp"
#include "uavsat/fft.hpp"
#include "uavsat/labels.hpp"
#include "uavsat/patch_pair.hpp"
#include "uavsat/random.hpp"
#include "uavsat/raster.hpp"
#include "uavsat/resample.hpp"

namespace uavsat {

// Tuning parameters of the twelve paired augmentations. The default-value
// config is an exact no-op. Magnitudes are zero-mean Gaussian draws except
// rotation, which is uniform in [rotate_min_deg, rotate_max_deg], and the
// mirror flips, which are Bernoulli.
struct AugmentConfig {
    double rotate_min_deg = 0.0;
    double rotate_max_deg = 0.0;
    double align_shift_sd = 0.0;   // pixels, applied to one image only
    double shift_sd = 0.0;         // pixels, pair-joint
    double colour_sd = 0.0;        // RGB per-channel shift, [0,255] scale
    double hue_sd = 0.0;           // HSV shifts on a [0,255] scale
    double saturation_sd = 0.0;
    double value_sd = 0.0;
    double mirror_prob_ud = 0.0;
    double mirror_prob_lr = 0.0;
    double scale_sd = 0.0;         // ratio about 1
    double noise_sd = 0.0;         // per-pixel per-channel
    double shear_sd = 0.0;         // ratio
    double warp_max = 0.0;         // pixels
    double warp_filter_width = 8.0;  // frequency bins of the low-pass
    bool warp_independent = false;
    std::uint64_t seed = 0;

    void validate() const {
        require(rotate_min_deg <= rotate_max_deg, "rotate range inverted");
        require(align_shift_sd >= 0 && shift_sd >= 0 && colour_sd >= 0 && hue_sd >= 0 &&
                    saturation_sd >= 0 && value_sd >= 0 && scale_sd >= 0 && noise_sd >= 0 &&
                    shear_sd >= 0 && warp_max >= 0,
                "augmentation magnitudes must be non-negative");
        require(mirror_prob_ud >= 0 && mirror_prob_ud <= 1 && mirror_prob_lr >= 0 &&
                    mirror_prob_lr <= 1,
                "mirror probabilities must lie in [0,1]");
        require(warp_filter_width > 0, "warp filter width must be positive");
    }
};

inline void to_json(nlohmann::json& j, const AugmentConfig& c) {
    j = nlohmann::json{{"rotate_min_deg", c.rotate_min_deg},
                       {"rotate_max_deg", c.rotate_max_deg},
                       {"align_shift_sd", c.align_shift_sd},
                       {"shift_sd", c.shift_sd},
                       {"colour_sd", c.colour_sd},
                       {"hue_sd", c.hue_sd},
                       {"saturation_sd", c.saturation_sd},
                       {"value_sd", c.value_sd},
                       {"mirror_prob_ud", c.mirror_prob_ud},
                       {"mirror_prob_lr", c.mirror_prob_lr},
                       {"scale_sd", c.scale_sd},
                       {"noise_sd", c.noise_sd},
                       {"shear_sd", c.shear_sd},
                       {"warp_max", c.warp_max},
                       {"warp_filter_width", c.warp_filter_width},
                       {"warp_independent", c.warp_independent},
                       {"seed", c.seed}};
}

inline void from_json(const nlohmann::json& j, AugmentConfig& c) {
    c = AugmentConfig{};
    c.rotate_min_deg = j.value("rotate_min_deg", c.rotate_min_deg);
    c.rotate_max_deg = j.value("rotate_max_deg", c.rotate_max_deg);
    c.align_shift_sd = j.value("align_shift_sd", c.align_shift_sd);
    c.shift_sd = j.value("shift_sd", c.shift_sd);
    c.colour_sd = j.value("colour_sd", c.colour_sd);
    c.hue_sd = j.value("hue_sd", c.hue_sd);
    c.saturation_sd = j.value("saturation_sd", c.saturation_sd);
    c.value_sd = j.value("value_sd", c.value_sd);
    c.mirror_prob_ud = j.value("mirror_prob_ud", c.mirror_prob_ud);
    c.mirror_prob_lr = j.value("mirror_prob_lr", c.mirror_prob_lr);
    c.scale_sd = j.value("scale_sd", c.scale_sd);
    c.noise_sd = j.value("noise_sd", c.noise_sd);
    c.shear_sd = j.value("shear_sd", c.shear_sd);
    c.warp_max = j.value("warp_max", c.warp_max);
    c.warp_filter_width = j.value("warp_filter_width", c.warp_filter_width);
    c.warp_independent = j.value("warp_independent", c.warp_independent);
    c.seed = j.value("seed", c.seed);
}

// Smooth random displacement field: per-pixel (u, v) offsets in pixels.
struct WarpField {
    Plane u;
    Plane v;
};

// Frequency-filtered noise field: white noise per component, isotropic
// Gaussian low-pass of width `filter_width` bins, rescaled so the largest
// absolute offset equals warp_max exactly (unless the field is all zero).
inline WarpField make_warp_field(int width, int height, double warp_max, double filter_width,
                                 std::uint64_t seed) {
    require(width >= 1 && height >= 1, "field dimensions must be positive");
    require(warp_max >= 0.0, "warp_max must be non-negative");
    require(filter_width > 0.0, "filter width must be positive");

    WarpField f{Plane(width, height), Plane(width, height)};
    if (warp_max == 0.0) return f;

    RandomStream rng(seed);
    fft::Engine eng;
    const std::size_t n = static_cast<std::size_t>(width) * height;
    for (Plane* comp : {&f.u, &f.v}) {
        std::vector<fft::cd> buf(n);
        for (std::size_t i = 0; i < n; ++i) buf[i] = rng.gaussian(1.0);
        eng.transform_2d(buf, static_cast<std::size_t>(width), static_cast<std::size_t>(height),
                         false);
        const double inv_two_fw2 = 1.0 / (2.0 * filter_width * filter_width);
        for (int y = 0; y < height; ++y) {
            const double ky = (y <= height / 2) ? y : y - height;
            for (int x = 0; x < width; ++x) {
                const double kx = (x <= width / 2) ? x : x - width;
                buf[static_cast<std::size_t>(y) * width + x] *=
                    std::exp(-(kx * kx + ky * ky) * inv_two_fw2);
            }
        }
        eng.transform_2d(buf, static_cast<std::size_t>(width), static_cast<std::size_t>(height),
                         true);
        for (std::size_t i = 0; i < n; ++i) comp->data[i] = buf[i].real();
    }

    double peak = 0.0;
    for (double v : f.u.data) peak = std::max(peak, std::fabs(v));
    for (double v : f.v.data) peak = std::max(peak, std::fabs(v));
    if (peak > 0.0) {
        const double factor = warp_max / peak;
        for (double& v : f.u.data) v *= factor;
        for (double& v : f.v.data) v *= factor;
    }
    return f;
}

// Backward-mapped displacement: output pixel (i,j) samples the source at
// (j - u, i - v) with bicubic interpolation and reflected borders, so
// content moves by approximately (+u, +v).
inline Raster apply_warp(const Raster& r, const WarpField& f) {
    require(f.u.width == r.width() && f.u.height == r.height() && f.v.width == r.width() &&
                f.v.height == r.height(),
            "warp field dimension mismatch");
    Raster out(r.width(), r.height(), r.gsd());
    for (int c = 0; c < Raster::kChannels; ++c) {
        const Plane ch = r.channel(c);
        Plane och(r.width(), r.height());
        for (int i = 0; i < r.height(); ++i) {
            for (int j = 0; j < r.width(); ++j) {
                och.at(i, j) =
                    sample_bicubic(ch, j - f.u.at(i, j), i - f.v.at(i, j));
            }
        }
        out.set_channel(c, och);
    }
    return out;
}

// Carries labels through a smooth warp by displacing each box centre by the
// field value there (the warp is non-rigid, so box corners have no exact
// image; the centre displacement is the working approximation).
inline LabelSet warp_labels(const LabelSet& labels, const WarpField& f) {
    LabelSet out;
    const int w = f.u.width, h = f.u.height;
    for (BoxLabel b : labels.entries) {
        const double px = std::clamp(b.cx * w - 0.5, 0.0, w - 1.0);
        const double py = std::clamp(b.cy * h - 0.5, 0.0, h - 1.0);
        const int ix = static_cast<int>(px), iy = static_cast<int>(py);
        const double fx = px - ix, fy = py - iy;
        const int ix1 = std::min(ix + 1, w - 1), iy1 = std::min(iy + 1, h - 1);
        auto bilerp = [&](const Plane& p) {
            return (1 - fy) * ((1 - fx) * p.at(iy, ix) + fx * p.at(iy, ix1)) +
                   fy * ((1 - fx) * p.at(iy1, ix) + fx * p.at(iy1, ix1));
        };
        b.cx += bilerp(f.u) / w;
        b.cy += bilerp(f.v) / h;
        out.entries.push_back(b);
    }
    return clip_labels(out);
}

// Maps each box through the forward affine (pixel coordinates), replaces it
// with the axis-aligned hull of its mapped corners, and clips.
inline LabelSet transform_labels(const LabelSet& labels, const Affine& forward, int width,
                                 int height) {
    if (forward.is_identity()) return labels;
    LabelSet out;
    for (const BoxLabel& b : labels.entries) {
        const double x0 = (b.cx - b.w / 2.0) * width;
        const double x1 = (b.cx + b.w / 2.0) * width;
        const double y0 = (b.cy - b.h / 2.0) * height;
        const double y1 = (b.cy + b.h / 2.0) * height;
        double min_x = 1e300, max_x = -1e300, min_y = 1e300, max_y = -1e300;
        const double cs[4][2] = {{x0, y0}, {x1, y0}, {x0, y1}, {x1, y1}};
        for (const auto& corner : cs) {
            double mx, my;
            forward.apply(corner[0], corner[1], mx, my);
            min_x = std::min(min_x, mx);
            max_x = std::max(max_x, mx);
            min_y = std::min(min_y, my);
            max_y = std::max(max_y, my);
        }
        BoxLabel t = b;
        t.cx = 0.5 * (min_x + max_x) / width;
        t.cy = 0.5 * (min_y + max_y) / height;
        t.w = (max_x - min_x) / width;
        t.h = (max_y - min_y) / height;
        out.entries.push_back(t);
    }
    return clip_labels(out);
}

inline LabelSet mirror_labels(const LabelSet& labels, bool lr, bool ud) {
    LabelSet out = labels;
    for (BoxLabel& b : out.entries) {
        if (lr) b.cx = 1.0 - b.cx;
        if (ud) b.cy = 1.0 - b.cy;
    }
    return out;
}

namespace detail {

enum AugStream : std::uint64_t {
    kStreamMirror = 0,
    kStreamRotate,
    kStreamScale,
    kStreamShear,
    kStreamShift,
    kStreamAlign,
    kStreamWarp,
    kStreamColour,
    kStreamHue,
    kStreamSaturation,
    kStreamValue,
    kStreamNoise,
};

inline Raster flip_raster(const Raster& r, bool lr, bool ud) {
    Raster out(r.width(), r.height(), r.gsd());
    for (int c = 0; c < Raster::kChannels; ++c) {
        for (int y = 0; y < r.height(); ++y) {
            const int sy = ud ? r.height() - 1 - y : y;
            for (int x = 0; x < r.width(); ++x) {
                const int sx = lr ? r.width() - 1 - x : x;
                out.at(y, x, c) = r.at(sy, sx, c);
            }
        }
    }
    return out;
}

inline void clamp_raster(Raster& r) {
    for (double& v : r.data()) v = clamp_byte(v);
}

inline void shift_rgb(Raster& r, double dr, double dg, double db) {
    for (int y = 0; y < r.height(); ++y) {
        for (int x = 0; x < r.width(); ++x) {
            r.at(y, x, 0) = clamp_byte(r.at(y, x, 0) + dr);
            r.at(y, x, 1) = clamp_byte(r.at(y, x, 1) + dg);
            r.at(y, x, 2) = clamp_byte(r.at(y, x, 2) + db);
        }
    }
}

// RGB <-> HSV with every channel on the [0,255] scale. Hue wraps modulo 256.
inline void rgb_to_hsv(double r, double g, double b, double& h, double& s, double& v) {
    r = clamp_byte(r) / 255.0;
    g = clamp_byte(g) / 255.0;
    b = clamp_byte(b) / 255.0;
    const double mx = std::max({r, g, b});
    const double mn = std::min({r, g, b});
    const double d = mx - mn;
    v = mx * 255.0;
    s = mx <= 0.0 ? 0.0 : (d / mx) * 255.0;
    double hue = 0.0;  // in [0, 6)
    if (d > 0.0) {
        if (mx == r) {
            hue = (g - b) / d;
            if (hue < 0.0) hue += 6.0;
        } else if (mx == g) {
            hue = (b - r) / d + 2.0;
        } else {
            hue = (r - g) / d + 4.0;
        }
    }
    h = hue * (256.0 / 6.0);
}

inline void hsv_to_rgb(double h, double s, double v, double& r, double& g, double& b) {
    h = std::fmod(h, 256.0);
    if (h < 0.0) h += 256.0;
    const double hue = h * (6.0 / 256.0);
    const double sat = std::clamp(s / 255.0, 0.0, 1.0);
    const double val = std::clamp(v / 255.0, 0.0, 1.0);
    const int sector = static_cast<int>(hue) % 6;
    const double f = hue - std::floor(hue);
    const double p = val * (1.0 - sat);
    const double q = val * (1.0 - sat * f);
    const double t = val * (1.0 - sat * (1.0 - f));
    double rr, gg, bb;
    switch (sector) {
        case 0: rr = val; gg = t; bb = p; break;
        case 1: rr = q; gg = val; bb = p; break;
        case 2: rr = p; gg = val; bb = t; break;
        case 3: rr = p; gg = q; bb = val; break;
        case 4: rr = t; gg = p; bb = val; break;
        default: rr = val; gg = p; bb = q; break;
    }
    r = rr * 255.0;
    g = gg * 255.0;
    b = bb * 255.0;
}

inline void shift_hsv(Raster& r, double dh, double ds, double dv) {
    for (int y = 0; y < r.height(); ++y) {
        for (int x = 0; x < r.width(); ++x) {
            double h, s, v;
            rgb_to_hsv(r.at(y, x, 0), r.at(y, x, 1), r.at(y, x, 2), h, s, v);
            h += dh;  // wraps in hsv_to_rgb
            s = std::clamp(s + ds, 0.0, 255.0);
            v = std::clamp(v + dv, 0.0, 255.0);
            double rr, gg, bb;
            hsv_to_rgb(h, s, v, rr, gg, bb);
            r.at(y, x, 0) = clamp_byte(rr);
            r.at(y, x, 1) = clamp_byte(gg);
            r.at(y, x, 2) = clamp_byte(bb);
        }
    }
}

inline void add_noise(Raster& r, double sd, RandomStream& rng) {
    for (int c = 0; c < Raster::kChannels; ++c) {
        for (int y = 0; y < r.height(); ++y) {
            for (int x = 0; x < r.width(); ++x) {
                r.at(y, x, c) = clamp_byte(r.at(y, x, c) + rng.gaussian(sd));
            }
        }
    }
}

}  // namespace detail

// Applies the augmentation chain in fixed order: mirror, rotate, scale,
// shear, shift (pair-joint), alignment shift (one image), local warp,
// colour, hue, saturation, value, noise. Geometric steps between mirror and
// alignment compose into a single affine so each patch is resampled at most
// once. Each step draws from its own stream derived from cfg.seed; the
// default config is a bit-exact no-op.
inline PatchPair augment_pair(const PatchPair& pair, const AugmentConfig& cfg) {
    pair.validate();
    cfg.validate();
    const int w = pair.patch_a.width();
    const int h = pair.patch_a.height();
    const double cx = w / 2.0, cy = h / 2.0;

    PatchPair out = pair;

    // mirror (exact index flips)
    {
        RandomStream rng = derive_stream(cfg.seed, detail::kStreamMirror);
        const bool flip_ud = rng.bernoulli(cfg.mirror_prob_ud);
        const bool flip_lr = rng.bernoulli(cfg.mirror_prob_lr);
        if (flip_ud || flip_lr) {
            out.patch_a = detail::flip_raster(out.patch_a, flip_lr, flip_ud);
            out.patch_b = detail::flip_raster(out.patch_b, flip_lr, flip_ud);
            out.labels_a = mirror_labels(out.labels_a, flip_lr, flip_ud);
            out.labels_b = mirror_labels(out.labels_b, flip_lr, flip_ud);
        }
    }

    // rotate + scale + shear + joint shift as one affine content map
    Affine joint = Affine::identity();
    if (cfg.rotate_min_deg != 0.0 || cfg.rotate_max_deg != 0.0) {
        RandomStream rng = derive_stream(cfg.seed, detail::kStreamRotate);
        const double deg = rng.uniform(cfg.rotate_min_deg, cfg.rotate_max_deg);
        joint = Affine::rotation_about(deg, cx, cy).after(joint);
    }
    if (cfg.scale_sd > 0.0) {
        RandomStream rng = derive_stream(cfg.seed, detail::kStreamScale);
        const double s = std::max(0.1, 1.0 + rng.gaussian(cfg.scale_sd));
        joint = Affine::scale_about(s, cx, cy).after(joint);
    }
    if (cfg.shear_sd > 0.0) {
        RandomStream rng = derive_stream(cfg.seed, detail::kStreamShear);
        joint = Affine::shear_about(rng.gaussian(cfg.shear_sd), cy).after(joint);
    }
    if (cfg.shift_sd > 0.0) {
        RandomStream rng = derive_stream(cfg.seed, detail::kStreamShift);
        const double dx = rng.gaussian(cfg.shift_sd);
        const double dy = rng.gaussian(cfg.shift_sd);
        joint = Affine::translation(dx, dy).after(joint);
    }
    Affine map_b = joint;
    if (cfg.align_shift_sd > 0.0) {
        RandomStream rng = derive_stream(cfg.seed, detail::kStreamAlign);
        const double dx = rng.gaussian(cfg.align_shift_sd);
        const double dy = rng.gaussian(cfg.align_shift_sd);
        map_b = Affine::translation(dx, dy).after(map_b);
    }
    if (!joint.is_identity()) {
        out.patch_a = warp_raster(out.patch_a, joint.inverse(), Border::Reflect);
        out.labels_a = transform_labels(out.labels_a, joint, w, h);
    }
    if (!map_b.is_identity()) {
        out.patch_b = warp_raster(out.patch_b, map_b.inverse(), Border::Reflect);
        out.labels_b = transform_labels(out.labels_b, map_b, w, h);
    }

    // local warp
    if (cfg.warp_max > 0.0) {
        RandomStream rng = derive_stream(cfg.seed, detail::kStreamWarp);
        const std::uint64_t seed_a = rng.next_u64();
        const std::uint64_t seed_b = rng.next_u64();
        const WarpField field_a =
            make_warp_field(w, h, cfg.warp_max, cfg.warp_filter_width, seed_a);
        const WarpField field_b =
            cfg.warp_independent
                ? make_warp_field(w, h, cfg.warp_max, cfg.warp_filter_width, seed_b)
                : field_a;
        out.patch_a = apply_warp(out.patch_a, field_a);
        out.patch_b = apply_warp(out.patch_b, field_b);
        out.labels_a = warp_labels(out.labels_a, field_a);
        out.labels_b = warp_labels(out.labels_b, field_b);
    }

    // photometric steps: independent draws per pair element
    if (cfg.colour_sd > 0.0) {
        RandomStream rng = derive_stream(cfg.seed, detail::kStreamColour);
        for (Raster* img : {&out.patch_a, &out.patch_b}) {
            const double dr = rng.gaussian(cfg.colour_sd);
            const double dg = rng.gaussian(cfg.colour_sd);
            const double db = rng.gaussian(cfg.colour_sd);
            detail::shift_rgb(*img, dr, dg, db);
        }
    }
    if (cfg.hue_sd > 0.0 || cfg.saturation_sd > 0.0 || cfg.value_sd > 0.0) {
        RandomStream rng_h = derive_stream(cfg.seed, detail::kStreamHue);
        RandomStream rng_s = derive_stream(cfg.seed, detail::kStreamSaturation);
        RandomStream rng_v = derive_stream(cfg.seed, detail::kStreamValue);
        for (Raster* img : {&out.patch_a, &out.patch_b}) {
            const double dh = cfg.hue_sd > 0.0 ? rng_h.gaussian(cfg.hue_sd) : 0.0;
            const double ds = cfg.saturation_sd > 0.0 ? rng_s.gaussian(cfg.saturation_sd) : 0.0;
            const double dv = cfg.value_sd > 0.0 ? rng_v.gaussian(cfg.value_sd) : 0.0;
            detail::shift_hsv(*img, dh, ds, dv);
        }
    }
    if (cfg.noise_sd > 0.0) {
        RandomStream rng = derive_stream(cfg.seed, detail::kStreamNoise);
        detail::add_noise(out.patch_a, cfg.noise_sd, rng);
        detail::add_noise(out.patch_b, cfg.noise_sd, rng);
    }

    return out;
}

}  // namespace uavsat

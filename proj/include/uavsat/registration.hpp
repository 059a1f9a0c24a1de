#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "uavsat/blur_metric.hpp"
#include "uavsat/errors.hpp"
#include "uavsat/fft.hpp"
#include "uavsat/raster.hpp"
#include "uavsat/resample.hpp"

namespace uavsat {

// Geo-registered survey image: raster plus the ground coordinates (easting,
// northing) of pixel (0,0). An empty validity mask means fully valid.
struct GeoImage {
    Raster raster;
    double origin_e = 0.0;
    double origin_n = 0.0;
    std::string survey_id;
    std::vector<std::uint8_t> validity;

    bool pixel_valid(int y, int x) const {
        return validity.empty() ||
               validity[static_cast<std::size_t>(y) * raster.width() + x] != 0;
    }
};

// 4-DOF similarity: translation (pixels), rotation (degrees, about the
// canvas centre), isotropic scale. The forward map is
//   F(p) = c + s R(theta) (p - c) + (dx, dy)
// with c the centre of the canvas the transform is applied on.
struct SimilarityTransform {
    double dx = 0.0;
    double dy = 0.0;
    double theta_deg = 0.0;
    double scale = 1.0;

    Affine to_affine(int width, int height) const {
        const double cx = width / 2.0, cy = height / 2.0;
        Affine rs = Affine::scale_about(scale, cx, cy).after(
            Affine::rotation_about(theta_deg, cx, cy));
        return Affine::translation(dx, dy).after(rs);
    }

    SimilarityTransform inverse() const {
        require(scale > 0.0, "scale must be positive");
        const double rad = -theta_deg * std::numbers::pi / 180.0;
        const double co = std::cos(rad), si = std::sin(rad);
        const double ix = -(co * dx - si * dy) / scale;
        const double iy = -(si * dx + co * dy) / scale;
        return {ix, iy, -theta_deg, 1.0 / scale};
    }

    bool near_identity(double shift_eps = 1e-3, double theta_eps = 1e-4,
                       double scale_eps = 1e-6) const {
        return std::fabs(dx) <= shift_eps && std::fabs(dy) <= shift_eps &&
               std::fabs(theta_deg) <= theta_eps && std::fabs(scale - 1.0) <= scale_eps;
    }
};

// compose(outer, inner)(p) = outer(inner(p)).
inline SimilarityTransform compose(const SimilarityTransform& outer,
                                   const SimilarityTransform& inner) {
    const double rad = outer.theta_deg * std::numbers::pi / 180.0;
    const double co = std::cos(rad), si = std::sin(rad);
    SimilarityTransform r;
    r.scale = outer.scale * inner.scale;
    r.theta_deg = outer.theta_deg + inner.theta_deg;
    r.dx = outer.scale * (co * inner.dx - si * inner.dy) + outer.dx;
    r.dy = outer.scale * (si * inner.dx + co * inner.dy) + outer.dy;
    return r;
}

// Crops every image to the intersection of the footprints, anchored at the
// common north-west corner, so pixel (0,0) is the same ground point in every
// output. Images must share one gsd and (within rounding) one pixel grid.
inline std::vector<GeoImage> crop_common_extent(const std::vector<GeoImage>& images) {
    require(images.size() >= 2, "need at least two images");
    const double gsd = images.front().raster.gsd();
    for (const GeoImage& g : images) {
        require(std::fabs(g.raster.gsd() - gsd) <= 1e-9 * gsd, "mismatched gsd");
    }

    double e_left = -1e300, n_top = 1e300, e_right = 1e300, n_bottom = -1e300;
    for (const GeoImage& g : images) {
        e_left = std::max(e_left, g.origin_e);
        n_top = std::min(n_top, g.origin_n);
        e_right = std::min(e_right, g.origin_e + g.raster.width() * gsd);
        n_bottom = std::max(n_bottom, g.origin_n - g.raster.height() * gsd);
    }
    if (e_right - e_left < 0.5 * gsd || n_top - n_bottom < 0.5 * gsd) {
        throw DomainError("no overlap between survey footprints");
    }

    int common_w = std::numeric_limits<int>::max();
    int common_h = std::numeric_limits<int>::max();
    std::vector<std::pair<int, int>> offsets;
    for (const GeoImage& g : images) {
        const int off_x = static_cast<int>(std::max(0L, std::lround((e_left - g.origin_e) / gsd)));
        const int off_y = static_cast<int>(std::max(0L, std::lround((g.origin_n - n_top) / gsd)));
        offsets.emplace_back(off_x, off_y);
        common_w = std::min(common_w, g.raster.width() - off_x);
        common_h = std::min(common_h, g.raster.height() - off_y);
    }
    if (common_w < 1 || common_h < 1) throw DomainError("no overlap between survey footprints");

    std::vector<GeoImage> out;
    out.reserve(images.size());
    for (std::size_t i = 0; i < images.size(); ++i) {
        const GeoImage& g = images[i];
        const auto [ox, oy] = offsets[i];
        Raster cropped(common_w, common_h, gsd);
        for (int c = 0; c < Raster::kChannels; ++c) {
            for (int y = 0; y < common_h; ++y) {
                for (int x = 0; x < common_w; ++x) {
                    cropped.at(y, x, c) = g.raster.at(oy + y, ox + x, c);
                }
            }
        }
        GeoImage gc;
        gc.raster = std::move(cropped);
        gc.origin_e = e_left;
        gc.origin_n = n_top;
        gc.survey_id = g.survey_id;
        if (!g.validity.empty()) {
            gc.validity.resize(static_cast<std::size_t>(common_w) * common_h);
            for (int y = 0; y < common_h; ++y) {
                for (int x = 0; x < common_w; ++x) {
                    gc.validity[static_cast<std::size_t>(y) * common_w + x] =
                        g.validity[static_cast<std::size_t>(oy + y) * g.raster.width() + ox + x];
                }
            }
        }
        out.push_back(std::move(gc));
    }
    return out;
}

namespace detail {

inline Plane centre_window(const Plane& p, int w) {
    const int ox = (p.width - w) / 2;
    const int oy = (p.height - w) / 2;
    Plane out(w, w);
    for (int y = 0; y < w; ++y) {
        for (int x = 0; x < w; ++x) out.at(y, x) = p.at(oy + y, ox + x);
    }
    return out;
}

inline double plane_variance(const Plane& p) { return population_variance(p); }

// Demeaned, Hann-tapered complex buffer ready for the FFT.
inline std::vector<fft::cd> tapered_buffer(const Plane& win) {
    const int w = win.width, h = win.height;
    double mean = 0.0;
    for (double v : win.data) mean += v;
    mean /= static_cast<double>(win.size());

    std::vector<double> hx(w), hy(h);
    for (int x = 0; x < w; ++x) {
        hx[x] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * (x + 0.5) / w);
    }
    for (int y = 0; y < h; ++y) {
        hy[y] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * (y + 0.5) / h);
    }
    std::vector<fft::cd> buf(win.size());
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            buf[static_cast<std::size_t>(y) * w + x] = (win.at(y, x) - mean) * hx[x] * hy[y];
        }
    }
    return buf;
}

inline double parabolic_offset(double cm, double c0, double cp) {
    const double denom = cm - 2.0 * c0 + cp;
    if (std::fabs(denom) < 1e-300) return 0.0;
    double d = 0.5 * (cm - cp) / denom;
    return std::clamp(d, -0.5, 0.5);
}

// Displacement d such that b(u) ~= a(u - d), i.e. how far b's content sits
// from a's. Sub-pixel via parabolic interpolation around the peak; the peak
// response (normalized correlation value) is reported when requested.
inline std::pair<double, double> phase_correlate(const std::vector<fft::cd>& fa,
                                                 const std::vector<fft::cd>& fb, int w, int h,
                                                 fft::Engine& eng, double* response = nullptr) {
    std::vector<fft::cd> cross(fa.size());
    for (std::size_t i = 0; i < fa.size(); ++i) {
        fft::cd c = fa[i] * std::conj(fb[i]);
        const double mag = std::abs(c);
        cross[i] = mag > 1e-15 ? c / mag : fft::cd{};
    }
    eng.transform_2d(cross, static_cast<std::size_t>(w), static_cast<std::size_t>(h), true);

    int py = 0, px = 0;
    double best = -1e300;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double v = cross[static_cast<std::size_t>(y) * w + x].real();
            if (v > best) {
                best = v;
                py = y;
                px = x;
            }
        }
    }
    auto at = [&](int y, int x) {
        y = (y % h + h) % h;
        x = (x % w + w) % w;
        return cross[static_cast<std::size_t>(y) * w + x].real();
    };
    const double sub_x = parabolic_offset(at(py, px - 1), best, at(py, px + 1));
    const double sub_y = parabolic_offset(at(py - 1, px), best, at(py + 1, px));

    double sx = px + sub_x;
    double sy = py + sub_y;
    if (sx > w / 2.0) sx -= w;
    if (sy > h / 2.0) sy -= h;
    if (response) *response = best;
    // peak at -d (cyclic), so negate
    return {-sx, -sy};
}

// Log magnitude of the centred spectrum resampled onto a (theta, log rho)
// grid. Rows span theta in [0, pi), columns span log rho.
struct LogPolarSpec {
    int n_theta = 0;
    int n_rho = 0;
    double rho_min = 0.0;
    double log_step = 0.0;
};

inline Plane log_polar_magnitude(const std::vector<fft::cd>& spec, int w,
                                 const LogPolarSpec& lp) {
    // centred log magnitude
    Plane mag(w, w);
    for (int y = 0; y < w; ++y) {
        const int sy = (y + w / 2) % w;
        for (int x = 0; x < w; ++x) {
            const int sx = (x + w / 2) % w;
            mag.at(y, x) = std::log1p(std::abs(spec[static_cast<std::size_t>(sy) * w + sx]));
        }
    }
    const double c = w / 2.0;
    Plane out(lp.n_rho, lp.n_theta);
    for (int it = 0; it < lp.n_theta; ++it) {
        const double th = std::numbers::pi * it / lp.n_theta;
        const double ct = std::cos(th), st = std::sin(th);
        for (int ir = 0; ir < lp.n_rho; ++ir) {
            const double rho = lp.rho_min * std::exp(lp.log_step * ir);
            const double sx = c + rho * ct;
            const double sy = c + rho * st;
            double v = 0.0;
            if (sx >= 0.0 && sx <= w - 1.0 && sy >= 0.0 && sy <= w - 1.0) {
                const int x0 = static_cast<int>(sx), y0 = static_cast<int>(sy);
                const int x1 = std::min(x0 + 1, w - 1), y1 = std::min(y0 + 1, w - 1);
                const double fx = sx - x0, fy = sy - y0;
                v = (1 - fy) * ((1 - fx) * mag.at(y0, x0) + fx * mag.at(y0, x1)) +
                    fy * ((1 - fx) * mag.at(y1, x0) + fx * mag.at(y1, x1));
            }
            out.at(it, ir) = v;
        }
    }
    return out;
}

// Hann taper along the radial (non-periodic) axis only.
inline std::vector<fft::cd> taper_log_polar(const Plane& lp) {
    double mean = 0.0;
    for (double v : lp.data) mean += v;
    mean /= static_cast<double>(lp.size());
    std::vector<double> hr(lp.width);
    for (int x = 0; x < lp.width; ++x) {
        hr[x] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * (x + 0.5) / lp.width);
    }
    std::vector<fft::cd> buf(lp.size());
    for (int y = 0; y < lp.height; ++y) {
        for (int x = 0; x < lp.width; ++x) {
            buf[static_cast<std::size_t>(y) * lp.width + x] = (lp.at(y, x) - mean) * hr[x];
        }
    }
    return buf;
}

// Samples the moving luma through the current fixed->moving map F on the
// fixed image's centre window grid.
inline Plane warp_window(const Plane& moving_luma, const Affine& map, int off_x, int off_y,
                         int w) {
    Plane out(w, w);
    for (int i = 0; i < w; ++i) {
        for (int j = 0; j < w; ++j) {
            double qx, qy;
            map.apply(off_x + j + 0.5, off_y + i + 0.5, qx, qy);
            out.at(i, j) = sample_bicubic(moving_luma, qx - 0.5, qy - 0.5);
        }
    }
    return out;
}

}  // namespace detail

// Estimates the similarity transform mapping `moving` onto `fixed` from the
// centre window (default 2000 px, shrunk to the largest even size both
// images can supply). Translation comes from phase correlation with
// sub-pixel peak interpolation; rotation and scale from phase correlation of
// the log-polar magnitude spectra, refined over a few iterations.
inline SimilarityTransform estimate_similarity(const GeoImage& fixed, const GeoImage& moving,
                                               int window = 2000) {
    const Raster& rf = fixed.raster;
    const Raster& rm = moving.raster;
    int w = std::min({window, rf.width(), rf.height(), rm.width(), rm.height()});
    w -= w % 2;
    require(w >= 32, "window too small for registration");

    const Plane lf = to_grayscale(rf);
    const Plane lm = to_grayscale(rm);
    const int off_x = (rf.width() - w) / 2;
    const int off_y = (rf.height() - w) / 2;

    const Plane wf = detail::centre_window(lf, w);
    if (detail::plane_variance(wf) < 1e-9) throw DomainError("featureless window");

    fft::Engine eng;
    std::vector<fft::cd> spec_f = detail::tapered_buffer(wf);
    eng.transform_2d(spec_f, w, w, false);

    detail::LogPolarSpec lp;
    lp.n_theta = std::clamp(
        static_cast<int>(fft::next_pow2(2 * static_cast<std::size_t>(w))), 256, 1024);
    lp.n_rho = lp.n_theta / 2;
    lp.rho_min = std::max(2.0, 0.004 * w);
    lp.log_step = std::log((0.48 * w) / lp.rho_min) / lp.n_rho;

    const Plane lp_f = detail::log_polar_magnitude(spec_f, w, lp);
    std::vector<fft::cd> lp_spec_f = detail::taper_log_polar(lp_f);
    eng.transform_2d(lp_spec_f, static_cast<std::size_t>(lp.n_rho),
                     static_cast<std::size_t>(lp.n_theta), false);

    // F maps fixed continuous coords to moving continuous coords; start by
    // aligning the canvas centres.
    const double fcx = rf.width() / 2.0, fcy = rf.height() / 2.0;
    const double mcx = rm.width() / 2.0, mcy = rm.height() / 2.0;
    Affine map = Affine::translation(mcx - fcx, mcy - fcy);

    constexpr int kMaxIterations = 3;
    for (int iter = 0; iter < kMaxIterations; ++iter) {
        Plane wm = detail::warp_window(lm, map, off_x, off_y, w);
        if (detail::plane_variance(wm) < 1e-9) throw DomainError("featureless window");

        // rotation / scale from log-polar spectra
        std::vector<fft::cd> spec_m = detail::tapered_buffer(wm);
        eng.transform_2d(spec_m, w, w, false);
        const Plane lp_m = detail::log_polar_magnitude(spec_m, w, lp);
        std::vector<fft::cd> lp_spec_m = detail::taper_log_polar(lp_m);
        eng.transform_2d(lp_spec_m, static_cast<std::size_t>(lp.n_rho),
                         static_cast<std::size_t>(lp.n_theta), false);
        auto [d_rho, d_theta] =
            detail::phase_correlate(lp_spec_f, lp_spec_m, lp.n_rho, lp.n_theta, eng);

        double theta_rad = d_theta * std::numbers::pi / lp.n_theta;
        if (theta_rad > std::numbers::pi / 2.0) theta_rad -= std::numbers::pi;
        if (theta_rad < -std::numbers::pi / 2.0) theta_rad += std::numbers::pi;
        const double theta_deg = theta_rad * 180.0 / std::numbers::pi;
        const double scale = std::exp(-d_rho * lp.log_step);

        const bool rs_significant = std::fabs(theta_deg) > 5e-4 || std::fabs(scale - 1.0) > 1e-5;
        if (rs_significant) {
            Affine step = Affine::scale_about(scale, fcx, fcy).after(
                Affine::rotation_about(theta_deg, fcx, fcy));
            map = map.after(step);
            wm = detail::warp_window(lm, map, off_x, off_y, w);
            spec_m = detail::tapered_buffer(wm);
            eng.transform_2d(spec_m, w, w, false);
        }

        // translation on the rotation/scale-corrected window
        auto [dx, dy] = detail::phase_correlate(spec_f, spec_m, w, w, eng);
        map = map.after(Affine::translation(dx, dy));

        if (!rs_significant && std::fabs(dx) < 0.02 && std::fabs(dy) < 0.02) break;
    }

    // Convert the affine (a similarity by construction) to the canonical
    // parameterization about the moving canvas centre.
    SimilarityTransform t;
    t.scale = std::hypot(map.a, map.c);
    t.theta_deg = std::atan2(map.c, map.a) * 180.0 / std::numbers::pi;
    double fx, fy;
    map.apply(mcx, mcy, fx, fy);
    t.dx = fx - mcx;
    t.dy = fy - mcy;
    return t;
}

// Resamples the image under t (bicubic). Pixels whose source point falls
// outside the image are black and marked invalid in the validity mask.
inline GeoImage apply_transform(const GeoImage& g, const SimilarityTransform& t) {
    const int w = g.raster.width(), h = g.raster.height();
    const Affine map = t.to_affine(w, h);
    if (map.is_identity()) return g;

    GeoImage out;
    std::vector<std::uint8_t> mask;
    out.raster = warp_raster(g.raster, map, Border::ZeroOutside, &mask);
    out.origin_e = g.origin_e;
    out.origin_n = g.origin_n;
    out.survey_id = g.survey_id;

    // Carry source invalidity through with nearest-neighbour lookup.
    if (!g.validity.empty()) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                double qx, qy;
                map.apply(x + 0.5, y + 0.5, qx, qy);
                const int sx = std::clamp(static_cast<int>(std::floor(qx)), 0, w - 1);
                const int sy = std::clamp(static_cast<int>(std::floor(qy)), 0, h - 1);
                if (!g.pixel_valid(sy, sx)) mask[static_cast<std::size_t>(y) * w + x] = 0;
            }
        }
    }
    out.validity = std::move(mask);
    return out;
}

}  // namespace uavsat

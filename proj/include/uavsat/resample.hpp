#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "uavsat/errors.hpp"
#include "uavsat/raster.hpp"

namespace uavsat {

// Catmull-Rom bicubic kernel (a = -0.5). Exact identity weights at integer
// offsets, so resampling on the source grid is a bit-exact copy.
inline double cubic_weight(double t) {
    constexpr double a = -0.5;
    t = std::fabs(t);
    if (t <= 1.0) return ((a + 2.0) * t - (a + 3.0)) * t * t + 1.0;
    if (t < 2.0) return a * (((t - 5.0) * t + 8.0) * t - 4.0);
    return 0.0;
}

namespace detail {

struct CubicTaps {
    std::array<int, 4> idx;
    std::array<double, 4> w;
};

// Taps for sampling at index-space coordinate s with reflected borders.
inline CubicTaps cubic_taps(double s, int n) {
    CubicTaps taps;
    const double base = std::floor(s);
    const int b = static_cast<int>(base);
    const double t = s - base;
    for (int m = 0; m < 4; ++m) {
        taps.idx[m] = reflect_index(b - 1 + m, n);
        taps.w[m] = cubic_weight(t - static_cast<double>(m - 1));
    }
    return taps;
}

}  // namespace detail

// Bicubic sample of a plane at index-space coordinates (x, y) where integer
// coordinates are pixel centres. Borders are reflected.
inline double sample_bicubic(const Plane& p, double x, double y) {
    const auto tx = detail::cubic_taps(x, p.width);
    const auto ty = detail::cubic_taps(y, p.height);
    double acc = 0.0;
    for (int m = 0; m < 4; ++m) {
        const double* row = p.data.data() + static_cast<std::size_t>(ty.idx[m]) * p.width;
        double racc = 0.0;
        for (int k = 0; k < 4; ++k) racc += tx.w[k] * row[tx.idx[k]];
        acc += ty.w[m] * racc;
    }
    return acc;
}

// Bicubic downsampling by ratio phi >= 1. Output dimensions are
// floor(input/phi); output gsd is input gsd * phi. phi == 1 reproduces the
// input bit-exactly.
inline Raster downsample_bicubic(const Raster& in, double phi) {
    require(std::isfinite(phi) && phi >= 1.0, "phi must be >= 1");
    const int out_w = static_cast<int>(std::floor(in.width() / phi));
    const int out_h = static_cast<int>(std::floor(in.height() / phi));
    if (out_w < 1 || out_h < 1) throw DomainError("output would be zero-area");

    // Tap positions are shared by every row (and column): precompute.
    std::vector<detail::CubicTaps> col_taps(out_w);
    for (int j = 0; j < out_w; ++j) {
        col_taps[j] = detail::cubic_taps((j + 0.5) * phi - 0.5, in.width());
    }
    std::vector<detail::CubicTaps> row_taps(out_h);
    for (int i = 0; i < out_h; ++i) {
        row_taps[i] = detail::cubic_taps((i + 0.5) * phi - 0.5, in.height());
    }

    Raster out(out_w, out_h, in.gsd() * phi);
    std::vector<double> tmp(static_cast<std::size_t>(in.height()) * out_w);
    for (int c = 0; c < Raster::kChannels; ++c) {
        const Plane ch = in.channel(c);
        for (int y = 0; y < in.height(); ++y) {
            const double* src = ch.data.data() + static_cast<std::size_t>(y) * in.width();
            double* dst = tmp.data() + static_cast<std::size_t>(y) * out_w;
            for (int j = 0; j < out_w; ++j) {
                const auto& t = col_taps[j];
                dst[j] = t.w[0] * src[t.idx[0]] + t.w[1] * src[t.idx[1]] +
                         t.w[2] * src[t.idx[2]] + t.w[3] * src[t.idx[3]];
            }
        }
        for (int i = 0; i < out_h; ++i) {
            const auto& t = row_taps[i];
            const double* r0 = tmp.data() + static_cast<std::size_t>(t.idx[0]) * out_w;
            const double* r1 = tmp.data() + static_cast<std::size_t>(t.idx[1]) * out_w;
            const double* r2 = tmp.data() + static_cast<std::size_t>(t.idx[2]) * out_w;
            const double* r3 = tmp.data() + static_cast<std::size_t>(t.idx[3]) * out_w;
            for (int j = 0; j < out_w; ++j) {
                out.at(i, j, c) =
                    t.w[0] * r0[j] + t.w[1] * r1[j] + t.w[2] * r2[j] + t.w[3] * r3[j];
            }
        }
    }
    return out;
}

// 2-D affine map in continuous pixel coordinates (pixel (i,j) has centre
// (j+0.5, i+0.5); the image centre is (w/2, h/2)). Stored row-major as
// [a b tx; c d ty].
struct Affine {
    double a = 1.0, b = 0.0, tx = 0.0;
    double c = 0.0, d = 1.0, ty = 0.0;

    static Affine identity() { return {}; }

    static Affine translation(double dx, double dy) { return {1.0, 0.0, dx, 0.0, 1.0, dy}; }

    static Affine rotation_about(double degrees, double cx, double cy) {
        const double rad = degrees * std::numbers::pi / 180.0;
        const double co = std::cos(rad), si = std::sin(rad);
        return {co, -si, cx - co * cx + si * cy, si, co, cy - si * cx - co * cy};
    }

    static Affine scale_about(double s, double cx, double cy) {
        return {s, 0.0, cx * (1.0 - s), 0.0, s, cy * (1.0 - s)};
    }

    // Horizontal shear: x' = x + k (y - cy).
    static Affine shear_about(double k, double cy) { return {1.0, k, -k * cy, 0.0, 1.0, 0.0}; }

    static Affine mirror_lr(double width) { return {-1.0, 0.0, width, 0.0, 1.0, 0.0}; }
    static Affine mirror_ud(double height) { return {1.0, 0.0, 0.0, 0.0, -1.0, height}; }

    void apply(double x, double y, double& ox, double& oy) const {
        ox = a * x + b * y + tx;
        oy = c * x + d * y + ty;
    }

    // Composition: (next.then_after(this))(p) = next(this(p)).
    Affine after(const Affine& inner) const {
        return {a * inner.a + b * inner.c, a * inner.b + b * inner.d,
                a * inner.tx + b * inner.ty + tx,
                c * inner.a + d * inner.c, c * inner.b + d * inner.d,
                c * inner.tx + d * inner.ty + ty};
    }

    Affine inverse() const {
        const double det = a * d - b * c;
        require(std::fabs(det) > 1e-300, "singular affine transform");
        const double ia = d / det, ib = -b / det, ic = -c / det, id = a / det;
        return {ia, ib, -(ia * tx + ib * ty), ic, id, -(ic * tx + id * ty)};
    }

    bool is_identity(double eps = 0.0) const {
        return std::fabs(a - 1.0) <= eps && std::fabs(b) <= eps && std::fabs(tx) <= eps &&
               std::fabs(c) <= eps && std::fabs(d - 1.0) <= eps && std::fabs(ty) <= eps;
    }
};

enum class Border { Reflect, ZeroOutside };

// Backward-mapping warp: each output pixel centre p is carried through
// `backward` into source continuous coordinates and bicubic-sampled there.
// With Border::ZeroOutside, samples whose lookup point leaves the source
// footprint are written as 0 and flagged invalid in `mask` (if given).
inline Plane warp_plane(const Plane& src, const Affine& backward, Border border,
                        std::vector<std::uint8_t>* mask = nullptr) {
    Plane out(src.width, src.height);
    if (mask) mask->assign(out.size(), 1);
    for (int i = 0; i < out.height; ++i) {
        for (int j = 0; j < out.width; ++j) {
            double qx, qy;
            backward.apply(j + 0.5, i + 0.5, qx, qy);
            const bool inside =
                qx >= 0.0 && qx <= src.width && qy >= 0.0 && qy <= src.height;
            if (!inside && border == Border::ZeroOutside) {
                out.at(i, j) = 0.0;
                if (mask) (*mask)[static_cast<std::size_t>(i) * out.width + j] = 0;
                continue;
            }
            out.at(i, j) = sample_bicubic(src, qx - 0.5, qy - 0.5);
        }
    }
    return out;
}

inline Raster warp_raster(const Raster& src, const Affine& backward, Border border,
                          std::vector<std::uint8_t>* mask = nullptr) {
    Raster out(src.width(), src.height(), src.gsd());
    for (int c = 0; c < Raster::kChannels; ++c) {
        std::vector<std::uint8_t>* m = (c == 0) ? mask : nullptr;
        out.set_channel(c, warp_plane(src.channel(c), backward, border, m));
    }
    return out;
}

}  // namespace uavsat

#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "uavsat/errors.hpp"
#include "uavsat/fft.hpp"
#include "uavsat/raster.hpp"

namespace uavsat {

// Square convolution kernel with odd side length. make_psf produces kernels
// that are non-negative, unit-sum and 4-fold rotationally symmetric; the
// convolution routines themselves accept any weights.
struct PsfKernel {
    int size = 1;
    std::vector<double> weights;  // size*size, row-major

    double at(int y, int x) const { return weights[static_cast<std::size_t>(y) * size + x]; }
    double& at(int y, int x) { return weights[static_cast<std::size_t>(y) * size + x]; }

    double sum() const {
        double s = 0.0;
        for (double w : weights) s += w;
        return s;
    }

    int radius() const { return (size - 1) / 2; }
};

inline PsfKernel impulse_kernel(int size = 1) {
    PsfKernel k;
    k.size = size;
    k.weights.assign(static_cast<std::size_t>(size) * size, 0.0);
    k.at(size / 2, size / 2) = 1.0;
    return k;
}

namespace detail {

// Direct spatial convolution (true convolution: kernel flipped), reflected
// borders, output size equals input size.
inline Plane convolve_direct(const Plane& in, const PsfKernel& k) {
    const int r = k.radius();
    Plane out(in.width, in.height);
    for (int y = 0; y < in.height; ++y) {
        for (int x = 0; x < in.width; ++x) {
            double acc = 0.0;
            for (int dy = -r; dy <= r; ++dy) {
                const int sy = reflect_index(y - dy, in.height);
                for (int dx = -r; dx <= r; ++dx) {
                    const int sx = reflect_index(x - dx, in.width);
                    acc += k.at(r + dy, r + dx) * in.at(sy, sx);
                }
            }
            out.at(y, x) = acc;
        }
    }
    return out;
}

// FFT convolution plan: kernel spectrum at the chosen block size, shared
// across channels. Uses overlap-save tiling when the image (plus padding)
// exceeds the block size.
class ConvPlan {
public:
    static constexpr std::size_t kMaxBlock = 2048;

    ConvPlan(const PsfKernel& k, int width, int height) : k_size_(k.size) {
        const int r = k.radius();
        fx_ = pick_block(static_cast<std::size_t>(width) + 4 * static_cast<std::size_t>(r));
        fy_ = pick_block(static_cast<std::size_t>(height) + 4 * static_cast<std::size_t>(r));
        kernel_spec_.assign(fx_ * fy_, fft::cd{});
        for (int y = 0; y < k.size; ++y) {
            for (int x = 0; x < k.size; ++x) {
                kernel_spec_[static_cast<std::size_t>(y) * fx_ + x] = k.at(y, x);
            }
        }
        engine_.transform_2d(kernel_spec_, fx_, fy_, false);
    }

    Plane run(const Plane& in) {
        const int r = (k_size_ - 1) / 2;
        const int pad_w = in.width + 2 * r;
        const int pad_h = in.height + 2 * r;

        // reflect-padded source
        std::vector<double> padded(static_cast<std::size_t>(pad_w) * pad_h);
        for (int y = 0; y < pad_h; ++y) {
            const int sy = reflect_index(y - r, in.height);
            double* row = padded.data() + static_cast<std::size_t>(y) * pad_w;
            for (int x = 0; x < pad_w; ++x) {
                row[x] = in.at(sy, reflect_index(x - r, in.width));
            }
        }

        Plane out(in.width, in.height);
        const int valid_x = static_cast<int>(fx_) - (k_size_ - 1);
        const int valid_y = static_cast<int>(fy_) - (k_size_ - 1);
        std::vector<fft::cd> block(fx_ * fy_);

        for (int sy = 0; sy < in.height; sy += valid_y) {
            for (int sx = 0; sx < in.width; sx += valid_x) {
                std::fill(block.begin(), block.end(), fft::cd{});
                for (int by = 0; by < static_cast<int>(fy_); ++by) {
                    const int py = sy + by;
                    if (py >= pad_h) break;
                    const double* src = padded.data() + static_cast<std::size_t>(py) * pad_w;
                    fft::cd* dst = block.data() + static_cast<std::size_t>(by) * fx_;
                    const int nx = std::min<int>(static_cast<int>(fx_), pad_w - sx);
                    for (int bx = 0; bx < nx; ++bx) dst[bx] = src[sx + bx];
                }
                engine_.transform_2d(block, fx_, fy_, false);
                for (std::size_t i = 0; i < block.size(); ++i) block[i] *= kernel_spec_[i];
                engine_.transform_2d(block, fx_, fy_, true);

                const int ny = std::min(valid_y, in.height - sy);
                const int nx = std::min(valid_x, in.width - sx);
                for (int by = 0; by < ny; ++by) {
                    const fft::cd* src =
                        block.data() + static_cast<std::size_t>(by + 2 * r) * fx_ + 2 * r;
                    double* dst = out.data.data() + static_cast<std::size_t>(sy + by) * out.width + sx;
                    for (int bx = 0; bx < nx; ++bx) dst[bx] = src[bx].real();
                }
            }
        }
        return out;
    }

private:
    static std::size_t pick_block(std::size_t needed) {
        const std::size_t p = fft::next_pow2(needed);
        return std::min(p, kMaxBlock);
    }

    int k_size_;
    std::size_t fx_ = 0;
    std::size_t fy_ = 0;
    std::vector<fft::cd> kernel_spec_;
    fft::Engine engine_;
};

constexpr int kDirectConvMaxKernel = 7;

}  // namespace detail

// Per-channel 2-D convolution with reflected borders. Output dimensions
// equal input dimensions. Kernels up to 7x7 run in the spatial domain,
// larger ones through FFT overlap-save blocks; both agree with a direct
// nested-loop evaluation to well below 1e-9 per pixel.
inline Plane convolve(const Plane& in, const PsfKernel& k) {
    require(k.size >= 1 && k.size % 2 == 1, "kernel side must be odd");
    require(k.size <= in.width && k.size <= in.height, "kernel larger than raster");
    if (k.size <= detail::kDirectConvMaxKernel) {
        return detail::convolve_direct(in, k);
    }
    detail::ConvPlan plan(k, in.width, in.height);
    return plan.run(in);
}

inline Raster convolve(const Raster& r, const PsfKernel& k) {
    require(k.size >= 1 && k.size % 2 == 1, "kernel side must be odd");
    require(k.size <= r.width() && k.size <= r.height(), "kernel larger than raster");
    Raster out(r.width(), r.height(), r.gsd());
    if (k.size <= detail::kDirectConvMaxKernel) {
        for (int c = 0; c < Raster::kChannels; ++c) {
            out.set_channel(c, detail::convolve_direct(r.channel(c), k));
        }
        return out;
    }
    detail::ConvPlan plan(k, r.width(), r.height());
    for (int c = 0; c < Raster::kChannels; ++c) {
        Plane ch = r.channel(c);
        out.set_channel(c, plan.run(ch));
    }
    return out;
}

}  // namespace uavsat

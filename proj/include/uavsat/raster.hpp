#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "uavsat/errors.hpp"

namespace uavsat {

// Single-channel image plane, row-major doubles.
struct Plane {
    int width = 0;
    int height = 0;
    std::vector<double> data;

    Plane() = default;
    Plane(int w, int h, double fill = 0.0) : width(w), height(h) {
        require(w >= 1 && h >= 1, "plane dimensions must be positive");
        data.assign(static_cast<std::size_t>(w) * h, fill);
    }

    double& at(int y, int x) { return data[static_cast<std::size_t>(y) * width + x]; }
    double at(int y, int x) const { return data[static_cast<std::size_t>(y) * width + x]; }
    std::size_t size() const { return data.size(); }
};

// RGB raster with a ground-sample-distance tag. Pixels are stored planar
// (channel-major) and real-valued; quantisation to 8-bit happens only on save.
class Raster {
public:
    static constexpr int kChannels = 3;

    Raster() = default;
    Raster(int width, int height, double gsd = 1.0, double fill = 0.0)
        : width_(width), height_(height), gsd_(gsd) {
        require(width >= 1 && height >= 1, "raster dimensions must be positive");
        require(std::isfinite(gsd) && gsd > 0.0, "gsd must be positive");
        data_.assign(static_cast<std::size_t>(kChannels) * width * height, fill);
    }

    int width() const { return width_; }
    int height() const { return height_; }
    double gsd() const { return gsd_; }
    void set_gsd(double gsd) {
        require(std::isfinite(gsd) && gsd > 0.0, "gsd must be positive");
        gsd_ = gsd;
    }

    double& at(int y, int x, int c) { return data_[index(y, x, c)]; }
    double at(int y, int x, int c) const { return data_[index(y, x, c)]; }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    // Copies channel c into a standalone plane.
    Plane channel(int c) const {
        Plane p(width_, height_);
        const double* src = data_.data() + static_cast<std::size_t>(c) * width_ * height_;
        std::copy(src, src + p.size(), p.data.begin());
        return p;
    }

    void set_channel(int c, const Plane& p) {
        require(p.width == width_ && p.height == height_, "channel dimensions mismatch");
        double* dst = data_.data() + static_cast<std::size_t>(c) * width_ * height_;
        std::copy(p.data.begin(), p.data.end(), dst);
    }

    bool same_shape(const Raster& other) const {
        return width_ == other.width_ && height_ == other.height_;
    }

    friend bool operator==(const Raster& a, const Raster& b) {
        return a.width_ == b.width_ && a.height_ == b.height_ && a.gsd_ == b.gsd_ &&
               a.data_ == b.data_;
    }

private:
    std::size_t index(int y, int x, int c) const {
        return (static_cast<std::size_t>(c) * height_ + y) * width_ + x;
    }

    int width_ = 0;
    int height_ = 0;
    double gsd_ = 1.0;
    std::vector<double> data_;
};

// Reflected (symmetric, edge-repeating) index for border handling: valid for
// |i| up to 2n.
inline int reflect_index(int i, int n) {
    if (n == 1) return 0;
    if (i < 0) i = -i - 1;
    if (i >= n) i = 2 * n - 1 - i;
    // A second fold covers kernel radii equal to the full image size.
    if (i < 0) i = -i - 1;
    if (i >= n) i = 2 * n - 1 - i;
    return i;
}

inline double clamp_byte(double v) { return std::clamp(v, 0.0, 255.0); }

}  // namespace uavsat

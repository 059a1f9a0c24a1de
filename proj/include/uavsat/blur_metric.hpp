#pragma once

#include <cmath>

#include "uavsat/errors.hpp"
#include "uavsat/raster.hpp"

namespace uavsat {

struct BlurReport {
    double lv = 0.0;
    int width = 0;
    int height = 0;
};

// Rec.601 luma on the [0,255] scale.
inline Plane to_grayscale(const Raster& r) {
    Plane g(r.width(), r.height());
    for (int y = 0; y < r.height(); ++y) {
        for (int x = 0; x < r.width(); ++x) {
            g.at(y, x) = 0.299 * r.at(y, x, 0) + 0.587 * r.at(y, x, 1) + 0.114 * r.at(y, x, 2);
        }
    }
    return g;
}

// 8-neighbour Laplacian with exact rational weights: corners 1/6, edges 2/3,
// centre -10/3. Reflected borders, output size equals input size. The sum is
// accumulated against the centre pixel so a constant input yields exact
// zeros (the kernel sums to zero).
inline Plane laplacian_response(const Plane& g) {
    require(g.width >= 3 && g.height >= 3, "raster smaller than 3x3");
    constexpr double kCorner = 1.0 / 6.0;
    constexpr double kEdge = 2.0 / 3.0;
    Plane out(g.width, g.height);
    for (int y = 0; y < g.height; ++y) {
        const int ym = reflect_index(y - 1, g.height);
        const int yp = reflect_index(y + 1, g.height);
        for (int x = 0; x < g.width; ++x) {
            const int xm = reflect_index(x - 1, g.width);
            const int xp = reflect_index(x + 1, g.width);
            const double c = g.at(y, x);
            out.at(y, x) = kCorner * ((g.at(ym, xm) - c) + (g.at(ym, xp) - c) +
                                      (g.at(yp, xm) - c) + (g.at(yp, xp) - c)) +
                           kEdge * ((g.at(ym, x) - c) + (g.at(y, xm) - c) +
                                    (g.at(y, xp) - c) + (g.at(yp, x) - c));
        }
    }
    return out;
}

// Population variance of a plane, computed relative to the first element so
// that an identical-valued plane gives exactly zero.
inline double population_variance(const Plane& p) {
    const double ref = p.data.empty() ? 0.0 : p.data[0];
    double acc = 0.0;
    for (double v : p.data) acc += v - ref;
    const double mean_shifted = acc / static_cast<double>(p.size());
    double var = 0.0;
    for (double v : p.data) {
        const double d = (v - ref) - mean_shifted;
        var += d * d;
    }
    return var / static_cast<double>(p.size());
}

// Laplacian-variance sharpness metric: variance of the Laplacian response of
// the luma image. Lower means blurrier.
inline BlurReport laplacian_variance(const Raster& r) {
    require(r.width() >= 3 && r.height() >= 3, "raster smaller than 3x3");
    const Plane response = laplacian_response(to_grayscale(r));
    return BlurReport{population_variance(response), r.width(), r.height()};
}

}  // namespace uavsat

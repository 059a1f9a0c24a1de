#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "uavsat/errors.hpp"
#include "uavsat/kernel.hpp"
#include "uavsat/raster.hpp"
#include "uavsat/resample.hpp"

namespace uavsat {

// Simulated optical stack: wavelength lambda, focal length f, aperture
// diameter D, detector pixel pitch p. All metres, all strictly positive.
struct CameraSpec {
    double wavelength = 550e-9;
    double focal_length = 0.0;
    double aperture_diameter = 0.0;
    double pixel_pitch = 0.0;
};

// Q = lambda f / (D p): ratio of detector sampling frequency to the optical
// cutoff frequency. Q = 2 is critically sampled; larger Q means the optics
// blur more relative to the pixel grid.
inline double q_from_camera(const CameraSpec& c) {
    require(c.wavelength > 0.0 && c.focal_length > 0.0 && c.aperture_diameter > 0.0 &&
                c.pixel_pitch > 0.0,
            "camera parameters must be strictly positive");
    return (c.wavelength * c.focal_length) / (c.aperture_diameter * c.pixel_pitch);
}

struct DegradeConfig {
    double q = 1.0;        // dimensionless aperture quality factor
    double phi = 1.0;      // gsd ratio target/source, >= 1
    double target_gsd = 0.0;  // metres per pixel after degradation
};

namespace detail {

constexpr int kMaxAutoPsfSupport = 129;
constexpr double kPsfEnergyFraction = 0.999;

// Exact values of the centred window of |IDFT(pupil)|^2 on a virtual M x M
// grid, computed directly (the pupil is a set of full rows, so each row's
// DFT contribution collapses to a Dirichlet kernel). Returns the window as
// (2H+1)^2 weights plus the total grid energy for the coverage test.
struct PupilEval {
    int half = 0;
    std::vector<double> window;  // (2H+1)^2 row-major, centre at (H, H)
    double total_energy = 0.0;
    bool delta = false;
};

inline PupilEval eval_circular_pupil(double q, double phi, int half_window) {
    PupilEval ev;
    ev.half = half_window;

    // Pupil (coherent) cutoff relative to the input grid, cycles per pixel.
    const double pupil_radius_freq = 1.0 / (2.0 * phi * q);

    // Virtual grid: large enough that the pupil disk spans >= ~48 bins and
    // dwarfs the evaluation window.
    const double min_m = std::max({1024.0, 96.0 * phi * q, 8.0 * (2.0 * half_window + 1.0)});
    const long m = 2 * static_cast<long>(std::ceil(min_m / 2.0));
    const double rp = pupil_radius_freq * static_cast<double>(m);
    const long k_max = m / 2 - 1;

    if (rp * rp >= 2.0 * static_cast<double>(k_max) * static_cast<double>(k_max)) {
        ev.delta = true;  // pupil covers the whole grid: exact impulse
        return ev;
    }

    const long rows = std::min(static_cast<long>(std::floor(rp)), k_max);
    std::vector<long> row_extent(rows + 1);
    double pupil_bins = 0.0;
    for (long ky = 0; ky <= rows; ++ky) {
        const double rem = rp * rp - static_cast<double>(ky) * ky;
        long kx = static_cast<long>(std::floor(std::sqrt(std::max(0.0, rem))));
        kx = std::min(kx, k_max);
        row_extent[ky] = kx;
        pupil_bins += (ky == 0 ? 1.0 : 2.0) * static_cast<double>(2 * kx + 1);
    }
    ev.total_energy = static_cast<double>(m) * static_cast<double>(m) * pupil_bins;

    // Dirichlet row sums D_K(x) = sin(pi (2K+1) x / M) / sin(pi x / M).
    const int h = half_window;
    std::vector<double> dval(static_cast<std::size_t>(rows + 1) * (h + 1));
    for (long ky = 0; ky <= rows; ++ky) {
        const double n_terms = static_cast<double>(2 * row_extent[ky] + 1);
        for (int x = 0; x <= h; ++x) {
            double v;
            if (x == 0) {
                v = n_terms;
            } else {
                const double u = std::numbers::pi * static_cast<double>(x) / static_cast<double>(m);
                v = std::sin(n_terms * u) / std::sin(u);
            }
            dval[static_cast<std::size_t>(ky) * (h + 1) + x] = v;
        }
    }
    std::vector<double> cosv(static_cast<std::size_t>(rows + 1) * (h + 1));
    for (long ky = 0; ky <= rows; ++ky) {
        for (int y = 0; y <= h; ++y) {
            cosv[static_cast<std::size_t>(ky) * (h + 1) + y] =
                std::cos(2.0 * std::numbers::pi * static_cast<double>(ky) *
                         static_cast<double>(y) / static_cast<double>(m));
        }
    }

    // Evaluate one octant (y <= x) and mirror: the kernel comes out exactly
    // 8-fold symmetric.
    const int side = 2 * h + 1;
    ev.window.assign(static_cast<std::size_t>(side) * side, 0.0);
    auto put = [&](int x, int y, double w) {
        ev.window[static_cast<std::size_t>(h + y) * side + (h + x)] = w;
    };
    for (int x = 0; x <= h; ++x) {
        for (int y = 0; y <= x; ++y) {
            double amp = dval[x];  // ky = 0 row
            for (long ky = 1; ky <= rows; ++ky) {
                amp += 2.0 * cosv[static_cast<std::size_t>(ky) * (h + 1) + y] *
                       dval[static_cast<std::size_t>(ky) * (h + 1) + x];
            }
            const double w = amp * amp;
            put(x, y, w);
            put(x, -y, w);
            put(-x, y, w);
            put(-x, -y, w);
            put(y, x, w);
            put(y, -x, w);
            put(-y, x, w);
            put(-y, -x, w);
        }
    }
    return ev;
}

}  // namespace detail

// Builds the incoherent point-spread function for quality factor q at gsd
// ratio phi: the normalized squared magnitude of the DFT of a filled
// circular pupil whose frequency-domain radius encodes the diffraction
// cutoff implied by q on the output sampling grid, rendered on the phi-times
// finer input grid.
//
// support = 0 picks the smallest odd side capturing >= 99.9% of the kernel
// energy, capped at `auto_cap` (129 by default; degrade lowers it for
// rasters smaller than that). An explicit support that cannot hold 99.9% of
// the energy is an error.
inline PsfKernel make_psf(double q, double phi, int support = 0,
                          int auto_cap = detail::kMaxAutoPsfSupport) {
    require(std::isfinite(q) && q > 0.0, "q must be positive");
    require(std::isfinite(phi) && phi >= 1.0, "phi must be >= 1");
    require(support >= 0, "support must be non-negative");
    require(support == 0 || support % 2 == 1, "support must be odd");
    require(support <= 1001, "support too large");
    require(auto_cap >= 1 && auto_cap % 2 == 1, "auto cap must be odd and positive");

    const bool auto_support = (support == 0);
    const int half = auto_support ? (auto_cap - 1) / 2 : (support - 1) / 2;

    const detail::PupilEval ev = detail::eval_circular_pupil(q, phi, half);
    if (ev.delta) {
        return impulse_kernel(auto_support ? 1 : support);
    }

    const int side = 2 * half + 1;
    // Cumulative energy of centred odd windows, grown ring by ring.
    std::vector<double> ring_energy(half + 1, 0.0);
    for (int y = -half; y <= half; ++y) {
        for (int x = -half; x <= half; ++x) {
            const int ring = std::max(std::abs(x), std::abs(y));
            ring_energy[ring] += ev.window[static_cast<std::size_t>(half + y) * side + (half + x)];
        }
    }

    int chosen_half = half;
    if (auto_support) {
        double acc = 0.0;
        for (int rr = 0; rr <= half; ++rr) {
            acc += ring_energy[rr];
            if (acc >= detail::kPsfEnergyFraction * ev.total_energy) {
                chosen_half = rr;
                break;
            }
        }
        // If nothing reached 99.9%, the cap applies.
    } else {
        double acc = 0.0;
        for (int rr = 0; rr <= half; ++rr) acc += ring_energy[rr];
        if (acc < detail::kPsfEnergyFraction * ev.total_energy) {
            throw DomainError("support too small to hold 99.9% of kernel energy");
        }
    }

    const int out_side = 2 * chosen_half + 1;
    PsfKernel k;
    k.size = out_side;
    k.weights.assign(static_cast<std::size_t>(out_side) * out_side, 0.0);
    double sum = 0.0;
    for (int y = -chosen_half; y <= chosen_half; ++y) {
        for (int x = -chosen_half; x <= chosen_half; ++x) {
            sum += ev.window[static_cast<std::size_t>(half + y) * side + (half + x)];
        }
    }
    for (int y = -chosen_half; y <= chosen_half; ++y) {
        for (int x = -chosen_half; x <= chosen_half; ++x) {
            k.at(chosen_half + y, chosen_half + x) =
                ev.window[static_cast<std::size_t>(half + y) * side + (half + x)] / sum;
        }
    }
    return k;
}

// Full degradation: convolve with the q/phi point-spread function, then
// bicubically downsample by phi. Normalized label coordinates are invariant
// under this uniform resampling, so labels pass through untouched.
inline Raster degrade(const Raster& r, const DegradeConfig& cfg) {
    require(std::isfinite(cfg.target_gsd) && cfg.target_gsd > 0.0, "target_gsd must be positive");
    require(std::fabs(r.gsd() * cfg.phi - cfg.target_gsd) <= 1e-9,
            "source gsd times phi must equal target gsd");
    // the kernel can never be wider than the raster it is applied to
    int cap = std::min({detail::kMaxAutoPsfSupport, r.width(), r.height()});
    if (cap % 2 == 0) --cap;
    const PsfKernel psf = make_psf(cfg.q, cfg.phi, 0, cap);
    const Raster blurred = convolve(r, psf);
    Raster out = downsample_bicubic(blurred, cfg.phi);
    out.set_gsd(cfg.target_gsd);
    return out;
}

}  // namespace uavsat

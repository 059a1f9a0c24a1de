#pragma once

#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

#include "uavsat/errors.hpp"

namespace uavsat::fft {

using cd = std::complex<double>;

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

namespace detail {

// Half-size table of e^{-2pi i k / n}, k in [0, n/2).
inline std::vector<cd> root_table(std::size_t n) {
    std::vector<cd> roots(n / 2);
    const double step = -2.0 * std::numbers::pi / static_cast<double>(n);
    for (std::size_t k = 0; k < n / 2; ++k) {
        roots[k] = std::polar(1.0, step * static_cast<double>(k));
    }
    return roots;
}

// In-place iterative radix-2 transform. `roots` must be sized for some
// n_table >= n with n_table a multiple of n (indexing uses the stride).
inline void pow2_transform(cd* a, std::size_t n, bool inverse, const std::vector<cd>& roots,
                           std::size_t n_table) {
    // bit reversal permutation
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t stride = n_table / len;
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t k = 0; k < len / 2; ++k) {
                cd w = roots[k * stride];
                if (inverse) w = std::conj(w);
                cd u = a[i + k];
                cd v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
            }
        }
    }
    if (inverse) {
        const double inv_n = 1.0 / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) a[i] *= inv_n;
    }
}

}  // namespace detail

// Workspace holding twiddle tables so repeated transforms of the same length
// (rows of an image, say) do not recompute them. Not thread-shared; each
// caller builds its own.
class Engine {
public:
    // Transforms `a` in place; any length >= 1. Non-power-of-two lengths go
    // through Bluestein's algorithm.
    void transform(std::vector<cd>& a, bool inverse) { transform(a.data(), a.size(), inverse); }

    void transform(cd* a, std::size_t n, bool inverse) {
        if (n <= 1) return;
        if (is_pow2(n)) {
            ensure_table(n);
            detail::pow2_transform(a, n, inverse, roots_, table_n_);
            return;
        }
        bluestein(a, n, inverse);
    }

    // 2-D transform of row-major data (height rows of `width` samples).
    void transform_2d(std::vector<cd>& a, std::size_t width, std::size_t height, bool inverse) {
        require(a.size() == width * height, "fft: buffer size mismatch");
        for (std::size_t y = 0; y < height; ++y) {
            transform(a.data() + y * width, width, inverse);
        }
        std::vector<cd> col(height);
        for (std::size_t x = 0; x < width; ++x) {
            for (std::size_t y = 0; y < height; ++y) col[y] = a[y * width + x];
            transform(col.data(), height, inverse);
            for (std::size_t y = 0; y < height; ++y) a[y * width + x] = col[y];
        }
    }

private:
    // Only ever called with power-of-two n; tables for power-of-two sizes
    // nest, so keeping the largest one seen suffices.
    void ensure_table(std::size_t n) {
        if (table_n_ < n) {
            table_n_ = n;
            roots_ = detail::root_table(table_n_);
        }
    }

    void bluestein(cd* a, std::size_t n, bool inverse) {
        const std::size_t m = next_pow2(2 * n - 1);
        // chirp c_k = e^{-i pi k^2 / n}; k^2 taken mod 2n to keep angles small
        std::vector<cd> chirp(n);
        const double sign = inverse ? 1.0 : -1.0;
        for (std::size_t k = 0; k < n; ++k) {
            std::size_t k2 = (k * k) % (2 * n);
            chirp[k] = std::polar(1.0, sign * std::numbers::pi * static_cast<double>(k2) /
                                           static_cast<double>(n));
        }
        std::vector<cd> x(m, cd{});
        std::vector<cd> y(m, cd{});
        for (std::size_t k = 0; k < n; ++k) x[k] = a[k] * chirp[k];
        y[0] = std::conj(chirp[0]);
        for (std::size_t k = 1; k < n; ++k) {
            y[k] = std::conj(chirp[k]);
            y[m - k] = std::conj(chirp[k]);
        }
        ensure_table(m);
        detail::pow2_transform(x.data(), m, false, roots_, table_n_);
        detail::pow2_transform(y.data(), m, false, roots_, table_n_);
        for (std::size_t k = 0; k < m; ++k) x[k] *= y[k];
        detail::pow2_transform(x.data(), m, true, roots_, table_n_);
        const double inv_n = 1.0 / static_cast<double>(n);
        for (std::size_t k = 0; k < n; ++k) {
            cd v = x[k] * chirp[k];
            a[k] = inverse ? v * inv_n : v;
        }
    }

    std::vector<cd> roots_;
    std::size_t table_n_ = 0;
};

// One-shot helpers.
inline void transform(std::vector<cd>& a, bool inverse) {
    Engine e;
    e.transform(a, inverse);
}

inline void transform_2d(std::vector<cd>& a, std::size_t width, std::size_t height,
                         bool inverse) {
    Engine e;
    e.transform_2d(a, width, height, inverse);
}

}  // namespace uavsat::fft

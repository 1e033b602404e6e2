#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "tilegan/common.hpp"
#include "tilegan/tensor.hpp"

namespace tilegan {

using cvec = std::vector<std::complex<double>>;

namespace detail {

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// Iterative radix-2 Cooley-Tukey, in place. Length must be a power of two.
inline void fft_pow2(cvec& a, bool inverse) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang =
            (inverse ? 2.0 : -2.0) * std::numbers::pi / static_cast<double>(len);
        const std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const auto u = a[i + k];
                const auto v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

// Straight O(n^2) transform for sides that are not powers of two.
inline void dft_naive(cvec& a, bool inverse) {
    const std::size_t n = a.size();
    cvec out(n);
    const double sign = inverse ? 2.0 : -2.0;
    for (std::size_t k = 0; k < n; ++k) {
        std::complex<double> acc(0.0, 0.0);
        for (std::size_t t = 0; t < n; ++t) {
            const double ang = sign * std::numbers::pi *
                               static_cast<double>(k * t % n) /
                               static_cast<double>(n);
            acc += a[t] * std::complex<double>(std::cos(ang), std::sin(ang));
        }
        out[k] = acc;
    }
    a = std::move(out);
}

}  // namespace detail

inline void dft_1d(cvec& a, bool inverse = false) {
    require(!a.empty(), "dft_1d: empty input");
    if (a.size() == 1) return;
    if (detail::is_pow2(a.size()))
        detail::fft_pow2(a, inverse);
    else
        detail::dft_naive(a, inverse);
    if (inverse)
        for (auto& v : a) v /= static_cast<double>(a.size());
}

// Row transforms then column transforms.
inline std::vector<cvec> dft_2d(const tensor2& img, bool inverse = false) {
    const auto h = static_cast<std::size_t>(img.rows());
    const auto w = static_cast<std::size_t>(img.cols());
    std::vector<cvec> grid(h, cvec(w));
    for (std::size_t r = 0; r < h; ++r) {
        for (std::size_t c = 0; c < w; ++c)
            grid[r][c] = img(static_cast<Eigen::Index>(r),
                             static_cast<Eigen::Index>(c));
        dft_1d(grid[r], inverse);
    }
    cvec col(h);
    for (std::size_t c = 0; c < w; ++c) {
        for (std::size_t r = 0; r < h; ++r) col[r] = grid[r][c];
        dft_1d(col, inverse);
        for (std::size_t r = 0; r < h; ++r) grid[r][c] = col[r];
    }
    return grid;
}

// |DFT| of the mean-removed, max-abs-normalized image, with the DC bin moved
// to (H/2, W/2). A constant image normalizes to all zeros and stays that way.
inline tensor2 magnitude_spectrum(const tensor2& img) {
    require(img.rows() >= 2 && img.cols() >= 2,
            "magnitude_spectrum: image must be at least 2x2");
    // Checking constancy on the raw image avoids normalizing the rounding
    // residue mean() leaves on values like 0.6 into a fake DC spike.
    if (img.maxCoeff() == img.minCoeff())
        return tensor2::Zero(img.rows(), img.cols());
    tensor2 x = img;
    x.array() -= x.mean();
    const double peak = x.cwiseAbs().maxCoeff();
    if (peak == 0.0) return tensor2::Zero(img.rows(), img.cols());
    x /= peak;
    const auto grid = dft_2d(x);
    const auto h = img.rows(), w = img.cols();
    tensor2 out(h, w);
    for (Eigen::Index r = 0; r < h; ++r)
        for (Eigen::Index c = 0; c < w; ++c)
            out((r + h / 2) % h, (c + w / 2) % w) =
                std::abs(grid[static_cast<std::size_t>(r)]
                             [static_cast<std::size_t>(c)]);
    return out;
}

}  // namespace tilegan

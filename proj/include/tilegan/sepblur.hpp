#pragma once

#include <cmath>
#include <vector>

#include "tilegan/common.hpp"

namespace tilegan::detail {

enum class boundary_mode { reflect, periodic };

// 1-D Gaussian taps, normalized to sum 1. The outer product of two of these
// equals the sum-normalized 2-D isotropic Gaussian, so the separable passes
// below reproduce the dense 2-D kernel exactly.
inline std::vector<double> gaussian_taps(int k, double sigma) {
    require(k >= 1 && k % 2 == 1, "gaussian_taps: kernel size must be odd and >= 1");
    require(sigma > 0.0, "gaussian_taps: sigma must be positive");
    const int r = k / 2;
    std::vector<double> taps(static_cast<std::size_t>(k));
    double sum = 0.0;
    for (int i = 0; i < k; ++i) {
        const double d = i - r;
        taps[static_cast<std::size_t>(i)] = std::exp(-(d * d) / (2.0 * sigma * sigma));
        sum += taps[static_cast<std::size_t>(i)];
    }
    for (double& t : taps) t /= sum;
    return taps;
}

// mirror with edge repeat: -1 -> 0, n -> n-1
inline int wrap_index(int i, int n, boundary_mode mode) {
    if (mode == boundary_mode::periodic) {
        i %= n;
        return i < 0 ? i + n : i;
    }
    while (i < 0 || i >= n) {
        if (i < 0) i = -i - 1;
        if (i >= n) i = 2 * n - 1 - i;
    }
    return i;
}

// y[i] = sum_t taps[t] * x[stride*(wrapped index)] along one axis
inline void conv1d(const double* x, double* y, int n, int stride,
                   const std::vector<double>& taps, boundary_mode mode) {
    const int r = static_cast<int>(taps.size()) / 2;
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int t = 0; t < static_cast<int>(taps.size()); ++t) {
            const int j = wrap_index(i + t - r, n, mode);
            acc += taps[static_cast<std::size_t>(t)] * x[j * stride];
        }
        y[i * stride] = acc;
    }
}

// exact transpose of conv1d as a linear map: scatter instead of gather
inline void conv1d_adjoint(const double* dy, double* dx, int n, int stride,
                           const std::vector<double>& taps, boundary_mode mode) {
    const int r = static_cast<int>(taps.size()) / 2;
    for (int i = 0; i < n; ++i) dx[i * stride] = 0.0;
    for (int i = 0; i < n; ++i) {
        const double g = dy[i * stride];
        for (int t = 0; t < static_cast<int>(taps.size()); ++t) {
            const int j = wrap_index(i + t - r, n, mode);
            dx[j * stride] += taps[static_cast<std::size_t>(t)] * g;
        }
    }
}

// Separable 2-D blur of a row-major h*w buffer, in place via scratch.
inline void blur2d_buffer(const double* in, double* out, int h, int w,
                          const std::vector<double>& taps, boundary_mode mode) {
    std::vector<double> tmp(static_cast<std::size_t>(h) * w);
    for (int row = 0; row < h; ++row)
        conv1d(in + static_cast<std::ptrdiff_t>(row) * w,
               tmp.data() + static_cast<std::ptrdiff_t>(row) * w, w, 1, taps, mode);
    for (int col = 0; col < w; ++col)
        conv1d(tmp.data() + col, out + col, h, w, taps, mode);
}

inline void blur2d_buffer_adjoint(const double* dy, double* dx, int h, int w,
                                  const std::vector<double>& taps,
                                  boundary_mode mode) {
    std::vector<double> tmp(static_cast<std::size_t>(h) * w);
    for (int col = 0; col < w; ++col)
        conv1d_adjoint(dy + col, tmp.data() + col, h, w, taps, mode);
    for (int row = 0; row < h; ++row)
        conv1d_adjoint(tmp.data() + static_cast<std::ptrdiff_t>(row) * w,
                       dx + static_cast<std::ptrdiff_t>(row) * w, w, 1, taps, mode);
}

}  // namespace tilegan::detail

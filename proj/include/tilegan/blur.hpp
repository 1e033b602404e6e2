#pragma once

#include <algorithm>
#include <cmath>
#include <functional>

#include "tilegan/sepblur.hpp"
#include "tilegan/tensor.hpp"

namespace tilegan {

struct blur_config {
    int k = 1;  // odd
    double sigma = 0.8;

    void validate() const {
        if (k < 1 || k % 2 == 0)
            throw config_error("blur_config: kernel size must be odd and >= 1");
        if (!(sigma > 0.0))
            throw config_error("blur_config: sigma must be positive");
    }
};

// k = ceil((1/10) * min(H/p_h, W/p_w)), bumped to the next odd value.
// Larger unit counts mean finer structure and a smaller kernel.
inline int blur_kernel_size(int h, int w, int p_h, int p_w) {
    require(h >= 1 && w >= 1 && p_h >= 1 && p_w >= 1,
            "blur_kernel_size: all arguments must be at least 1");
    const double cell = std::min(static_cast<double>(h) / p_h,
                                 static_cast<double>(w) / p_w);
    int k = static_cast<int>(std::ceil(cell / 10.0));
    if (k < 1) k = 1;
    if (k % 2 == 0) k += 1;
    return k;
}

// sigma = k/6 keeps +-3 sigma inside the kernel; floor at 0.8 so tiny kernels
// still smooth rather than degenerate to near-identity weights.
inline double blur_sigma(int k) { return std::max(k / 6.0, 0.8); }

inline blur_config blur_config_for(int h, int w, int p_h, int p_w) {
    blur_config cfg;
    cfg.k = blur_kernel_size(h, w, p_h, p_w);
    cfg.sigma = blur_sigma(cfg.k);
    return cfg;
}

// Separable Gaussian smoothing of a full image. A kernel too large for the
// image is clamped to the largest odd size that fits; `on_clamp` (if set)
// hears about it so training logs can record the event.
inline tensor2 gaussian_blur(
    const tensor2& img, blur_config cfg,
    detail::boundary_mode mode = detail::boundary_mode::reflect,
    const std::function<void(int requested, int used)>& on_clamp = {}) {
    cfg.validate();
    const int side_min = static_cast<int>(std::min(img.rows(), img.cols()));
    require(side_min >= 1, "gaussian_blur: empty image");
    if (cfg.k > side_min) {
        int clamped = side_min % 2 == 1 ? side_min : side_min - 1;
        if (clamped < 1) clamped = 1;
        if (on_clamp) on_clamp(cfg.k, clamped);
        cfg.k = clamped;
    }
    if (cfg.k == 1) return img;  // identity kernel
    const auto taps = detail::gaussian_taps(cfg.k, cfg.sigma);
    tensor2 row_major_in = img;  // ensure contiguous row-major storage
    tensor2 out(img.rows(), img.cols());
    detail::blur2d_buffer(row_major_in.data(), out.data(),
                          static_cast<int>(img.rows()),
                          static_cast<int>(img.cols()), taps, mode);
    return out;
}

}  // namespace tilegan

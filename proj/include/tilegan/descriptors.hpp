#pragma once

#include <vector>

#include "tilegan/common.hpp"
#include "tilegan/pattern.hpp"
#include "tilegan/tensor.hpp"

namespace tilegan {

struct descriptor_record {
    double feature_coverage = 0.0;
    double mean_feature_area = 0.0;
    int feature_count = 0;
};

// Coverage plus 4-connected component statistics, via an explicit stack so
// large blobs cannot overflow the call stack.
inline descriptor_record compute_descriptors(const tensor2& img) {
    require(is_binary(img), "compute_descriptors: image must be binary");
    const int h = static_cast<int>(img.rows());
    const int w = static_cast<int>(img.cols());
    std::vector<char> seen(static_cast<std::size_t>(h) * w, 0);
    auto at = [&](int r, int c) -> char& {
        return seen[static_cast<std::size_t>(r) * w + c];
    };
    int components = 0;
    std::int64_t foreground = 0;
    std::vector<std::pair<int, int>> stack;
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
            if (img(r, c) == 0.0) continue;
            ++foreground;
            if (at(r, c)) continue;
            ++components;
            at(r, c) = 1;
            stack.assign(1, {r, c});
            while (!stack.empty()) {
                const auto [cr, cc] = stack.back();
                stack.pop_back();
                constexpr int dr[4] = {-1, 1, 0, 0};
                constexpr int dc[4] = {0, 0, -1, 1};
                for (int d = 0; d < 4; ++d) {
                    const int nr = cr + dr[d], nc = cc + dc[d];
                    if (nr < 0 || nr >= h || nc < 0 || nc >= w) continue;
                    if (img(nr, nc) == 0.0 || at(nr, nc)) continue;
                    at(nr, nc) = 1;
                    stack.emplace_back(nr, nc);
                }
            }
        }
    descriptor_record rec;
    rec.feature_count = components;
    rec.feature_coverage =
        static_cast<double>(foreground) / (static_cast<double>(h) * w);
    rec.mean_feature_area =
        components == 0 ? 0.0 : static_cast<double>(foreground) / components;
    return rec;
}

}  // namespace tilegan

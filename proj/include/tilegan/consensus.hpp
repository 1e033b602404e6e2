#pragma once

#include <algorithm>
#include <vector>

#include "tilegan/pattern.hpp"
#include "tilegan/tensor.hpp"

namespace tilegan {

enum class consensus_mode : std::uint8_t { majority, median };

struct consensus_result {
    tensor2 cell;
    int used_h = 0;  // cropped region actually aggregated
    int used_w = 0;
};

// Pixel-wise aggregation across the p_h x p_w tile grid. When the counts do
// not divide the image, the largest divisible region is aggregated and the
// crop is reported in the result. Majority is defined on binary images with
// ties going to foreground; median uses the lower median for even tile
// counts.
inline consensus_result consensus_unit_cell(const tensor2& img, int p_h, int p_w,
                                            consensus_mode mode) {
    require(p_h >= 1 && p_w >= 1, "consensus_unit_cell: counts must be >= 1");
    require(p_h <= img.rows() && p_w <= img.cols(),
            "consensus_unit_cell: more tiles than pixels");
    if (mode == consensus_mode::majority)
        require(is_binary(img), "consensus_unit_cell: majority needs binary input");
    const int cell_h = static_cast<int>(img.rows()) / p_h;
    const int cell_w = static_cast<int>(img.cols()) / p_w;
    consensus_result res;
    res.used_h = cell_h * p_h;
    res.used_w = cell_w * p_w;
    res.cell.resize(cell_h, cell_w);
    const int tiles = p_h * p_w;
    std::vector<double> values(static_cast<std::size_t>(tiles));
    for (int r = 0; r < cell_h; ++r)
        for (int c = 0; c < cell_w; ++c) {
            if (mode == consensus_mode::majority) {
                int ones = 0;
                for (int tr = 0; tr < p_h; ++tr)
                    for (int tc = 0; tc < p_w; ++tc)
                        if (img(tr * cell_h + r, tc * cell_w + c) == 1.0) ++ones;
                res.cell(r, c) = 2 * ones >= tiles ? 1.0 : 0.0;
            } else {
                std::size_t i = 0;
                for (int tr = 0; tr < p_h; ++tr)
                    for (int tc = 0; tc < p_w; ++tc)
                        values[i++] = img(tr * cell_h + r, tc * cell_w + c);
                std::sort(values.begin(), values.end());
                res.cell(r, c) = values[(values.size() - 1) / 2];
            }
        }
    return res;
}

// Periodic tiling of a cell out to (h, w); the period simply continues past
// any non-divisible remainder.
inline tensor2 retile_reconstruction(const tensor2& cell, int h, int w) {
    require(cell.rows() >= 1 && cell.cols() >= 1,
            "retile_reconstruction: empty cell");
    require(h >= 1 && w >= 1, "retile_reconstruction: empty target");
    tensor2 out(h, w);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c)
            out(r, c) = cell(r % cell.rows(), c % cell.cols());
    return out;
}

// Consensus followed by retiling: a projection onto (p_h, p_w)-periodic
// images, idempotent by construction.
inline tensor2 reconstruct_periodic(const tensor2& img, int p_h, int p_w,
                                    consensus_mode mode) {
    const auto res = consensus_unit_cell(img, p_h, p_w, mode);
    return retile_reconstruction(res.cell, static_cast<int>(img.rows()),
                                 static_cast<int>(img.cols()));
}

}  // namespace tilegan

#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "tilegan/common.hpp"
#include "tilegan/pattern.hpp"
#include "tilegan/rng.hpp"
#include "tilegan/tensor.hpp"

namespace tilegan {

enum class shape_kind : std::uint8_t { circle, rectangle, triangle };

// Flat shape description; which fields matter depends on kind. Coordinates
// are in pixel units with pixel centers at +0.5.
struct shape_spec {
    shape_kind kind = shape_kind::rectangle;
    int row0 = 0, col0 = 0, height = 0, width = 0;  // rectangle
    double center_row = 0, center_col = 0, radius = 0;  // circle
    double vr[3] = {0, 0, 0}, vc[3] = {0, 0, 0};  // triangle vertices

    static shape_spec rect(int row0, int col0, int height, int width) {
        shape_spec s;
        s.kind = shape_kind::rectangle;
        s.row0 = row0;
        s.col0 = col0;
        s.height = height;
        s.width = width;
        return s;
    }
    static shape_spec circle(double center_row, double center_col, double radius) {
        shape_spec s;
        s.kind = shape_kind::circle;
        s.center_row = center_row;
        s.center_col = center_col;
        s.radius = radius;
        return s;
    }
    static shape_spec triangle(double r0, double c0, double r1, double c1,
                               double r2, double c2) {
        shape_spec s;
        s.kind = shape_kind::triangle;
        s.vr[0] = r0; s.vc[0] = c0;
        s.vr[1] = r1; s.vc[1] = c1;
        s.vr[2] = r2; s.vc[2] = c2;
        return s;
    }
};

struct unit_cell_spec {
    int side = 8;
    std::vector<shape_spec> shapes;
    std::uint64_t seed = 0;  // provenance of randomly drawn specs
};

namespace detail {

inline void check_fits(const shape_spec& s, int side) {
    const double c = side;
    switch (s.kind) {
        case shape_kind::rectangle:
            if (s.height < 1 || s.width < 1 || s.row0 < 0 || s.col0 < 0 ||
                s.row0 + s.height > side || s.col0 + s.width > side)
                throw config_error("rectangle extends outside the cell");
            return;
        case shape_kind::circle:
            if (!(s.radius > 0.0) || s.center_row - s.radius < 0.0 ||
                s.center_col - s.radius < 0.0 || s.center_row + s.radius > c ||
                s.center_col + s.radius > c)
                throw config_error("circle extends outside the cell");
            return;
        case shape_kind::triangle:
            for (int i = 0; i < 3; ++i)
                if (s.vr[i] < 0.0 || s.vr[i] > c || s.vc[i] < 0.0 || s.vc[i] > c)
                    throw config_error("triangle vertex outside the cell");
            return;
    }
    throw contract_error("bad shape kind");
}

inline bool covers_pixel(const shape_spec& s, int r, int c) {
    const double pr = r + 0.5, pc = c + 0.5;
    switch (s.kind) {
        case shape_kind::rectangle:
            return r >= s.row0 && r < s.row0 + s.height && c >= s.col0 &&
                   c < s.col0 + s.width;
        case shape_kind::circle: {
            const double dr = pr - s.center_row, dc = pc - s.center_col;
            return dr * dr + dc * dc <= s.radius * s.radius;
        }
        case shape_kind::triangle: {
            // pixel center on the inner side of all three edges (either winding)
            auto edge = [&](int i, int j) {
                return (s.vc[j] - s.vc[i]) * (pr - s.vr[i]) -
                       (s.vr[j] - s.vr[i]) * (pc - s.vc[i]);
            };
            const double e0 = edge(0, 1), e1 = edge(1, 2), e2 = edge(2, 0);
            return (e0 >= 0 && e1 >= 0 && e2 >= 0) ||
                   (e0 <= 0 && e1 <= 0 && e2 <= 0);
        }
    }
    throw contract_error("bad shape kind");
}

}  // namespace detail

// Union of rasterized shapes. Deterministic: the spec fully determines the
// pixels.
inline tensor2 render_unit_cell(const unit_cell_spec& spec) {
    require(spec.side >= 4, "render_unit_cell: cell side must be at least 4");
    for (const auto& s : spec.shapes) detail::check_fits(s, spec.side);
    tensor2 cell = tensor2::Zero(spec.side, spec.side);
    for (int r = 0; r < spec.side; ++r)
        for (int c = 0; c < spec.side; ++c)
            for (const auto& s : spec.shapes)
                if (detail::covers_pixel(s, r, c)) {
                    cell(r, c) = 1.0;
                    break;
                }
    return cell;
}

// Periodic repetition: out[i,j] = cell[i mod c, j mod c].
inline tensor2 tile(const tensor2& cell, int p) {
    require(p >= 1, "tile: repetition count must be at least 1");
    const auto side = cell.rows();
    require(side == cell.cols() && side >= 1, "tile: cell must be square");
    require(static_cast<std::int64_t>(side) * p <= 1 << 14,
            "tile: output side would be too large");
    tensor2 out(side * p, side * p);
    for (Eigen::Index i = 0; i < out.rows(); ++i)
        for (Eigen::Index j = 0; j < out.cols(); ++j)
            out(i, j) = cell(i % side, j % side);
    return out;
}

// Random cell proposal used by rejection sampling: a handful of shapes with
// broadly spread sizes so every coverage band stays reachable.
inline unit_cell_spec random_cell_spec(int side, std::uint64_t seed) {
    rng gen(seed);
    unit_cell_spec spec;
    spec.side = side;
    spec.seed = seed;
    const int count = static_cast<int>(gen.uniform_index(5));  // 0..4 shapes
    for (int i = 0; i < count; ++i) {
        const auto kind = static_cast<shape_kind>(gen.uniform_index(3));
        switch (kind) {
            case shape_kind::rectangle: {
                const int h = 1 + static_cast<int>(gen.uniform_index(
                                      static_cast<std::size_t>(side - 1)));
                const int w = 1 + static_cast<int>(gen.uniform_index(
                                      static_cast<std::size_t>(side - 1)));
                const int r0 = static_cast<int>(
                    gen.uniform_index(static_cast<std::size_t>(side - h + 1)));
                const int c0 = static_cast<int>(
                    gen.uniform_index(static_cast<std::size_t>(side - w + 1)));
                spec.shapes.push_back(shape_spec::rect(r0, c0, h, w));
                break;
            }
            case shape_kind::circle: {
                const double radius = gen.uniform(0.7, side / 2.0);
                const double cr = gen.uniform(radius, side - radius);
                const double cc = gen.uniform(radius, side - radius);
                spec.shapes.push_back(shape_spec::circle(cr, cc, radius));
                break;
            }
            case shape_kind::triangle: {
                double r[3], c[3];
                for (int v = 0; v < 3; ++v) {
                    r[v] = gen.uniform(0.0, static_cast<double>(side));
                    c[v] = gen.uniform(0.0, static_cast<double>(side));
                }
                spec.shapes.push_back(
                    shape_spec::triangle(r[0], c[0], r[1], c[1], r[2], c[2]));
                break;
            }
        }
    }
    return spec;
}

}  // namespace tilegan

#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>

#include "tilegan/common.hpp"
#include "tilegan/tensor.hpp"

namespace tilegan {

// Images are tensor2 throughout: binary ones hold exactly {0,1}, continuous
// ones hold finite doubles (generator outputs live in [-1,1]).

inline bool is_binary(const tensor2& img) {
    for (Eigen::Index r = 0; r < img.rows(); ++r)
        for (Eigen::Index c = 0; c < img.cols(); ++c)
            if (img(r, c) != 0.0 && img(r, c) != 1.0) return false;
    return true;
}

inline tensor2 binarize_at(const tensor2& img, double threshold) {
    return img.unaryExpr(
        [threshold](double v) { return v > threshold ? 1.0 : 0.0; });
}

// {0,1} <-> [-1,1], the generator's native range.
inline tensor2 to_pm1(const tensor2& binary) {
    return (2.0 * binary.array() - 1.0).matrix();
}

inline tensor2 from_pm1(const tensor2& x) { return binarize_at(x, 0.0); }

inline tensor2 flatten_row(const tensor2& img) {
    tensor2 row(1, img.size());
    Eigen::Index k = 0;
    for (Eigen::Index r = 0; r < img.rows(); ++r)
        for (Eigen::Index c = 0; c < img.cols(); ++c) row(0, k++) = img(r, c);
    return row;
}

inline tensor2 unflatten_row(const tensor2& row, int h, int w) {
    require(row.rows() == 1 && row.cols() == static_cast<Eigen::Index>(h) * w,
            "unflatten_row: length must equal h*w");
    tensor2 img(h, w);
    Eigen::Index k = 0;
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) img(r, c) = row(0, k++);
    return img;
}

// Raw binary PGM (P5), maxval 255: background 0, foreground 255.
inline void write_pgm(const std::filesystem::path& path, const tensor2& img) {
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw config_error("cannot open for writing: " + tmp);
        out << "P5\n" << img.cols() << " " << img.rows() << "\n255\n";
        for (Eigen::Index r = 0; r < img.rows(); ++r)
            for (Eigen::Index c = 0; c < img.cols(); ++c) {
                const double v = img(r, c);
                double scaled = v <= 0.0 ? 0.0 : (v >= 1.0 ? 255.0 : std::round(v * 255.0));
                const auto byte = static_cast<unsigned char>(scaled);
                out.write(reinterpret_cast<const char*>(&byte), 1);
            }
        if (!out) throw config_error("short write: " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

inline tensor2 read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot open image: " + path.string());
    std::string magic;
    in >> magic;
    if (magic != "P5") throw config_error(path.string() + ": expected P5 magic");
    auto next_token = [&in, &path]() {
        // skip whitespace and '#' comment lines, as the format allows
        int ch = in.get();
        while (ch != EOF) {
            if (ch == '#') {
                while (ch != EOF && ch != '\n') ch = in.get();
            } else if (!std::isspace(ch)) {
                break;
            }
            ch = in.get();
        }
        std::string tok;
        while (ch != EOF && !std::isspace(ch)) {
            tok.push_back(static_cast<char>(ch));
            ch = in.get();
        }
        if (tok.empty()) throw config_error(path.string() + ": truncated header");
        return tok;
    };
    const int w = std::stoi(next_token());
    const int h = std::stoi(next_token());
    const int maxval = std::stoi(next_token());
    if (w < 1 || h < 1 || maxval < 1 || maxval > 255)
        throw config_error(path.string() + ": bad PGM header");
    std::string data(static_cast<std::size_t>(w) * h, '\0');
    in.read(data.data(), static_cast<std::streamsize>(data.size()));
    if (in.gcount() != static_cast<std::streamsize>(data.size()))
        throw config_error(path.string() + ": truncated pixel data");
    tensor2 img(h, w);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c)
            img(r, c) = static_cast<unsigned char>(
                            data[static_cast<std::size_t>(r) * w + c]) /
                        static_cast<double>(maxval);
    return img;
}

// Threshold at mid-gray; files we write hold exactly 0 or 255.
inline tensor2 read_pgm_binary(const std::filesystem::path& path) {
    return binarize_at(read_pgm(path), 0.5);
}

}  // namespace tilegan

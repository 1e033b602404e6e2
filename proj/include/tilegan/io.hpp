#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "tilegan/common.hpp"

namespace tilegan {

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot open for reading: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Write to a sibling temp file, then rename over the target, so a crash never
// leaves a half-written file behind.
inline void write_text_atomic(const std::filesystem::path& path,
                              const std::string& content) {
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw config_error("cannot open for writing: " + tmp);
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw config_error("short write: " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace tilegan

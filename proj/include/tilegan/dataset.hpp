#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "tilegan/descriptors.hpp"
#include "tilegan/io.hpp"
#include "tilegan/pattern.hpp"
#include "tilegan/rng.hpp"
#include "tilegan/shapes.hpp"

namespace tilegan {

using nlohmann::json;

constexpr int num_classes = 3;

// Classes are coverage bands: [0, low_hi), [low_hi, mid_hi), [mid_hi, 1].
struct label_rule {
    double low_hi = 0.15;
    double mid_hi = 0.35;

    void validate() const {
        if (!(0.0 < low_hi && low_hi < mid_hi && mid_hi <= 1.0))
            throw config_error("label_rule: need 0 < low_hi < mid_hi <= 1");
    }

    int label_of(double coverage) const {
        if (coverage < low_hi) return 0;
        if (coverage < mid_hi) return 1;
        return 2;
    }
};

struct synth_config {
    int image_side = 64;
    int cell_side = 8;
    std::array<int, num_classes> train_counts = {128, 128, 128};
    int test_per_class = 32;
    label_rule rule;
    std::uint64_t seed = 1;
    double label_noise = 0.0;  // probability of replacing a label with a wrong one
    double flip_noise = 0.0;   // per-pixel flip probability on the tiled image

    void validate() const {
        if (image_side < 4 || cell_side < 4)
            throw config_error("synth_config: sides must be at least 4");
        if (image_side % cell_side != 0)
            throw config_error("synth_config: cell side must divide image side");
        for (int n : train_counts)
            if (n < 0) throw config_error("synth_config: negative class count");
        if (test_per_class < 0)
            throw config_error("synth_config: negative test count");
        rule.validate();
        if (label_noise < 0.0 || label_noise > 1.0 || flip_noise < 0.0 ||
            flip_noise > 1.0)
            throw config_error("synth_config: noise knobs must lie in [0,1]");
    }
};

struct manifest_entry {
    std::string path;  // relative to the manifest's directory
    int label = 0;
    double coverage = 0.0;
    double mean_feature_area = 0.0;
    int feature_count = 0;
    std::uint64_t seed = 0;
};

struct dataset_manifest {
    std::filesystem::path root;
    std::vector<manifest_entry> entries;

    std::array<int, num_classes> counts() const {
        std::array<int, num_classes> n{};
        for (const auto& e : entries) {
            require(e.label >= 0 && e.label < num_classes,
                    "manifest: label outside the declared label set");
            ++n[static_cast<std::size_t>(e.label)];
        }
        return n;
    }

    std::filesystem::path resolve(const manifest_entry& e) const {
        return root / e.path;
    }
};

inline void write_manifest(const std::filesystem::path& path,
                           const std::vector<manifest_entry>& entries) {
    std::string out;
    for (const auto& e : entries) {
        json j{{"path", e.path},
               {"label", e.label},
               {"coverage", e.coverage},
               {"mean_feature_area", e.mean_feature_area},
               {"feature_count", e.feature_count},
               {"seed", e.seed}};
        out += j.dump();
        out += '\n';
    }
    write_text_atomic(path, out);
}

inline dataset_manifest load_manifest(const std::filesystem::path& path) {
    dataset_manifest m;
    m.root = path.has_parent_path() ? path.parent_path()
                                    : std::filesystem::path(".");
    const std::string text = read_text(path);
    std::size_t pos = 0;
    int line_no = 0;
    while (pos < text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        const std::string line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw config_error(path.string() + ":" + std::to_string(line_no) +
                               ": bad manifest line: " + e.what());
        }
        manifest_entry e;
        try {
            e.path = j.at("path").get<std::string>();
            e.label = j.at("label").get<int>();
            e.coverage = j.at("coverage").get<double>();
            e.mean_feature_area = j.at("mean_feature_area").get<double>();
            e.feature_count = j.at("feature_count").get<int>();
            e.seed = j.at("seed").get<std::uint64_t>();
        } catch (const json::exception& ex) {
            throw config_error(path.string() + ":" + std::to_string(line_no) +
                               ": missing manifest field: " + ex.what());
        }
        if (e.label < 0 || e.label >= num_classes)
            throw config_error(path.string() + ":" + std::to_string(line_no) +
                               ": label outside the declared label set");
        if (!std::filesystem::exists(m.root / e.path))
            throw config_error(path.string() + ":" + std::to_string(line_no) +
                               ": image file missing: " + e.path);
        m.entries.push_back(std::move(e));
    }
    return m;
}

namespace detail {

struct synth_sample {
    tensor2 image;
    descriptor_record desc;
    int label = 0;
    std::uint64_t seed = 0;
};

// One rejection-sampling attempt: draw a cell, tile it, corrupt it if asked,
// then measure and label the final pixels (so saved descriptors always match
// the saved file; label_noise alone may override the label afterwards).
inline synth_sample draw_sample(const synth_config& cfg,
                                std::uint64_t attempt_seed) {
    synth_sample s;
    s.seed = attempt_seed;
    const auto spec =
        random_cell_spec(cfg.cell_side, rng::substream_seed(attempt_seed, 0));
    s.image = tile(render_unit_cell(spec), cfg.image_side / cfg.cell_side);
    if (cfg.flip_noise > 0.0) {
        rng noise(rng::substream(attempt_seed, 1));
        for (Eigen::Index r = 0; r < s.image.rows(); ++r)
            for (Eigen::Index c = 0; c < s.image.cols(); ++c)
                if (noise.bernoulli(cfg.flip_noise))
                    s.image(r, c) = 1.0 - s.image(r, c);
    }
    s.desc = compute_descriptors(s.image);
    s.label = cfg.rule.label_of(s.desc.feature_coverage);
    if (cfg.label_noise > 0.0) {
        rng corrupt(rng::substream(attempt_seed, 2));
        if (corrupt.bernoulli(cfg.label_noise))
            s.label = static_cast<int>(
                (s.label + 1 + corrupt.uniform_index(num_classes - 1)) %
                num_classes);
    }
    return s;
}

}  // namespace detail

struct synth_result {
    dataset_manifest train;
    dataset_manifest test;
};

// Fill per-class quotas by rejection sampling, write PGMs plus JSONL
// manifests plus meta.json under out_dir. Fully determined by cfg.
inline synth_result synth_dataset(const synth_config& cfg,
                                  const std::filesystem::path& out_dir) {
    cfg.validate();
    std::filesystem::create_directories(out_dir);

    std::int64_t total = cfg.test_per_class * static_cast<std::int64_t>(num_classes);
    for (int n : cfg.train_counts) total += n;
    const std::int64_t max_attempts = 4000 * std::max<std::int64_t>(total, 1);

    std::array<int, num_classes> want_train = cfg.train_counts;
    std::array<int, num_classes> want_test{};
    want_test.fill(cfg.test_per_class);

    std::vector<manifest_entry> train_entries, test_entries;
    std::int64_t attempt = 0;
    auto fill = [&](std::array<int, num_classes>& want,
                    std::vector<manifest_entry>& entries, const char* subdir) {
        auto remaining = [&want]() {
            int r = 0;
            for (int n : want) r += n;
            return r;
        };
        while (remaining() > 0) {
            if (attempt >= max_attempts)
                throw config_error(
                    "synth_dataset: a class band looks unreachable under the "
                    "label rule (gave up after " +
                    std::to_string(max_attempts) + " attempts)");
            const auto s = detail::draw_sample(
                cfg, rng::substream_seed(cfg.seed,
                                    static_cast<std::uint64_t>(attempt)));
            ++attempt;
            auto& quota = want[static_cast<std::size_t>(s.label)];
            if (quota == 0) continue;
            --quota;
            char name[32];
            std::snprintf(name, sizeof(name), "%s/%06zu.pgm", subdir,
                          entries.size());
            write_pgm(out_dir / name, s.image);
            manifest_entry e;
            e.path = name;
            e.label = s.label;
            e.coverage = s.desc.feature_coverage;
            e.mean_feature_area = s.desc.mean_feature_area;
            e.feature_count = s.desc.feature_count;
            e.seed = s.seed;
            entries.push_back(std::move(e));
        }
    };
    fill(want_train, train_entries, "train");
    fill(want_test, test_entries, "test");

    write_manifest(out_dir / "train_manifest.jsonl", train_entries);
    write_manifest(out_dir / "test_manifest.jsonl", test_entries);

    json meta{{"image_side", cfg.image_side},
              {"cell_side", cfg.cell_side},
              {"train_counts", cfg.train_counts},
              {"test_per_class", cfg.test_per_class},
              {"label_rule", {{"low_hi", cfg.rule.low_hi}, {"mid_hi", cfg.rule.mid_hi}}},
              {"seed", cfg.seed},
              {"label_noise", cfg.label_noise},
              {"flip_noise", cfg.flip_noise},
              {"format", "pgm"}};
    write_text_atomic(out_dir / "meta.json", meta.dump(2) + "\n");

    synth_result res;
    res.train.root = out_dir;
    res.train.entries = std::move(train_entries);
    res.test.root = out_dir;
    res.test.entries = std::move(test_entries);
    return res;
}

// Flattened {0,1} images as rows, plus labels, in manifest order.
struct image_batch {
    tensor2 rows;  // N x (side*side)
    std::vector<int> labels;
    int side = 0;
};

inline image_batch load_images(const dataset_manifest& m) {
    image_batch batch;
    require(!m.entries.empty(), "load_images: empty manifest");
    for (std::size_t i = 0; i < m.entries.size(); ++i) {
        const tensor2 img = read_pgm_binary(m.resolve(m.entries[i]));
        if (i == 0) {
            require(img.rows() == img.cols(), "load_images: images must be square");
            batch.side = static_cast<int>(img.rows());
            batch.rows.resize(static_cast<Eigen::Index>(m.entries.size()),
                              img.size());
        }
        require(img.rows() == batch.side && img.cols() == batch.side,
                "load_images: inconsistent image sizes in manifest");
        batch.rows.row(static_cast<Eigen::Index>(i)) = flatten_row(img).row(0);
        batch.labels.push_back(m.entries[i].label);
    }
    return batch;
}

}  // namespace tilegan

#pragma once

#include <algorithm>
#include <array>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "tilegan/balance.hpp"
#include "tilegan/blur.hpp"
#include "tilegan/checkpoint.hpp"
#include "tilegan/common.hpp"
#include "tilegan/confidence.hpp"
#include "tilegan/dataset.hpp"
#include "tilegan/descriptors.hpp"
#include "tilegan/fft.hpp"
#include "tilegan/frechet.hpp"
#include "tilegan/gan.hpp"
#include "tilegan/guidance.hpp"
#include "tilegan/io.hpp"
#include "tilegan/pattern.hpp"
#include "tilegan/surrogate.hpp"

// Subcommand bodies shared by the command-line tool and the end-to-end test
// suites: each function does the work and writes the artifacts; flag parsing
// and resolved-config emission stay in the tool.

namespace tilegan {

using progress_fn = std::function<void(const std::string&)>;

namespace detail {

inline void say(const progress_fn& progress, const std::string& line) {
    if (progress) progress(line);
}

inline std::string g12(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

}  // namespace detail

// ---------------------------------------------------------------- train

struct train_result {
    gan_checkpoint final_state;
    std::vector<metric_row> metrics;
    std::filesystem::path checkpoint_path;
    std::filesystem::path metrics_path;
};

inline train_result run_train(const train_config& cfg,
                              const std::filesystem::path& data_dir,
                              const std::filesystem::path& out_dir,
                              const progress_fn& progress = {}) {
    cfg.validate();
    std::filesystem::create_directories(out_dir / "samples");
    const auto manifest = load_manifest(data_dir / "train_manifest.jsonl");
    auto images = load_images(manifest);
    require(images.side == cfg.image_side,
            "run_train: dataset image side does not match the configured side");

    gan_trainer trainer(cfg, std::move(images));
    trainer.log = progress;
    const std::uint64_t grid_seed = rng::substream_seed(cfg.seed, 2);
    trainer.on_checkpoint = [&](std::int64_t epoch, const gan_checkpoint& c) {
        c.save(out_dir / "checkpoint.json");
        char name[64];
        std::snprintf(name, sizeof name, "epoch_%06" PRId64 ".pgm", epoch);
        write_pgm(out_dir / "samples" / name,
                  sample_grid(c.gen_spec, c.gen_params, c.embedding,
                              cfg.image_side, 8, grid_seed));
        detail::say(progress, "checkpoint at epoch " + std::to_string(epoch));
    };
    try {
        trainer.train();
    } catch (const divergence_error&) {
        write_text_atomic(out_dir / "metrics.csv", metrics_csv(trainer.metrics()));
        throw;
    }

    train_result res;
    res.final_state = trainer.checkpoint();
    res.metrics = trainer.metrics();
    res.checkpoint_path = out_dir / "checkpoint.json";
    res.metrics_path = out_dir / "metrics.csv";
    write_text_atomic(res.metrics_path, metrics_csv(res.metrics));
    write_pgm(out_dir / "samples_final.pgm",
              sample_grid(res.final_state.gen_spec, res.final_state.gen_params,
                          res.final_state.embedding, cfg.image_side, 8,
                          grid_seed));
    return res;
}

// ---------------------------------------------------------------- generate

struct generate_result {
    dataset_manifest manifest;
    std::filesystem::path manifest_path;
};

inline generate_result run_generate(const std::filesystem::path& checkpoint_path,
                                    int per_class, std::uint64_t seed,
                                    const std::filesystem::path& out_dir,
                                    const progress_fn& progress = {}) {
    require(per_class >= 1, "run_generate: per_class must be >= 1");
    const auto state = gan_checkpoint::load(checkpoint_path);
    const int side = static_cast<int>(
        std::lround(std::sqrt(double(state.gen_spec.widths.back()))));
    require(side * side == state.gen_spec.widths.back(),
            "run_generate: generator output is not a square image");
    const int classes = static_cast<int>(state.embedding.rows());

    std::filesystem::create_directories(out_dir / "images");
    generate_result res;
    res.manifest.root = out_dir;
    std::size_t index = 0;
    for (int y = 0; y < classes; ++y) {
        const std::uint64_t class_seed = rng::substream_seed(seed, y);
        const auto images = gan_trainer::generate_from(
            state.gen_spec, state.gen_params, state.embedding, side, y,
            per_class, class_seed);
        for (const auto& img : images) {
            char name[64];
            std::snprintf(name, sizeof name, "images/%06zu.pgm", index++);
            write_pgm(out_dir / name, img);
            const auto desc = compute_descriptors(img);
            manifest_entry e;
            e.path = name;
            e.label = y;
            e.coverage = desc.feature_coverage;
            e.mean_feature_area = desc.mean_feature_area;
            e.feature_count = desc.feature_count;
            e.seed = class_seed;
            res.manifest.entries.push_back(e);
        }
        detail::say(progress, "generated " + std::to_string(per_class) +
                                  " samples for class " + std::to_string(y));
    }
    res.manifest_path = out_dir / "gen_manifest.jsonl";
    write_manifest(res.manifest_path, res.manifest.entries);
    return res;
}

// ---------------------------------------------------------------- analyze

struct analyze_result {
    unit_cell_estimate estimate;
    json report;
    std::filesystem::path report_path;
};

inline analyze_result run_analyze(const std::filesystem::path& image_path,
                                  const peak_detect_config& peaks,
                                  bool write_spectrum,
                                  const std::filesystem::path& out_dir) {
    peaks.validate();
    std::filesystem::create_directories(out_dir);
    const tensor2 img = binarize_at(read_pgm(image_path), 0.5);

    analyze_result res;
    res.estimate = estimate_unit_count(img, peaks);
    const tensor2 spectrum = magnitude_spectrum(img);
    const auto [profile_h, profile_v] = project(spectrum);

    res.report["image"] = image_path.string();
    res.report["p_h"] = res.estimate.p_h;
    res.report["p_w"] = res.estimate.p_w;
    res.report["valid"] = res.estimate.valid;
    res.report["tau_h"] = res.estimate.tau_h;
    res.report["tau_w"] = res.estimate.tau_w;
    res.report["peaks_h"] = res.estimate.peaks_h;
    res.report["peaks_w"] = res.estimate.peaks_w;
    res.report["profile_horizontal"] = profile_h;
    res.report["profile_vertical"] = profile_v;
    res.report_path = out_dir / "analyze.json";
    write_text_atomic(res.report_path, res.report.dump(2) + "\n");

    if (write_spectrum) {
        tensor2 log_spec =
            (spectrum.array() + 1.0).log().matrix();
        const double peak = log_spec.maxCoeff();
        if (peak > 0.0) log_spec /= peak;
        write_pgm(out_dir / "log_spectrum.pgm", log_spec);
    }
    return res;
}

// ---------------------------------------------------------------- eval

struct eval_result {
    fid_report fid;
    eval_metrics surrogate_test;
    classifier_checkpoint surrogate;
    std::filesystem::path report_path;
};

inline surrogate_model model_from_checkpoint(const classifier_checkpoint& c) {
    surrogate_model m;
    m.spec = c.spec;
    m.params = c.params;
    m.image_side = c.image_side;
    m.classes = c.num_classes;
    return m;
}

inline classifier_checkpoint checkpoint_from_model(const surrogate_model& m) {
    classifier_checkpoint c;
    c.image_side = m.image_side;
    c.num_classes = m.classes;
    c.spec = m.spec;
    c.params = m.params;
    return c;
}

// Train the surrogate on the train split unless a checkpoint is supplied.
inline classifier_checkpoint obtain_surrogate(
    const std::filesystem::path& surrogate_path, const dataset_manifest& train,
    const surrogate_config& scfg, const progress_fn& progress) {
    if (!surrogate_path.empty()) {
        detail::say(progress, "loading surrogate " + surrogate_path.string());
        return classifier_checkpoint::load(surrogate_path);
    }
    detail::say(progress, "training surrogate on " +
                              std::to_string(train.entries.size()) + " samples");
    return checkpoint_from_model(train_surrogate(load_images(train), scfg));
}

inline eval_result run_eval(const std::filesystem::path& data_dir,
                            const std::filesystem::path& gen_manifest_path,
                            const std::filesystem::path& surrogate_path,
                            const surrogate_config& scfg, int is_splits,
                            const std::filesystem::path& out_dir,
                            const progress_fn& progress = {}) {
    scfg.validate();
    std::filesystem::create_directories(out_dir);
    const auto train = load_manifest(data_dir / "train_manifest.jsonl");
    const auto test = load_manifest(data_dir / "test_manifest.jsonl");
    const auto gen = load_manifest(gen_manifest_path);

    eval_result res;
    res.surrogate = obtain_surrogate(surrogate_path, train, scfg, progress);
    if (surrogate_path.empty())
        res.surrogate.save(out_dir / "surrogate.json");
    const auto model = model_from_checkpoint(res.surrogate);

    const auto test_batch = load_images(test);
    const auto gen_batch = load_images(gen);
    res.fid = topofid_report(model, test_batch.rows, gen_batch.rows, is_splits,
                             progress);
    res.surrogate_test = evaluate_surrogate(model, test_batch);

    json report{{"topofid", res.fid.topofid},
                {"is_mean", res.fid.is_mean},
                {"is_std", res.fid.is_std},
                {"n_real", res.fid.n_real},
                {"n_gen", res.fid.n_gen},
                {"surrogate_accuracy", res.surrogate_test.accuracy},
                {"surrogate_macro_f1", res.surrogate_test.macro_f1}};
    res.report_path = out_dir / "eval.json";
    write_text_atomic(res.report_path, report.dump(2) + "\n");
    return res;
}

// ---------------------------------------------------------------- augment

struct augment_options {
    std::filesystem::path data_dir;
    std::filesystem::path generator_path;
    std::filesystem::path surrogate_path;  // empty: train on the imbalanced split
    double alpha_conf = 0.90;
    threshold_mode mode = threshold_mode::quantile;
    int pool_per_class = 4000;
    std::uint64_t seed = 1;
    bool retrain = true;
    surrogate_config surrogate;
};

struct augment_result {
    std::array<int, num_classes> generated{};
    std::array<int, num_classes> accepted{};
    std::array<int, num_classes> added{};
    confidence_model model;
    eval_metrics baseline;
    eval_metrics augmented;
    dataset_manifest balanced;
    std::filesystem::path manifest_path;
    std::filesystem::path report_path;
};

namespace detail {

// Generation happens in fixed-size chunks with per-chunk substreams so the
// scoring pass and the later materialization pass see identical pixels
// without holding every candidate in memory.
constexpr int augment_chunk = 256;

template <typename visit_fn>
void visit_generated_pool(const gan_checkpoint& state, int side, int label,
                          int pool, std::uint64_t seed, visit_fn&& visit) {
    for (int start = 0, chunk = 0; start < pool; start += augment_chunk, ++chunk) {
        const int count = std::min(augment_chunk, pool - start);
        const auto images = gan_trainer::generate_from(
            state.gen_spec, state.gen_params, state.embedding, side, label,
            count, rng::substream_seed(seed, 16 + 8 * chunk + label));
        for (int i = 0; i < count; ++i) visit(start + i, images[static_cast<std::size_t>(i)]);
    }
}

}  // namespace detail

inline augment_result run_augment(const augment_options& opt,
                                  const std::filesystem::path& out_dir,
                                  const progress_fn& progress = {}) {
    opt.surrogate.validate();
    if (!(opt.alpha_conf > 0.0 && opt.alpha_conf < 1.0))
        throw config_error("augment: alpha_conf must lie in (0,1)");
    if (opt.pool_per_class < 2)
        throw config_error("augment: pool_per_class must be >= 2");
    std::filesystem::create_directories(out_dir / "aug");

    const auto train = load_manifest(opt.data_dir / "train_manifest.jsonl");
    const auto test = load_manifest(opt.data_dir / "test_manifest.jsonl");
    const auto counts = train.counts();
    const auto need = additions_for(counts);
    const auto state = gan_checkpoint::load(opt.generator_path);
    const int side = static_cast<int>(
        std::lround(std::sqrt(double(state.gen_spec.widths.back()))));
    require(side * side == state.gen_spec.widths.back(),
            "augment: generator output is not a square image");

    augment_result res;
    const auto surrogate_state =
        obtain_surrogate(opt.surrogate_path, train, opt.surrogate, progress);
    if (opt.surrogate_path.empty())
        surrogate_state.save(out_dir / "surrogate.json");
    const auto model = model_from_checkpoint(surrogate_state);
    require(model.image_side == side,
            "augment: surrogate and generator disagree on image side");

    const auto test_batch = load_images(test);
    res.baseline = evaluate_surrogate(model, test_batch);

    // Pass 1: score every candidate, keeping confidences only.
    std::vector<std::vector<double>> scores(num_classes);
    for (int y = 0; y < num_classes; ++y) {
        scores[static_cast<std::size_t>(y)].resize(
            static_cast<std::size_t>(opt.pool_per_class));
        detail::visit_generated_pool(
            state, side, y, opt.pool_per_class, opt.seed,
            [&](int index, const tensor2& img) {
                const tensor2 probs = predict_probabilities(
                    model, flatten_row(img));
                scores[static_cast<std::size_t>(y)]
                      [static_cast<std::size_t>(index)] = probs(0, y);
            });
        res.generated[static_cast<std::size_t>(y)] = opt.pool_per_class;
        detail::say(progress, "scored class " + std::to_string(y) + " pool");
    }

    res.model = fit_confidence_model(scores, opt.alpha_conf);

    // Accepted candidates become manifest entries; pixels are re-derived in
    // pass 2 for just the ones the balancing step actually selects.
    std::array<std::vector<scored_entry>, num_classes> pools;
    for (int y = 0; y < num_classes; ++y) {
        const auto accepted = filter_samples(scores[static_cast<std::size_t>(y)],
                                             res.model, y, opt.mode);
        res.accepted[static_cast<std::size_t>(y)] =
            static_cast<int>(accepted.size());
        for (std::size_t i : accepted) {
            scored_entry se;
            char name[64];
            std::snprintf(name, sizeof name, "aug/c%d_%06zu.pgm", y, i);
            se.entry.path = name;
            se.entry.label = y;
            se.entry.seed = opt.seed;
            se.confidence = scores[static_cast<std::size_t>(y)][i];
            pools[static_cast<std::size_t>(y)].push_back(se);
        }
    }

    balance_report breport;
    const auto data_rel =
        std::filesystem::relative(opt.data_dir, out_dir);
    dataset_manifest real_rebased = train;
    real_rebased.root = out_dir;
    for (auto& e : real_rebased.entries)
        e.path = (data_rel / e.path).generic_string();
    res.balanced = balance_dataset(real_rebased, pools, &breport);
    res.added = breport.added;

    // Pass 2: materialize only the selected synthetic samples.
    std::array<std::vector<std::size_t>, num_classes> selected;
    for (std::size_t k = real_rebased.entries.size();
         k < res.balanced.entries.size(); ++k) {
        auto& e = res.balanced.entries[k];
        // the pool index is embedded in the filename written above
        const auto stem = std::filesystem::path(e.path).stem().string();
        selected[static_cast<std::size_t>(e.label)].push_back(
            std::stoull(stem.substr(stem.find('_') + 1)));
    }
    for (int y = 0; y < num_classes; ++y) {
        auto& want = selected[static_cast<std::size_t>(y)];
        if (want.empty()) continue;
        std::sort(want.begin(), want.end());
        std::size_t cursor = 0;
        detail::visit_generated_pool(
            state, side, y, opt.pool_per_class, opt.seed,
            [&](int index, const tensor2& img) {
                if (cursor >= want.size() ||
                    want[cursor] != static_cast<std::size_t>(index))
                    return;
                ++cursor;
                char name[64];
                std::snprintf(name, sizeof name, "aug/c%d_%06d.pgm", y, index);
                write_pgm(out_dir / name, img);
            });
        require(cursor == want.size(), "augment: selected sample not revisited");
    }
    // fill descriptors for the synthetic entries now that pixels exist
    for (std::size_t k = real_rebased.entries.size();
         k < res.balanced.entries.size(); ++k) {
        auto& e = res.balanced.entries[k];
        const auto desc =
            compute_descriptors(read_pgm_binary(res.balanced.resolve(e)));
        e.coverage = desc.feature_coverage;
        e.mean_feature_area = desc.mean_feature_area;
        e.feature_count = desc.feature_count;
    }

    res.manifest_path = out_dir / "augmented_manifest.jsonl";
    write_manifest(res.manifest_path, res.balanced.entries);

    if (opt.retrain) {
        detail::say(progress, "retraining surrogate on balanced set");
        const auto augmented_model =
            train_surrogate(load_images(res.balanced), opt.surrogate);
        res.augmented = evaluate_surrogate(augmented_model, test_batch);
    } else {
        res.augmented = res.baseline;
    }

    const std::string test_id = (opt.data_dir / "test_manifest.jsonl").string() +
                                ":" + std::to_string(test.entries.size());
    const auto cmp = evaluate_augmentation(
        opt.data_dir.string(), res.baseline, res.augmented, test_id, test_id,
        static_cast<int>(test.entries.size()));

    json per_class = json::array();
    for (int y = 0; y < num_classes; ++y) {
        const auto c = static_cast<std::size_t>(y);
        per_class.push_back({{"class", y},
                             {"generated", res.generated[c]},
                             {"accepted", res.accepted[c]},
                             {"added", res.added[c]},
                             {"mu", res.model.mu[c]},
                             {"sigma", res.model.sigma[c]},
                             {"cut", acceptance_cut(res.model, y, opt.mode)}});
    }
    json report{{"alpha_conf", opt.alpha_conf},
                {"threshold_mode",
                 opt.mode == threshold_mode::quantile ? "quantile" : "absolute"},
                {"per_class", per_class},
                {"baseline",
                 {{"accuracy", res.baseline.accuracy},
                  {"macro_f1", res.baseline.macro_f1}}},
                {"augmented",
                 {{"accuracy", res.augmented.accuracy},
                  {"macro_f1", res.augmented.macro_f1}}},
                {"accuracy_delta", cmp.accuracy_delta()},
                {"macro_f1_delta", cmp.macro_f1_delta()},
                {"test_samples", cmp.test_samples}};
    res.report_path = out_dir / "augment_report.json";
    write_text_atomic(res.report_path, report.dump(2) + "\n");
    return res;
}

// ---------------------------------------------------------------- bench

// Fraction of images whose estimated unit count equals (true_p, true_p).
inline double structure_match_rate(const std::vector<tensor2>& images,
                                   int true_p,
                                   const peak_detect_config& peaks = {}) {
    require(!images.empty(), "structure_match_rate: no images");
    int hits = 0;
    for (const auto& img : images) {
        const auto est = estimate_unit_count(img, peaks);
        if (est.valid && est.p_h == true_p && est.p_w == true_p) ++hits;
    }
    return double(hits) / double(images.size());
}

struct bench_variant_row {
    std::string variant;
    std::uint64_t seed = 0;
    fid_report fid;
    double match_rate = 0.0;
};

inline std::string ablation_csv(const std::vector<bench_variant_row>& rows) {
    std::string out =
        "variant,seed,topofid,is_mean,is_std,n_real,n_gen,match_rate\n";
    for (const auto& r : rows) {
        out += r.variant + "," + std::to_string(r.seed) + "," +
               detail::g12(r.fid.topofid) + "," + detail::g12(r.fid.is_mean) +
               "," + detail::g12(r.fid.is_std) + "," +
               std::to_string(r.fid.n_real) + "," + std::to_string(r.fid.n_gen) +
               "," + detail::g12(r.match_rate) + "\n";
    }
    return out;
}

inline ablation_flags flags_for_variant(const std::string& variant) {
    ablation_flags f;
    if (variant == "full") return f;
    if (variant == "no-fft") {
        f.disable_fft = true;
        return f;
    }
    if (variant == "no-blur") {
        f.disable_blur = true;
        return f;
    }
    if (variant == "no-recon") {
        f.disable_recon = true;
        return f;
    }
    throw config_error("unknown ablation variant: " + variant);
}

struct bench_config {
    synth_config data;                      // balanced benchmark dataset
    train_config train;                     // ablation template (flags replaced)
    std::array<int, num_classes> imbalanced_counts = {362, 48, 10};
    int imbalanced_test_per_class = 40;
    int seeds = 3;
    std::uint64_t base_seed = 1;
    int eval_per_class = 30;
    int is_splits = 10;
    surrogate_config surrogate;
    double alpha_conf = 0.90;
    int pool_per_class = 4000;
    std::vector<std::string> variants = {"full", "no-fft", "no-blur", "no-recon"};
    bool with_augmentation = true;
};

struct bench_result {
    std::vector<bench_variant_row> ablation;
    std::vector<augmentation_comparison> augmentation;
    std::filesystem::path ablation_csv_path;
    std::filesystem::path augmentation_csv_path;
};

// One synthetic dataset and one surrogate per seed, shared across variants, so
// variant rows differ only in the generator under test.
inline bench_result run_bench(const bench_config& bc,
                              const std::filesystem::path& out_dir,
                              const progress_fn& progress = {}) {
    require(bc.seeds >= 1, "bench: seeds must be >= 1");
    bc.data.validate();
    bc.train.validate();
    std::filesystem::create_directories(out_dir);
    bench_result res;

    for (int s = 0; s < bc.seeds; ++s) {
        const std::uint64_t seed = bc.base_seed + static_cast<std::uint64_t>(s);
        const auto seed_dir = out_dir / ("seed_" + std::to_string(seed));

        synth_config dc = bc.data;
        dc.seed = seed;
        detail::say(progress, "seed " + std::to_string(seed) +
                                  ": synthesizing benchmark dataset");
        const auto data = synth_dataset(dc, seed_dir / "data");
        surrogate_config scfg = bc.surrogate;
        scfg.seed = rng::substream_seed(seed, 99);
        const auto model = train_surrogate(load_images(data.train), scfg);
        checkpoint_from_model(model).save(seed_dir / "surrogate.json");
        const auto test_batch = load_images(data.test);

        for (const auto& variant : bc.variants) {
            detail::say(progress, "seed " + std::to_string(seed) +
                                      ": training variant " + variant);
            train_config tc = bc.train;
            tc.image_side = dc.image_side;
            tc.ablation = flags_for_variant(variant);
            tc.true_period = dc.image_side / dc.cell_side;
            tc.seed = seed;
            const auto tdir = seed_dir / variant;
            const auto trained = run_train(tc, seed_dir / "data", tdir, progress);

            std::vector<tensor2> gen_images;
            tensor2 gen_rows(bc.eval_per_class * tc.classes,
                             tc.image_side * tc.image_side);
            for (int y = 0; y < tc.classes; ++y) {
                const auto imgs = gan_trainer::generate_from(
                    trained.final_state.gen_spec, trained.final_state.gen_params,
                    trained.final_state.embedding, tc.image_side, y,
                    bc.eval_per_class, rng::substream_seed(seed, 300 + y));
                for (int i = 0; i < bc.eval_per_class; ++i) {
                    gen_rows.row(y * bc.eval_per_class + i) =
                        flatten_row(imgs[static_cast<std::size_t>(i)]).row(0);
                    gen_images.push_back(imgs[static_cast<std::size_t>(i)]);
                }
            }

            bench_variant_row row;
            row.variant = variant;
            row.seed = seed;
            row.fid = topofid_report(model, test_batch.rows, gen_rows,
                                     bc.is_splits, progress);
            row.match_rate =
                structure_match_rate(gen_images, tc.true_period, tc.peaks);
            res.ablation.push_back(row);
        }

        if (bc.with_augmentation) {
            detail::say(progress, "seed " + std::to_string(seed) +
                                      ": augmentation comparison");
            synth_config ic = bc.data;
            ic.train_counts = bc.imbalanced_counts;
            ic.test_per_class = bc.imbalanced_test_per_class;
            ic.seed = rng::substream_seed(seed, 7);
            const auto idir = seed_dir / "imbalanced";
            synth_dataset(ic, idir / "data");

            train_config tc = bc.train;
            tc.image_side = ic.image_side;
            tc.true_period = ic.image_side / ic.cell_side;
            tc.seed = seed;
            run_train(tc, idir / "data", idir / "gan", progress);

            augment_options ao;
            ao.data_dir = idir / "data";
            ao.generator_path = idir / "gan" / "checkpoint.json";
            ao.alpha_conf = bc.alpha_conf;
            ao.pool_per_class = bc.pool_per_class;
            ao.seed = seed;
            ao.surrogate = bc.surrogate;
            ao.surrogate.seed = rng::substream_seed(seed, 98);
            const auto aug = run_augment(ao, idir / "aug", progress);

            const std::string test_id =
                (ao.data_dir / "test_manifest.jsonl").string();
            res.augmentation.push_back(evaluate_augmentation(
                "imbalanced_seed_" + std::to_string(seed), aug.baseline,
                aug.augmented, test_id, test_id,
                ic.test_per_class * num_classes));
        }
    }

    res.ablation_csv_path = out_dir / "ablation.csv";
    write_text_atomic(res.ablation_csv_path, ablation_csv(res.ablation));
    if (bc.with_augmentation) {
        res.augmentation_csv_path = out_dir / "augmentation.csv";
        write_text_atomic(res.augmentation_csv_path,
                          augmentation_rows_csv(res.augmentation));
    }
    return res;
}

}  // namespace tilegan

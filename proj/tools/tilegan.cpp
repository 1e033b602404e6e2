// Command-line front end: flag parsing, config merging, and exit-code policy.
// All subcommand bodies live in the library so tests can drive them directly.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "tilegan/config.hpp"
#include "tilegan/pipeline.hpp"

namespace fs = std::filesystem;
using namespace tilegan;

namespace {

bool opt_progress = false;
std::vector<std::string> log_lines;
fs::path log_dir;

void note(const std::string& line) {
    log_lines.push_back(line);
    if (opt_progress) std::fprintf(stderr, "%s\n", line.c_str());
}

void flush_log() {
    if (log_dir.empty()) return;
    std::string text;
    for (const auto& l : log_lines) text += l + "\n";
    try {
        write_text_atomic(log_dir / "run.log", text);
    } catch (...) {
        // a failed log write must not mask the real outcome
    }
}

// Binds CLI flags to config keys; flag values override the config file only
// when actually supplied, regardless of their order on the command line.
class flag_binder {
public:
    flag_binder(CLI::App* app, run_config* cfg) : app_(app), cfg_(cfg) {}

    template <typename T>
    void bind(const std::string& flag, const std::string& key,
              const std::string& desc) {
        auto holder = std::make_shared<T>();
        auto* opt = app_->add_option(flag, *holder, desc);
        appliers_.push_back([this, opt, holder, key] {
            if (opt->count() > 0) cfg_->set(key, json(*holder));
        });
    }

    void bind_flag(const std::string& flag, const std::string& key,
                   const std::string& desc) {
        auto holder = std::make_shared<bool>(false);
        auto* opt = app_->add_flag(flag, *holder, desc);
        appliers_.push_back([this, opt, holder, key] {
            if (opt->count() > 0) cfg_->set(key, json(*holder));
        });
    }

    void apply() {
        for (const auto& f : appliers_) f();
    }

private:
    CLI::App* app_;
    run_config* cfg_;
    std::vector<std::function<void()>> appliers_;
};

std::array<int, num_classes> to_counts(const std::vector<int>& v,
                                       const std::string& key) {
    if (v.size() != static_cast<std::size_t>(num_classes))
        throw config_error("config key '" + key + "' must list " +
                           std::to_string(num_classes) + " class counts");
    std::array<int, num_classes> out{};
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = v[i];
    return out;
}

fs::path required_path(const run_config& cfg, const std::string& key) {
    const std::string v = cfg.gets(key);
    if (v.empty())
        throw config_error("config key '" + key + "' is required");
    return v;
}

// Per-subcommand state: defaults, the config-file path, the output dir, and
// the bound flags.
struct command {
    command(CLI::App& app, const std::string& name, const std::string& desc,
            json defaults)
        : sub(app.add_subcommand(name, desc)), cfg(std::move(defaults)),
          binder(sub, &cfg) {
        sub->add_option("--config", config_file, "JSON config file");
        sub->add_option("--out", out, "output directory")->required();
    }

    // merge order: defaults, then file, then explicit flags
    fs::path prepare() {
        if (!config_file.empty()) cfg.merge_file(config_file);
        binder.apply();
        const fs::path out_dir{out};
        fs::create_directories(out_dir);
        log_dir = out_dir;
        cfg.write_resolved(out_dir);
        return out_dir;
    }

    CLI::App* sub;
    run_config cfg;
    flag_binder binder;
    std::string config_file;
    std::string out;
};

peak_detect_config peaks_from(const run_config& cfg) {
    peak_detect_config p;
    p.alpha_fft = cfg.getd("alpha_fft");
    p.radius = static_cast<int>(cfg.geti("peak_radius"));
    p.spacing_tol = cfg.getd("spacing_tol");
    return p;
}

json surrogate_defaults() {
    return {{"surrogate_hidden", {256, 64}}, {"surrogate_epochs", 30},
            {"surrogate_batch", 32},         {"surrogate_lr", 1e-3},
            {"surrogate_seed", 7}};
}

surrogate_config surrogate_from(const run_config& cfg) {
    surrogate_config s;
    s.hidden = cfg.ints("surrogate_hidden");
    s.epochs = static_cast<int>(cfg.geti("surrogate_epochs"));
    s.batch = static_cast<int>(cfg.geti("surrogate_batch"));
    s.adam.lr = cfg.getd("surrogate_lr");
    s.seed = static_cast<std::uint64_t>(cfg.geti("surrogate_seed"));
    return s;
}

void bind_surrogate(flag_binder& b) {
    b.bind<std::vector<int>>("--surrogate-hidden", "surrogate_hidden",
                             "surrogate hidden widths");
    b.bind<int>("--surrogate-epochs", "surrogate_epochs", "surrogate epochs");
    b.bind<int>("--surrogate-batch", "surrogate_batch", "surrogate batch size");
    b.bind<double>("--surrogate-lr", "surrogate_lr", "surrogate learning rate");
    b.bind<long long>("--surrogate-seed", "surrogate_seed", "surrogate seed");
}

json train_defaults() {
    return {{"data", ""},
            {"image_side", 64},
            {"d_z", 64},
            {"classes", num_classes},
            {"batch", 16},
            {"epochs", 1000},
            {"max_gen_steps", 2000},
            {"gen_hidden", {256, 256}},
            {"critic_hidden", {256, 128}},
            {"leaky_slope", 0.2},
            {"lr", 1e-4},
            {"beta1", 0.5},
            {"beta2", 0.9},
            {"adam_eps", 1e-8},
            {"lambda_w", 1.0},
            {"lambda_cls", 1.0},
            {"lambda_blur", 0.5},
            {"lambda_recon", 0.5},
            {"lambda_gp", 10.0},
            {"recon_start_epoch", 10},
            {"n_critic", 5},
            {"alpha_fft", 0.3},
            {"peak_radius", 1},
            {"spacing_tol", 0.25},
            {"fft_refresh_interval", 1},
            {"true_period", 8},
            {"disable_fft", false},
            {"disable_blur", false},
            {"disable_recon", false},
            {"checkpoint_interval", 50},
            {"seed", 1}};
}

train_config train_from(const run_config& cfg) {
    train_config t;
    t.image_side = static_cast<int>(cfg.geti("image_side"));
    t.d_z = static_cast<int>(cfg.geti("d_z"));
    t.classes = static_cast<int>(cfg.geti("classes"));
    t.batch = static_cast<int>(cfg.geti("batch"));
    t.epochs = static_cast<int>(cfg.geti("epochs"));
    t.max_gen_steps = cfg.geti("max_gen_steps");
    t.gen_hidden = cfg.ints("gen_hidden");
    t.critic_hidden = cfg.ints("critic_hidden");
    t.critic_leaky_slope = cfg.getd("leaky_slope");
    t.adam.lr = cfg.getd("lr");
    t.adam.beta1 = cfg.getd("beta1");
    t.adam.beta2 = cfg.getd("beta2");
    t.adam.eps = cfg.getd("adam_eps");
    t.weights.lambda_w = cfg.getd("lambda_w");
    t.weights.lambda_cls = cfg.getd("lambda_cls");
    t.weights.lambda_blur = cfg.getd("lambda_blur");
    t.weights.lambda_recon = cfg.getd("lambda_recon");
    t.weights.lambda_gp = cfg.getd("lambda_gp");
    t.weights.recon_start_epoch =
        static_cast<int>(cfg.geti("recon_start_epoch"));
    t.weights.n_critic = static_cast<int>(cfg.geti("n_critic"));
    t.peaks = peaks_from(cfg);
    t.ablation.disable_fft = cfg.getb("disable_fft");
    t.ablation.disable_blur = cfg.getb("disable_blur");
    t.ablation.disable_recon = cfg.getb("disable_recon");
    t.fft_refresh_interval = static_cast<int>(cfg.geti("fft_refresh_interval"));
    t.true_period = static_cast<int>(cfg.geti("true_period"));
    t.checkpoint_interval = static_cast<int>(cfg.geti("checkpoint_interval"));
    t.seed = static_cast<std::uint64_t>(cfg.geti("seed"));
    return t;
}

void bind_train(flag_binder& b) {
    b.bind<std::string>("--data", "data", "dataset directory (from synth)");
    b.bind<int>("--image-side", "image_side", "image side in pixels");
    b.bind<int>("--d-z", "d_z", "latent dimension");
    b.bind<int>("--batch", "batch", "batch size");
    b.bind<long long>("--epochs", "epochs", "maximum dataset passes");
    b.bind<long long>("--max-gen-steps", "max_gen_steps",
                      "stop after this many generator steps (0 = no cap)");
    b.bind<std::vector<int>>("--gen-hidden", "gen_hidden",
                             "generator hidden widths");
    b.bind<std::vector<int>>("--critic-hidden", "critic_hidden",
                             "critic hidden widths");
    b.bind<double>("--lr", "lr", "adam learning rate");
    b.bind<double>("--lambda-w", "lambda_w", "wasserstein loss weight");
    b.bind<double>("--lambda-cls", "lambda_cls", "classification loss weight");
    b.bind<double>("--lambda-blur", "lambda_blur", "blur loss weight");
    b.bind<double>("--lambda-recon", "lambda_recon",
                   "reconstruction loss weight");
    b.bind<double>("--lambda-gp", "lambda_gp", "gradient penalty weight");
    b.bind<long long>("--recon-start-epoch", "recon_start_epoch",
                      "epoch at which the reconstruction loss activates");
    b.bind<int>("--n-critic", "n_critic", "critic steps per generator step");
    b.bind<double>("--alpha-fft", "alpha_fft", "peak threshold sensitivity");
    b.bind<int>("--fft-refresh-interval", "fft_refresh_interval",
                "generator iterations between scale re-estimates");
    b.bind<int>("--true-period", "true_period",
                "ground-truth unit count used when FFT guidance is disabled");
    b.bind_flag("--disable-fft", "disable_fft", "use the fixed true period");
    b.bind_flag("--disable-blur", "disable_blur", "drop the blur loss");
    b.bind_flag("--disable-recon", "disable_recon",
                "drop the reconstruction loss");
    b.bind<long long>("--checkpoint-interval", "checkpoint_interval",
                      "epochs between checkpoints");
    b.bind<long long>("--seed", "seed", "training seed");
}

int cmd_synth(command& c) {
    const auto out = c.prepare();
    synth_config sc;
    sc.image_side = static_cast<int>(c.cfg.geti("image_side"));
    sc.cell_side = static_cast<int>(c.cfg.geti("cell_side"));
    sc.train_counts = to_counts(c.cfg.ints("train_counts"), "train_counts");
    sc.test_per_class = static_cast<int>(c.cfg.geti("test_per_class"));
    sc.rule.low_hi = c.cfg.getd("low_hi");
    sc.rule.mid_hi = c.cfg.getd("mid_hi");
    sc.label_noise = c.cfg.getd("label_noise");
    sc.flip_noise = c.cfg.getd("flip_noise");
    sc.seed = static_cast<std::uint64_t>(c.cfg.geti("seed"));
    const auto res = synth_dataset(sc, out);
    note("synth: wrote " + std::to_string(res.train.entries.size()) +
         " train and " + std::to_string(res.test.entries.size()) +
         " test images to " + out.string());
    return 0;
}

int cmd_train(command& c) {
    const auto out = c.prepare();
    const auto tc = train_from(c.cfg);
    const auto res = run_train(tc, required_path(c.cfg, "data"), out, note);
    note("train: " + std::to_string(res.metrics.size()) +
         " generator steps, checkpoint at " + res.checkpoint_path.string());
    return 0;
}

int cmd_generate(command& c) {
    const auto out = c.prepare();
    const auto res = run_generate(
        required_path(c.cfg, "checkpoint"),
        static_cast<int>(c.cfg.geti("per_class")),
        static_cast<std::uint64_t>(c.cfg.geti("seed")), out, note);
    note("generate: wrote " + std::to_string(res.manifest.entries.size()) +
         " images and " + res.manifest_path.string());
    return 0;
}

int cmd_analyze(command& c) {
    const auto out = c.prepare();
    const auto res =
        run_analyze(required_path(c.cfg, "image"), peaks_from(c.cfg),
                    c.cfg.getb("spectrum"), out);
    note("analyze: p_h=" + std::to_string(res.estimate.p_h) +
         " p_w=" + std::to_string(res.estimate.p_w) +
         (res.estimate.valid ? "" : " (invalid)"));
    std::printf("%s\n", res.report.dump().c_str());
    return 0;
}

int cmd_eval(command& c) {
    const auto out = c.prepare();
    const auto res = run_eval(required_path(c.cfg, "data"),
                              required_path(c.cfg, "gen"), c.cfg.gets("surrogate"),
                              surrogate_from(c.cfg),
                              static_cast<int>(c.cfg.geti("is_splits")), out,
                              note);
    note("eval: topofid=" + detail::g12(res.fid.topofid) +
         " is=" + detail::g12(res.fid.is_mean) + "±" +
         detail::g12(res.fid.is_std));
    return 0;
}

int cmd_augment(command& c) {
    const auto out = c.prepare();
    augment_options ao;
    ao.data_dir = required_path(c.cfg, "data");
    ao.generator_path = required_path(c.cfg, "generator");
    ao.surrogate_path = c.cfg.gets("surrogate");
    ao.alpha_conf = c.cfg.getd("alpha_conf");
    const std::string mode = c.cfg.gets("threshold_mode");
    if (mode == "quantile")
        ao.mode = threshold_mode::quantile;
    else if (mode == "absolute")
        ao.mode = threshold_mode::absolute;
    else
        throw config_error(
            "config key 'threshold_mode' must be quantile or absolute");
    ao.pool_per_class = static_cast<int>(c.cfg.geti("pool_per_class"));
    ao.seed = static_cast<std::uint64_t>(c.cfg.geti("seed"));
    ao.retrain = c.cfg.getb("retrain");
    ao.surrogate = surrogate_from(c.cfg);
    const auto res = run_augment(ao, out, note);
    note("augment: added " + std::to_string(res.added[0]) + "/" +
         std::to_string(res.added[1]) + "/" + std::to_string(res.added[2]) +
         ", macro_f1 " + detail::g12(res.baseline.macro_f1) + " -> " +
         detail::g12(res.augmented.macro_f1));
    return 0;
}

int cmd_bench(command& c) {
    const auto out = c.prepare();
    bench_config bc;
    bc.data.image_side = static_cast<int>(c.cfg.geti("image_side"));
    bc.data.cell_side = static_cast<int>(c.cfg.geti("cell_side"));
    bc.data.train_counts = to_counts(c.cfg.ints("train_counts"), "train_counts");
    bc.data.test_per_class = static_cast<int>(c.cfg.geti("test_per_class"));
    bc.imbalanced_counts =
        to_counts(c.cfg.ints("imbalanced_counts"), "imbalanced_counts");
    bc.imbalanced_test_per_class =
        static_cast<int>(c.cfg.geti("imbalanced_test_per_class"));
    bc.seeds = static_cast<int>(c.cfg.geti("seeds"));
    bc.base_seed = static_cast<std::uint64_t>(c.cfg.geti("base_seed"));
    bc.eval_per_class = static_cast<int>(c.cfg.geti("eval_per_class"));
    bc.is_splits = static_cast<int>(c.cfg.geti("is_splits"));
    bc.train.batch = static_cast<int>(c.cfg.geti("batch"));
    bc.train.epochs = static_cast<int>(c.cfg.geti("epochs"));
    bc.train.max_gen_steps = c.cfg.geti("max_gen_steps");
    bc.surrogate.epochs = static_cast<int>(c.cfg.geti("surrogate_epochs"));
    bc.alpha_conf = c.cfg.getd("alpha_conf");
    bc.pool_per_class = static_cast<int>(c.cfg.geti("pool_per_class"));
    bc.with_augmentation = c.cfg.getb("with_augmentation");
    const auto res = run_bench(bc, out, note);
    note("bench: " + std::to_string(res.ablation.size()) + " ablation rows -> " +
         res.ablation_csv_path.string());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"class-conditional GAN toolkit for periodic binary patterns"};
    app.require_subcommand(1);
    app.add_flag("--progress", opt_progress,
                 "human-readable progress lines on stderr");

    command synth(app, "synth", "generate a labeled periodic-pattern dataset",
                  {{"image_side", 64},
                   {"cell_side", 8},
                   {"train_counts", {128, 128, 128}},
                   {"test_per_class", 32},
                   {"low_hi", 0.15},
                   {"mid_hi", 0.35},
                   {"label_noise", 0.0},
                   {"flip_noise", 0.0},
                   {"seed", 1}});
    synth.binder.bind<int>("--image-side", "image_side", "image side in pixels");
    synth.binder.bind<int>("--cell-side", "cell_side", "unit cell side");
    synth.binder.bind<std::vector<int>>("--train-counts", "train_counts",
                                        "per-class training counts");
    synth.binder.bind<int>("--test-per-class", "test_per_class",
                           "balanced test count per class");
    synth.binder.bind<double>("--low-hi", "low_hi", "low/mid coverage boundary");
    synth.binder.bind<double>("--mid-hi", "mid_hi", "mid/high coverage boundary");
    synth.binder.bind<double>("--label-noise", "label_noise",
                              "probability of rotating a label");
    synth.binder.bind<double>("--flip-noise", "flip_noise",
                              "per-pixel flip probability");
    synth.binder.bind<long long>("--seed", "seed", "dataset seed");

    command train(app, "train", "train the conditional critic/generator pair",
                  train_defaults());
    bind_train(train.binder);

    command generate(app, "generate", "sample images from a checkpoint",
                     {{"checkpoint", ""}, {"per_class", 30}, {"seed", 1}});
    generate.binder.bind<std::string>("--checkpoint", "checkpoint",
                                      "generator checkpoint JSON");
    generate.binder.bind<int>("--per-class", "per_class", "samples per class");
    generate.binder.bind<long long>("--seed", "seed", "sampling seed");

    command analyze(app, "analyze", "estimate the repetition scale of an image",
                    {{"image", ""},
                     {"alpha_fft", 0.3},
                     {"peak_radius", 1},
                     {"spacing_tol", 0.25},
                     {"spectrum", true}});
    analyze.binder.bind<std::string>("--image", "image", "input PGM image");
    analyze.binder.bind<double>("--alpha-fft", "alpha_fft",
                                "peak threshold sensitivity");
    analyze.binder.bind<int>("--peak-radius", "peak_radius",
                             "local-maximum neighborhood radius");
    analyze.binder.bind<double>("--spacing-tol", "spacing_tol",
                                "relative peak-spacing tolerance");
    analyze.binder.bind_flag("--spectrum,!--no-spectrum", "spectrum",
                             "write (or skip) the log-spectrum image");

    command eval(app, "eval", "surrogate-based metrics for generated samples",
                 [] {
                     json j = surrogate_defaults();
                     j["data"] = "";
                     j["gen"] = "";
                     j["surrogate"] = "";
                     j["is_splits"] = 10;
                     return j;
                 }());
    eval.binder.bind<std::string>("--data", "data", "dataset directory");
    eval.binder.bind<std::string>("--gen", "gen", "generated manifest JSONL");
    eval.binder.bind<std::string>("--surrogate", "surrogate",
                                  "surrogate checkpoint (optional)");
    eval.binder.bind<int>("--is-splits", "is_splits", "inception score splits");
    bind_surrogate(eval.binder);

    command augment(app, "augment",
                    "confidence-filtered augmentation to a balanced set", [] {
                        json j = surrogate_defaults();
                        j["data"] = "";
                        j["generator"] = "";
                        j["surrogate"] = "";
                        j["alpha_conf"] = 0.90;
                        j["threshold_mode"] = "quantile";
                        j["pool_per_class"] = 4000;
                        j["seed"] = 1;
                        j["retrain"] = true;
                        return j;
                    }());
    augment.binder.bind<std::string>("--data", "data", "dataset directory");
    augment.binder.bind<std::string>("--generator", "generator",
                                     "generator checkpoint JSON");
    augment.binder.bind<std::string>("--surrogate", "surrogate",
                                     "surrogate checkpoint (optional)");
    augment.binder.bind<double>("--alpha-conf", "alpha_conf",
                                "confidence acceptance level");
    augment.binder.bind<std::string>("--threshold-mode", "threshold_mode",
                                     "quantile or absolute cut");
    augment.binder.bind<int>("--pool-per-class", "pool_per_class",
                             "candidates generated per class");
    augment.binder.bind<long long>("--seed", "seed", "generation seed");
    bind_surrogate(augment.binder);

    command bench(app, "bench",
                  "ablation matrix plus augmentation comparison", [] {
                      json j = surrogate_defaults();
                      j["image_side"] = 64;
                      j["cell_side"] = 8;
                      j["train_counts"] = {128, 128, 128};
                      j["test_per_class"] = 32;
                      j["imbalanced_counts"] = {362, 48, 10};
                      j["imbalanced_test_per_class"] = 40;
                      j["seeds"] = 3;
                      j["base_seed"] = 1;
                      j["eval_per_class"] = 30;
                      j["is_splits"] = 10;
                      j["batch"] = 16;
                      j["epochs"] = 1000;
                      j["max_gen_steps"] = 2000;
                      j["alpha_conf"] = 0.90;
                      j["pool_per_class"] = 4000;
                      j["with_augmentation"] = true;
                      return j;
                  }());
    bench.binder.bind<int>("--seeds", "seeds", "number of seeds");
    bench.binder.bind<long long>("--base-seed", "base_seed", "first seed");
    bench.binder.bind<long long>("--max-gen-steps", "max_gen_steps",
                                 "generator steps per variant");
    bench.binder.bind<int>("--eval-per-class", "eval_per_class",
                           "generated samples per class for metrics");
    bench.binder.bind_flag("--augmentation,!--no-augmentation",
                           "with_augmentation",
                           "run (or skip) the augmentation comparison");

    try {
        app.parse(argc, argv);
        int rc = 1;
        if (synth.sub->parsed()) rc = cmd_synth(synth);
        else if (train.sub->parsed()) rc = cmd_train(train);
        else if (generate.sub->parsed()) rc = cmd_generate(generate);
        else if (analyze.sub->parsed()) rc = cmd_analyze(analyze);
        else if (eval.sub->parsed()) rc = cmd_eval(eval);
        else if (augment.sub->parsed()) rc = cmd_augment(augment);
        else if (bench.sub->parsed()) rc = cmd_bench(bench);
        note("exit " + std::to_string(rc));
        flush_log();
        return rc;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const config_error& e) {
        note(std::string("config error: ") + e.what());
        flush_log();
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const divergence_error& e) {
        note(std::string("divergence: ") + e.what());
        flush_log();
        std::fprintf(stderr, "divergence: %s\n", e.what());
        return 3;
    } catch (const numerical_error& e) {
        note(std::string("numerical error: ") + e.what());
        flush_log();
        std::fprintf(stderr, "numerical error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        note(std::string("error: ") + e.what());
        flush_log();
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}

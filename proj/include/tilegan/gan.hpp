#pragma once

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "tilegan/adam.hpp"
#include "tilegan/blur.hpp"
#include "tilegan/checkpoint.hpp"
#include "tilegan/consensus.hpp"
#include "tilegan/dataset.hpp"
#include "tilegan/guidance.hpp"
#include "tilegan/mlp.hpp"
#include "tilegan/pattern.hpp"
#include "tilegan/rng.hpp"
#include "tilegan/tape.hpp"

namespace tilegan {

struct loss_weights {
    double lambda_w = 1.0;
    double lambda_cls = 1.0;
    double lambda_blur = 0.5;
    double lambda_recon = 0.5;
    double lambda_gp = 10.0;
    int recon_start_epoch = 10;
    int n_critic = 5;

    void validate() const {
        if (lambda_w < 0 || lambda_cls < 0 || lambda_blur < 0 ||
            lambda_recon < 0 || lambda_gp < 0)
            throw config_error("loss_weights: weights must be non-negative");
        if (recon_start_epoch < 0)
            throw config_error("loss_weights: recon_start_epoch must be >= 0");
        if (n_critic < 1)
            throw config_error("loss_weights: n_critic must be at least 1");
    }
};

struct ablation_flags {
    bool disable_fft = false;
    bool disable_blur = false;
    bool disable_recon = false;
};

struct train_config {
    int image_side = 64;
    int d_z = 64;
    int classes = num_classes;
    int batch = 16;
    int epochs = 420;
    std::int64_t max_gen_steps = 0;  // 0: run the full epoch budget
    std::vector<int> gen_hidden = {256, 256};
    std::vector<int> critic_hidden = {256, 128};
    double critic_leaky_slope = 0.2;
    adam_config adam;
    loss_weights weights;
    peak_detect_config peaks;
    ablation_flags ablation;
    int fft_refresh_interval = 1;  // generator iterations between estimates
    int true_period = 8;  // ground-truth p used when FFT guidance is disabled
    int checkpoint_interval = 50;  // epochs between checkpoints/sample grids
    std::uint64_t seed = 1;

    void validate() const {
        if (image_side < 4) throw config_error("train_config: image side too small");
        if (d_z < 1) throw config_error("train_config: d_z must be positive");
        if (classes < 2) throw config_error("train_config: need at least 2 classes");
        if (batch < 2)
            throw config_error("train_config: batch must be >= 2 (interpolation needs pairs)");
        if (epochs < 0) throw config_error("train_config: negative epoch count");
        if (max_gen_steps < 0)
            throw config_error("train_config: negative max_gen_steps");
        for (int wdt : gen_hidden)
            if (wdt < 1) throw config_error("train_config: bad generator width");
        for (int wdt : critic_hidden)
            if (wdt < 1) throw config_error("train_config: bad critic width");
        if (fft_refresh_interval < 1)
            throw config_error("train_config: fft_refresh_interval must be >= 1");
        if (true_period < 1 || true_period > image_side)
            throw config_error("train_config: true_period must lie in [1, side]");
        if (checkpoint_interval < 1)
            throw config_error("train_config: checkpoint_interval must be >= 1");
        weights.validate();
        peaks.validate();
        if (weights.lambda_w == 0.0 && weights.lambda_cls == 0.0)
            throw config_error("train_config: critic loss would be empty "
                               "(lambda_w and lambda_cls both zero)");
    }

    mlp_spec generator_spec() const {
        mlp_spec s;
        s.widths.push_back(d_z);
        for (int wdt : gen_hidden) s.widths.push_back(wdt);
        s.widths.push_back(image_side * image_side);
        s.hidden = activation::relu;
        s.output = activation::tanh;
        return s;
    }

    mlp_spec critic_spec() const {
        mlp_spec s;
        s.widths.push_back(image_side * image_side);
        for (int wdt : critic_hidden) s.widths.push_back(wdt);
        s.widths.push_back(1 + classes);  // score + class logits
        s.hidden = activation::leaky_relu;
        s.output = activation::linear;
        s.leaky_slope = critic_leaky_slope;
        return s;
    }
};

// out[i] = z[i] * E[y][i]: the label picks an embedding row that gates the
// latent element-wise.
inline tensor2 condition_latent(const tensor2& z, int y, const tensor2& embedding) {
    require(z.rows() == 1 && z.cols() == embedding.cols(),
            "condition_latent: latent length must match embedding width");
    if (y < 0 || y >= embedding.rows())
        throw config_error("condition_latent: unknown label " + std::to_string(y));
    return z.cwiseProduct(embedding.row(y));
}

inline tensor2 condition_batch(const tensor2& z, const std::vector<int>& labels,
                               const tensor2& embedding) {
    require(z.rows() == static_cast<Eigen::Index>(labels.size()),
            "condition_batch: one label per latent row");
    tensor2 out(z.rows(), z.cols());
    for (Eigen::Index r = 0; r < z.rows(); ++r)
        out.row(r) = condition_latent(z.row(r), labels[static_cast<std::size_t>(r)],
                                      embedding)
                         .row(0);
    return out;
}

// Build the penalty node lambda_gp * mean((||grad_xhat D(xhat)||_2 - 1)^2)
// on an existing tape. The returned node stays differentiable with respect to
// the critic parameters (double backprop through the recorded gradient).
inline ad::node_id gradient_penalty_node(ad::tape& t, const mlp_spec& critic_spec,
                                         const std::vector<ad::node_id>& critic_ids,
                                         tensor2 xhat, double lambda_gp,
                                         std::int64_t iter_for_report) {
    const int batch = static_cast<int>(xhat.rows());
    const auto xh = t.input(std::move(xhat), true);
    const auto score_sum =
        t.sum_all(t.slice_cols(mlp_forward(t, critic_spec, critic_ids, xh), 0, 1));
    const auto g = grad_input_differentiable(t, score_sum, xh);
    if (!all_finite(t.value(g)))
        throw divergence_error("non-finite critic gradient at generator iteration " +
                               std::to_string(iter_for_report));
    const auto norm = t.sqrt(t.row_sum(t.hadamard(g, g)));
    const auto excess = t.affine(norm, 1.0, -1.0);
    return t.scale(t.sum_all(t.hadamard(excess, excess)), lambda_gp / batch);
}

// Standalone evaluation: interpolate real/fake pairs with per-sample epsilon
// and return the penalty value.
inline double gradient_penalty(const mlp_spec& critic_spec,
                               const parameter_set& critic_params,
                               const tensor2& real, const tensor2& fake,
                               double lambda_gp, rng& gen) {
    require(real.rows() == fake.rows() && real.cols() == fake.cols(),
            "gradient_penalty: real/fake batches must have the same shape");
    require(real.rows() >= 1, "gradient_penalty: empty batch");
    tensor2 xhat(real.rows(), real.cols());
    for (Eigen::Index r = 0; r < real.rows(); ++r) {
        const double eps = gen.uniform();
        xhat.row(r) = eps * real.row(r) + (1.0 - eps) * fake.row(r);
    }
    ad::tape t;
    const auto ids = push_params(t, critic_params, true);
    return t.value(gradient_penalty_node(t, critic_spec, ids, std::move(xhat),
                                         lambda_gp, 0))(0, 0);
}

// Full critic objective on an existing tape:
//   L_D = lambda_w * (mean D(fake) - mean D(real) + penalty(xhat))
//       + lambda_cls * cross-entropy(real class logits, labels).
// Terms with zero weight are never built, so setting a lambda to 0 removes
// the term exactly. xhat carries the caller's interpolates; it is only read
// when both lambda_w and lambda_gp are positive.
inline ad::node_id critic_loss_node(ad::tape& t, const mlp_spec& critic_spec,
                                    const std::vector<ad::node_id>& critic_ids,
                                    const tensor2& real_pm1,
                                    const tensor2& fake_pm1,
                                    const std::vector<int>& labels, int classes,
                                    const loss_weights& w, const tensor2& xhat,
                                    std::int64_t iter_for_report) {
    require(real_pm1.rows() == fake_pm1.rows() &&
                real_pm1.cols() == fake_pm1.cols(),
            "critic_loss_node: real/fake batches must have the same shape");
    ad::node_id loss = ad::no_node;
    auto add_term = [&](ad::node_id term, double weight) {
        term = t.scale(term, weight);
        loss = loss == ad::no_node ? term : t.add(loss, term);
    };

    ad::node_id out_real = ad::no_node;
    if (w.lambda_w > 0.0 || w.lambda_cls > 0.0)
        out_real = mlp_forward(t, critic_spec, critic_ids, t.constant(real_pm1));

    if (w.lambda_w > 0.0) {
        const auto out_fake =
            mlp_forward(t, critic_spec, critic_ids, t.constant(fake_pm1));
        auto l_wd = t.sub(t.mean_all(t.slice_cols(out_fake, 0, 1)),
                          t.mean_all(t.slice_cols(out_real, 0, 1)));
        if (w.lambda_gp > 0.0)
            l_wd = t.add(l_wd,
                         gradient_penalty_node(t, critic_spec, critic_ids, xhat,
                                               w.lambda_gp, iter_for_report));
        add_term(l_wd, w.lambda_w);
    }
    if (w.lambda_cls > 0.0)
        add_term(softmax_cross_entropy(t, t.slice_cols(out_real, 1, classes),
                                       labels),
                 w.lambda_cls);
    require(loss != ad::no_node,
            "critic_loss_node: all loss weights are zero");
    return loss;
}

// Per-generator-step metrics row; raw (unweighted) component values.
struct metric_row {
    std::int64_t epoch = 0;
    std::int64_t iter = 0;
    double l_d = 0.0;
    double l_w = 0.0;
    double l_cls = 0.0;
    double l_blur = 0.0;
    double l_recon = 0.0;
    int p_h = 1;
    int p_w = 1;
    int k = 1;
};

inline std::string metrics_csv(const std::vector<metric_row>& rows) {
    std::string out = "epoch,iter,L_D,L_W,L_cls,L_blur,L_recon,p_h,p_w,k\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf),
                      "%" PRId64 ",%" PRId64 ",%.12g,%.12g,%.12g,%.12g,%.12g,%d,%d,%d\n",
                      r.epoch, r.iter, r.l_d, r.l_w, r.l_cls, r.l_blur, r.l_recon,
                      r.p_h, r.p_w, r.k);
        out += buf;
    }
    return out;
}

class gan_trainer {
  public:
    gan_trainer(train_config cfg, image_batch data)
        : cfg_(std::move(cfg)), data_(std::move(data)) {
        cfg_.validate();
        require(data_.side == cfg_.image_side,
                "gan_trainer: dataset image side does not match config");
        require(data_.rows.rows() >= cfg_.batch,
                "gan_trainer: dataset smaller than one batch");
        for (int y : data_.labels)
            require(y >= 0 && y < cfg_.classes, "gan_trainer: label out of range");
        gen_spec_ = cfg_.generator_spec();
        critic_spec_ = cfg_.critic_spec();
        rng init(rng::substream(cfg_.seed, 0));
        gen_params_ = init_mlp_params(gen_spec_, init);
        critic_params_ = init_mlp_params(critic_spec_, init);
        // multiplicative conditioning starts near the identity gate so early
        // training sees z almost unchanged while classes drift apart
        tensor2 emb(cfg_.classes, cfg_.d_z);
        for (Eigen::Index r = 0; r < emb.rows(); ++r)
            for (Eigen::Index c = 0; c < emb.cols(); ++c)
                emb(r, c) = 1.0 + 0.2 * init.normal();
        embed_params_.add("e", std::move(emb));
        opt_gen_ = adam_state::zeros_for(gen_params_);
        opt_critic_ = adam_state::zeros_for(critic_params_);
        opt_embed_ = adam_state::zeros_for(embed_params_);
        train_rng_ = rng(rng::substream(cfg_.seed, 1));
        data_pm1_ = to_pm1(data_.rows);
    }

    // Optional sinks; the CLI wires these to files/stderr.
    std::function<void(const std::string&)> log;
    std::function<void(std::int64_t epoch, const gan_checkpoint&)> on_checkpoint;

    const train_config& config() const { return cfg_; }
    const std::vector<metric_row>& metrics() const { return metrics_; }
    const parameter_set& generator_params() const { return gen_params_; }
    const parameter_set& critic_params() const { return critic_params_; }
    const tensor2& embedding() const { return embed_params_.entries[0].value; }
    std::int64_t generator_steps() const { return gen_iter_; }

    gan_checkpoint checkpoint() const {
        gan_checkpoint c;
        c.epoch = epoch_;
        c.iter = gen_iter_;
        c.seed = cfg_.seed;
        c.gen_spec = gen_spec_;
        c.critic_spec = critic_spec_;
        c.gen_params = gen_params_;
        c.critic_params = critic_params_;
        c.embedding = embed_params_.entries[0].value;
        c.opt_gen = opt_gen_;
        c.opt_critic = opt_critic_;
        c.opt_embed = opt_embed_;
        return c;
    }

    void restore(const gan_checkpoint& c) {
        require(c.gen_spec.widths == gen_spec_.widths &&
                    c.critic_spec.widths == critic_spec_.widths,
                "restore: checkpoint net shapes do not match config");
        epoch_ = c.epoch;
        gen_iter_ = c.iter;
        gen_params_ = c.gen_params;
        critic_params_ = c.critic_params;
        embed_params_.entries[0].value = c.embedding;
        opt_gen_ = c.opt_gen;
        opt_critic_ = c.opt_critic;
        opt_embed_ = c.opt_embed;
    }

    // One critic update on a real batch; fakes come from the frozen generator
    // conditioned on the same labels. Returns L_D.
    double critic_step(const tensor2& real_pm1, const std::vector<int>& labels) {
        const auto& w = cfg_.weights;
        const int batch = static_cast<int>(real_pm1.rows());
        const int n = static_cast<int>(real_pm1.cols());

        tensor2 z = draw_latents(batch);
        const tensor2 cond = condition_batch(z, labels, embedding());
        const tensor2 fake_pm1 = mlp_eval(gen_spec_, gen_params_, cond);

        tensor2 xhat(0, 0);
        if (w.lambda_w > 0.0 && w.lambda_gp > 0.0) {
            xhat.resize(batch, n);
            for (int r = 0; r < batch; ++r) {
                const double eps = train_rng_.uniform();
                xhat.row(r) =
                    eps * real_pm1.row(r) + (1.0 - eps) * fake_pm1.row(r);
            }
        }

        ad::tape t;
        const auto critic_ids = push_params(t, critic_params_, true);
        const ad::node_id loss =
            critic_loss_node(t, critic_spec_, critic_ids, real_pm1, fake_pm1,
                             labels, cfg_.classes, w, xhat, gen_iter_);

        const double l_d = t.value(loss)(0, 0);
        if (!std::isfinite(l_d))
            throw divergence_error("critic loss became non-finite at generator "
                                   "iteration " +
                                   std::to_string(gen_iter_));
        adam_step(critic_params_, grad_params(t, loss, critic_ids), opt_critic_,
                  cfg_.adam);
        return l_d;
    }

    // One generator + embedding update; critic frozen. Returns the metrics row
    // (without epoch/iter/L_D, which the loop fills in).
    metric_row generator_step() {
        const auto& w = cfg_.weights;
        const int batch = cfg_.batch;
        const int side = cfg_.image_side;
        const int n = side * side;

        std::vector<int> labels(static_cast<std::size_t>(batch));
        for (auto& y : labels)
            y = static_cast<int>(train_rng_.uniform_index(
                static_cast<std::size_t>(cfg_.classes)));
        tensor2 z = draw_latents(batch);

        ad::tape t;
        const auto gen_ids = push_params(t, gen_params_, true);
        const auto embed_id = t.param(embedding(), 1000);
        const auto critic_ids = push_params(t, critic_params_, false);

        std::vector<std::int32_t> rows(labels.begin(), labels.end());
        const auto cond =
            t.hadamard(t.constant(z), t.gather_rows(embed_id, std::move(rows)));
        const auto x_g = mlp_forward(t, gen_spec_, gen_ids, cond);

        metric_row m;
        ad::node_id loss = ad::no_node;
        auto add_term = [&](ad::node_id term, double weight) {
            term = t.scale(term, weight);
            loss = loss == ad::no_node ? term : t.add(loss, term);
        };

        ad::node_id critic_out = ad::no_node;
        if (w.lambda_w > 0.0 || w.lambda_cls > 0.0)
            critic_out = mlp_forward(t, critic_spec_, critic_ids, x_g);
        if (w.lambda_w > 0.0) {
            const auto l_w =
                t.scale(t.mean_all(t.slice_cols(critic_out, 0, 1)), -1.0);
            m.l_w = t.value(l_w)(0, 0);
            add_term(l_w, w.lambda_w);
        }
        if (w.lambda_cls > 0.0) {
            const auto l_cls = softmax_cross_entropy(
                t, t.slice_cols(critic_out, 1, cfg_.classes), labels);
            m.l_cls = t.value(l_cls)(0, 0);
            add_term(l_cls, w.lambda_cls);
        }

        // repetition scale for this step: ground truth when FFT guidance is
        // off, otherwise the cached spectral estimate of current outputs
        int p_h = cfg_.true_period, p_w = cfg_.true_period;
        bool estimate_valid = true;
        if (!cfg_.ablation.disable_fft) {
            refresh_estimate(t.value(x_g));
            p_h = cached_.p_h;
            p_w = cached_.p_w;
            estimate_valid = cached_.valid;
        }
        m.p_h = p_h;
        m.p_w = p_w;
        m.k = blur_kernel_size(side, side, p_h, p_w);

        if (!cfg_.ablation.disable_blur && w.lambda_blur > 0.0 && m.k > 1) {
            const auto cfg_blur = blur_config_for(side, side, p_h, p_w);
            const auto blurred = t.blur2d(x_g, side, side, cfg_blur.k,
                                          cfg_blur.sigma,
                                          detail::boundary_mode::reflect);
            const auto diff = t.sub(x_g, blurred);
            const auto l_blur = t.scale(t.sum_all(t.hadamard(diff, diff)),
                                        1.0 / (static_cast<double>(batch) * n));
            m.l_blur = t.value(l_blur)(0, 0);
            add_term(l_blur, w.lambda_blur);
        }

        const bool recon_active = !cfg_.ablation.disable_recon &&
                                  w.lambda_recon > 0.0 &&
                                  epoch_ >= cfg_.weights.recon_start_epoch;
        if (recon_active) {
            if (!cfg_.ablation.disable_fft && !estimate_valid) {
                if (log)
                    log("recon skipped at iter " + std::to_string(gen_iter_) +
                        ": repetition estimate invalid");
            } else {
                // stop-gradient target: per-sample median-consensus
                // reconstruction of the current output
                const tensor2& xg_val = t.value(x_g);
                tensor2 target(batch, n);
                for (int r = 0; r < batch; ++r)
                    target.row(r) =
                        flatten_row(reconstruct_periodic(
                                        unflatten_row(xg_val.row(r), side, side),
                                        p_h, p_w, consensus_mode::median))
                            .row(0);
                const auto diff = t.sub(x_g, t.constant(std::move(target)));
                const auto l_recon =
                    t.scale(t.sum_all(t.hadamard(diff, diff)),
                            1.0 / (static_cast<double>(batch) * n));
                m.l_recon = t.value(l_recon)(0, 0);
                add_term(l_recon, w.lambda_recon);
            }
        }

        require(loss != ad::no_node, "generator_step: loss has no active terms");
        const double total = t.value(loss)(0, 0);
        if (!std::isfinite(total))
            throw divergence_error("generator loss became non-finite at "
                                   "iteration " +
                                   std::to_string(gen_iter_));
        const auto adj = t.backward(loss);
        adam_step(gen_params_, collect_grads(t, adj, gen_ids), opt_gen_, cfg_.adam);
        adam_step(embed_params_, collect_grads(t, adj, {embed_id}), opt_embed_,
                  cfg_.adam);
        return m;
    }

    // Epoch loop: every real batch feeds one critic step; every n_critic
    // batches the generator takes a step and a metrics row is recorded.
    // On divergence the last epoch-boundary state is saved via on_checkpoint
    // before the error propagates.
    void train() {
        auto last_good = checkpoint();
        try {
            const int n_data = static_cast<int>(data_pm1_.rows());
            const int batches = n_data / cfg_.batch;
            require(batches >= 1, "train: dataset smaller than one batch");
            std::vector<int> order(static_cast<std::size_t>(n_data));
            std::iota(order.begin(), order.end(), 0);
            double l_d = 0.0;
            int critic_since_gen = 0;
            for (; epoch_ < cfg_.epochs; ++epoch_) {
                if (done()) break;
                shuffle(order);
                for (int b = 0; b < batches && !done(); ++b) {
                    tensor2 real(cfg_.batch, data_pm1_.cols());
                    std::vector<int> labels(static_cast<std::size_t>(cfg_.batch));
                    for (int i = 0; i < cfg_.batch; ++i) {
                        const int idx = order[static_cast<std::size_t>(
                            b * cfg_.batch + i)];
                        real.row(i) = data_pm1_.row(idx);
                        labels[static_cast<std::size_t>(i)] =
                            data_.labels[static_cast<std::size_t>(idx)];
                    }
                    l_d = critic_step(real, labels);
                    if (++critic_since_gen < cfg_.weights.n_critic) continue;
                    critic_since_gen = 0;
                    auto m = generator_step();
                    m.epoch = epoch_;
                    m.iter = gen_iter_;
                    m.l_d = l_d;
                    metrics_.push_back(m);
                    ++gen_iter_;
                }
                if ((epoch_ + 1) % cfg_.checkpoint_interval == 0) {
                    last_good = checkpoint();
                    if (on_checkpoint) on_checkpoint(epoch_, last_good);
                }
            }
            if (on_checkpoint) on_checkpoint(epoch_, checkpoint());
        } catch (const divergence_error&) {
            if (log) log("divergence: saving last good state");
            if (on_checkpoint) on_checkpoint(epoch_, last_good);
            throw;
        }
    }

    // Deterministic sampling from the current generator.
    std::vector<tensor2> generate(int label, int count, std::uint64_t seed) const {
        return generate_from(gen_spec_, gen_params_, embedding(), cfg_.image_side,
                             label, count, seed);
    }

    static std::vector<tensor2> generate_from(const mlp_spec& gen_spec,
                                              const parameter_set& gen_params,
                                              const tensor2& embedding, int side,
                                              int label, int count,
                                              std::uint64_t seed) {
        if (label < 0 || label >= embedding.rows())
            throw config_error("generate: label out of range");
        require(count >= 0, "generate: negative count");
        std::vector<tensor2> out;
        if (count == 0) return out;
        rng gen(seed);
        tensor2 z(count, gen_spec.widths.front());
        for (Eigen::Index r = 0; r < z.rows(); ++r)
            for (Eigen::Index c = 0; c < z.cols(); ++c) z(r, c) = gen.normal();
        std::vector<int> labels(static_cast<std::size_t>(count), label);
        const tensor2 x = mlp_eval(gen_spec, gen_params,
                                   condition_batch(z, labels, embedding));
        out.reserve(static_cast<std::size_t>(count));
        for (Eigen::Index r = 0; r < x.rows(); ++r)
            out.push_back(from_pm1(unflatten_row(x.row(r), side, side)));
        return out;
    }

  private:
    train_config cfg_;
    image_batch data_;
    tensor2 data_pm1_;
    mlp_spec gen_spec_, critic_spec_;
    parameter_set gen_params_, critic_params_, embed_params_;
    adam_state opt_gen_, opt_critic_, opt_embed_;
    rng train_rng_{0};
    std::int64_t epoch_ = 0;
    std::int64_t gen_iter_ = 0;
    unit_cell_estimate cached_;
    std::int64_t last_refresh_ = -1;
    std::vector<metric_row> metrics_;

    bool done() const {
        return cfg_.max_gen_steps > 0 && gen_iter_ >= cfg_.max_gen_steps;
    }

    tensor2 draw_latents(int batch) {
        tensor2 z(batch, cfg_.d_z);
        for (Eigen::Index r = 0; r < z.rows(); ++r)
            for (Eigen::Index c = 0; c < z.cols(); ++c)
                z(r, c) = train_rng_.normal();
        return z;
    }

    void shuffle(std::vector<int>& order) {
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[train_rng_.uniform_index(i)]);
    }

    // Batch-mode spectral estimate of the current generator outputs,
    // refreshed every fft_refresh_interval generator iterations.
    void refresh_estimate(const tensor2& x_g) {
        if (last_refresh_ >= 0 &&
            gen_iter_ - last_refresh_ < cfg_.fft_refresh_interval)
            return;
        last_refresh_ = gen_iter_;
        std::vector<tensor2> imgs;
        imgs.reserve(static_cast<std::size_t>(x_g.rows()));
        for (Eigen::Index r = 0; r < x_g.rows(); ++r)
            imgs.push_back(from_pm1(
                unflatten_row(x_g.row(r), cfg_.image_side, cfg_.image_side)));
        cached_ = estimate_batch_mode(imgs, cfg_.peaks);
    }
};

// Assemble per-class sample tiles into one grid image (classes stacked
// vertically, samples horizontally).
inline tensor2 sample_grid(const mlp_spec& gen_spec, const parameter_set& params,
                           const tensor2& embedding, int side, int per_class,
                           std::uint64_t seed) {
    const int classes = static_cast<int>(embedding.rows());
    tensor2 grid(classes * side, per_class * side);
    for (int y = 0; y < classes; ++y) {
        const auto imgs = gan_trainer::generate_from(
            gen_spec, params, embedding, side, y, per_class,
            rng::substream_seed(seed, static_cast<std::uint64_t>(y)));
        for (int i = 0; i < per_class; ++i)
            grid.block(y * side, i * side, side, side) =
                imgs[static_cast<std::size_t>(i)];
    }
    return grid;
}

}  // namespace tilegan

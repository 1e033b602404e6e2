#pragma once

#include <algorithm>
#include <numeric>
#include <set>
#include <vector>

#include "tilegan/adam.hpp"
#include "tilegan/dataset.hpp"
#include "tilegan/mlp.hpp"
#include "tilegan/rng.hpp"

namespace tilegan {

struct surrogate_config {
    std::vector<int> hidden = {256, 64};  // last hidden width is the feature dim
    int epochs = 30;
    int batch = 32;
    adam_config adam{1e-3, 0.9, 0.999, 1e-8};
    std::uint64_t seed = 7;

    void validate() const {
        if (hidden.empty()) throw config_error("surrogate_config: no hidden layers");
        for (int w : hidden)
            if (w < 1) throw config_error("surrogate_config: bad hidden width");
        if (epochs < 0) throw config_error("surrogate_config: negative epochs");
        if (batch < 1) throw config_error("surrogate_config: batch must be >= 1");
    }
};

struct surrogate_model {
    mlp_spec spec;
    parameter_set params;
    int image_side = 0;
    int classes = 0;

    int feature_dim() const {
        return spec.widths[spec.widths.size() - 2];
    }
};

struct eval_metrics {
    double accuracy = 0.0;
    double macro_f1 = 0.0;
    std::vector<double> per_class_f1;
};

inline std::vector<int> predict_labels(const tensor2& logits) {
    std::vector<int> out(static_cast<std::size_t>(logits.rows()));
    for (Eigen::Index r = 0; r < logits.rows(); ++r) {
        Eigen::Index best = 0;
        logits.row(r).maxCoeff(&best);
        out[static_cast<std::size_t>(r)] = static_cast<int>(best);
    }
    return out;
}

// Accuracy plus per-class F1 from the confusion matrix; empty denominators
// contribute F1 = 0 (the usual convention under missing predictions).
inline eval_metrics classification_metrics(const std::vector<int>& predicted,
                                           const std::vector<int>& actual,
                                           int classes) {
    require(predicted.size() == actual.size() && !actual.empty(),
            "classification_metrics: size mismatch or empty input");
    std::vector<std::vector<int>> confusion(
        static_cast<std::size_t>(classes),
        std::vector<int>(static_cast<std::size_t>(classes), 0));
    int correct = 0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        require(actual[i] >= 0 && actual[i] < classes &&
                    predicted[i] >= 0 && predicted[i] < classes,
                "classification_metrics: label out of range");
        ++confusion[static_cast<std::size_t>(actual[i])]
                   [static_cast<std::size_t>(predicted[i])];
        if (predicted[i] == actual[i]) ++correct;
    }
    eval_metrics m;
    m.accuracy = static_cast<double>(correct) / static_cast<double>(actual.size());
    for (int c = 0; c < classes; ++c) {
        const auto cc = static_cast<std::size_t>(c);
        int tp = confusion[cc][cc], fp = 0, fn = 0;
        for (int o = 0; o < classes; ++o) {
            if (o == c) continue;
            fp += confusion[static_cast<std::size_t>(o)][cc];
            fn += confusion[cc][static_cast<std::size_t>(o)];
        }
        const double prec = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / (tp + fp);
        const double rec = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / (tp + fn);
        m.per_class_f1.push_back(
            prec + rec == 0.0 ? 0.0 : 2.0 * prec * rec / (prec + rec));
    }
    m.macro_f1 = std::accumulate(m.per_class_f1.begin(), m.per_class_f1.end(), 0.0) /
                 classes;
    return m;
}

// Cross-entropy training of the compact classifier on {0,1} image rows.
inline surrogate_model train_surrogate(const image_batch& train,
                                       const surrogate_config& cfg) {
    cfg.validate();
    require(train.rows.rows() == static_cast<Eigen::Index>(train.labels.size()),
            "train_surrogate: one label per image row");
    std::set<int> distinct(train.labels.begin(), train.labels.end());
    if (distinct.size() < 2)
        throw config_error("train_surrogate: training data has a single class");

    surrogate_model model;
    model.image_side = train.side;
    model.classes = num_classes;
    model.spec.widths.push_back(train.side * train.side);
    for (int w : cfg.hidden) model.spec.widths.push_back(w);
    model.spec.widths.push_back(model.classes);
    model.spec.hidden = activation::relu;
    model.spec.output = activation::linear;

    rng gen(cfg.seed);
    model.params = init_mlp_params(model.spec, gen);
    adam_state opt = adam_state::zeros_for(model.params);

    const int n = static_cast<int>(train.rows.rows());
    const int batch = std::min(cfg.batch, n);
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[gen.uniform_index(i)]);
        for (int b = 0; b + batch <= n; b += batch) {
            tensor2 x(batch, train.rows.cols());
            std::vector<int> y(static_cast<std::size_t>(batch));
            for (int i = 0; i < batch; ++i) {
                const int idx = order[static_cast<std::size_t>(b + i)];
                x.row(i) = train.rows.row(idx);
                y[static_cast<std::size_t>(i)] =
                    train.labels[static_cast<std::size_t>(idx)];
            }
            ad::tape t;
            const auto ids = push_params(t, model.params, true);
            const auto logits =
                mlp_forward(t, model.spec, ids, t.constant(std::move(x)));
            const auto loss = softmax_cross_entropy(t, logits, y);
            if (!std::isfinite(t.value(loss)(0, 0)))
                throw divergence_error("surrogate loss became non-finite");
            adam_step(model.params, grad_params(t, loss, ids), opt, cfg.adam);
        }
    }
    return model;
}

// Penultimate-layer activations: the full forward pass minus the output layer.
inline tensor2 extract_features(const surrogate_model& model, const tensor2& images) {
    if (images.cols() != model.spec.widths.front())
        throw shape_error("extract_features: image size does not match model");
    mlp_spec trunk = model.spec;
    trunk.widths.pop_back();
    trunk.output = trunk.hidden;  // the feature layer keeps its activation
    parameter_set head_free;
    for (std::size_t i = 0; i + 2 < model.params.entries.size(); ++i)
        head_free.add(model.params.entries[i].name, model.params.entries[i].value);
    return mlp_eval(trunk, head_free, images);
}

inline tensor2 predict_probabilities(const surrogate_model& model,
                                     const tensor2& images) {
    return softmax_rows(mlp_eval(model.spec, model.params, images));
}

inline eval_metrics evaluate_surrogate(const surrogate_model& model,
                                       const image_batch& test) {
    const auto preds =
        predict_labels(mlp_eval(model.spec, model.params, test.rows));
    return classification_metrics(preds, test.labels, model.classes);
}

}  // namespace tilegan

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "tilegan/rng.hpp"
#include "tilegan/tape.hpp"
#include "tilegan/tensor.hpp"

namespace tilegan {

enum class activation : std::uint8_t { linear, relu, leaky_relu, tanh, sigmoid };

inline activation activation_from_string(const std::string& s) {
    if (s == "linear") return activation::linear;
    if (s == "relu") return activation::relu;
    if (s == "leaky_relu") return activation::leaky_relu;
    if (s == "tanh") return activation::tanh;
    if (s == "sigmoid") return activation::sigmoid;
    throw config_error("unknown activation: " + s);
}

inline std::string to_string(activation a) {
    switch (a) {
        case activation::linear: return "linear";
        case activation::relu: return "relu";
        case activation::leaky_relu: return "leaky_relu";
        case activation::tanh: return "tanh";
        case activation::sigmoid: return "sigmoid";
    }
    throw contract_error("bad activation value");
}

// Fully connected net: widths[0] inputs, widths.back() outputs, the same
// hidden activation between layers and a possibly different one on the output.
struct mlp_spec {
    std::vector<int> widths;
    activation hidden = activation::relu;
    activation output = activation::linear;
    double leaky_slope = 0.01;

    int layer_count() const { return static_cast<int>(widths.size()) - 1; }

    void validate() const {
        if (widths.size() < 2) throw config_error("mlp_spec: need at least two widths");
        for (int w : widths)
            if (w < 1) throw config_error("mlp_spec: widths must be positive");
        if (hidden == activation::leaky_relu || output == activation::leaky_relu)
            if (!(leaky_slope > 0.0 && leaky_slope < 1.0))
                throw config_error("mlp_spec: leaky_slope must lie in (0,1)");
    }
};

// Glorot-uniform weights, zero biases. Parameter order is w0,b0,w1,b1,...
// which every consumer (Adam state, checkpoints, gradient collection) relies on.
inline parameter_set init_mlp_params(const mlp_spec& spec, rng& gen) {
    spec.validate();
    parameter_set params;
    for (int l = 0; l < spec.layer_count(); ++l) {
        const int fan_in = spec.widths[static_cast<std::size_t>(l)];
        const int fan_out = spec.widths[static_cast<std::size_t>(l) + 1];
        const double bound = std::sqrt(6.0 / (fan_in + fan_out));
        tensor2 w(fan_in, fan_out);
        for (Eigen::Index r = 0; r < w.rows(); ++r)
            for (Eigen::Index c = 0; c < w.cols(); ++c)
                w(r, c) = gen.uniform(-bound, bound);
        params.add("w" + std::to_string(l), std::move(w));
        params.add("b" + std::to_string(l), tensor2::Zero(1, fan_out));
    }
    return params;
}

// Put parameters on the tape, either as trainable leaves (tags 0,1,...) or as
// frozen constants for a network held fixed during the other player's step.
inline std::vector<ad::node_id> push_params(ad::tape& t, const parameter_set& params,
                                            bool trainable) {
    std::vector<ad::node_id> ids;
    ids.reserve(params.entries.size());
    for (std::size_t i = 0; i < params.entries.size(); ++i)
        ids.push_back(trainable
                          ? t.param(params.entries[i].value, static_cast<int>(i))
                          : t.constant(params.entries[i].value));
    return ids;
}

inline ad::node_id apply_activation(ad::tape& t, ad::node_id x, activation a,
                                    double leaky_slope) {
    switch (a) {
        case activation::linear: return x;
        case activation::relu: return t.relu(x);
        case activation::leaky_relu: return t.leaky_relu(x, leaky_slope);
        case activation::tanh: return t.tanh(x);
        case activation::sigmoid: return t.sigmoid(x);
    }
    throw contract_error("bad activation value");
}

// input: B x widths[0]. Returns the B x widths.back() output node.
inline ad::node_id mlp_forward(ad::tape& t, const mlp_spec& spec,
                               const std::vector<ad::node_id>& param_ids,
                               ad::node_id input) {
    spec.validate();
    require(param_ids.size() == static_cast<std::size_t>(2 * spec.layer_count()),
            "mlp_forward: parameter count does not match spec");
    if (t.value(input).cols() != spec.widths.front())
        throw shape_error("mlp_forward: input width " +
                          std::to_string(t.value(input).cols()) + ", spec expects " +
                          std::to_string(spec.widths.front()));
    ad::node_id x = input;
    for (int l = 0; l < spec.layer_count(); ++l) {
        x = t.add_rowvec(t.matmul(x, param_ids[static_cast<std::size_t>(2 * l)]),
                         param_ids[static_cast<std::size_t>(2 * l) + 1]);
        const bool last = l == spec.layer_count() - 1;
        x = apply_activation(t, x, last ? spec.output : spec.hidden,
                             spec.leaky_slope);
    }
    return x;
}

// Off-tape forward pass, matching the taped version operation for operation
// (same Eigen expressions in the same order, so values agree bitwise).
inline tensor2 mlp_eval(const mlp_spec& spec, const parameter_set& params,
                        const tensor2& input) {
    spec.validate();
    require(params.entries.size() == static_cast<std::size_t>(2 * spec.layer_count()),
            "mlp_eval: parameter count does not match spec");
    if (input.cols() != spec.widths.front())
        throw shape_error("mlp_eval: input width does not match spec");
    tensor2 x = input;
    for (int l = 0; l < spec.layer_count(); ++l) {
        x = x * params.entries[static_cast<std::size_t>(2 * l)].value;
        x.rowwise() += params.entries[static_cast<std::size_t>(2 * l) + 1]
                           .value.row(0);
        const auto act = l == spec.layer_count() - 1 ? spec.output : spec.hidden;
        const double s = spec.leaky_slope;
        switch (act) {
            case activation::linear: break;
            case activation::relu: x = x.cwiseMax(0.0); break;
            case activation::leaky_relu:
                x = x.unaryExpr([s](double v) { return v > 0.0 ? v : s * v; });
                break;
            case activation::tanh: x = x.array().tanh().matrix(); break;
            case activation::sigmoid:
                x = x.unaryExpr(
                    [](double v) { return 1.0 / (1.0 + std::exp(-v)); });
                break;
        }
    }
    return x;
}

inline tensor2 one_hot_rows(const std::vector<int>& labels, int num_classes) {
    tensor2 out = tensor2::Zero(static_cast<Eigen::Index>(labels.size()), num_classes);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        require(labels[i] >= 0 && labels[i] < num_classes,
                "one_hot_rows: label out of range");
        out(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
    }
    return out;
}

// Mean softmax cross-entropy over the batch. The rowwise max is subtracted as
// a detached constant: the value and every derivative of log-sum-exp are
// unchanged by a constant shift, so stability costs no exactness.
inline ad::node_id softmax_cross_entropy(ad::tape& t, ad::node_id logits,
                                         const std::vector<int>& labels) {
    const int batch = static_cast<int>(t.value(logits).rows());
    const int classes = static_cast<int>(t.value(logits).cols());
    require(static_cast<int>(labels.size()) == batch,
            "softmax_cross_entropy: one label per row required");
    ad::node_id m = t.row_max_detached(logits);
    ad::node_id shifted = t.sub(logits, t.bcast_col(m, classes));
    ad::node_id lse = t.add(t.log(t.row_sum(t.exp(shifted))), m);
    ad::node_id hot = t.constant(one_hot_rows(labels, classes));
    ad::node_id picked = t.row_sum(t.hadamard(logits, hot));
    return t.mean_all(t.sub(lse, picked));
}

// Plain (off-tape) softmax used at evaluation time.
inline tensor2 softmax_rows(const tensor2& logits) {
    tensor2 out(logits.rows(), logits.cols());
    for (Eigen::Index r = 0; r < logits.rows(); ++r) {
        const double m = logits.row(r).maxCoeff();
        Eigen::ArrayXd e = (logits.row(r).array() - m).exp();
        out.row(r) = (e / e.sum()).matrix();
    }
    return out;
}

// Pull the gradients for `param_ids` out of an adjoint vector produced by
// tape::backward. Parameters the loss never touches get zero gradients.
inline std::vector<tensor2> collect_grads(const ad::tape& t,
                                          const std::vector<ad::node_id>& adj,
                                          const std::vector<ad::node_id>& param_ids) {
    std::vector<tensor2> grads;
    grads.reserve(param_ids.size());
    for (ad::node_id p : param_ids) {
        require(p >= 0 && p < static_cast<ad::node_id>(t.size()),
                "collect_grads: bad parameter id");
        if (p < static_cast<ad::node_id>(adj.size()) &&
            adj[static_cast<std::size_t>(p)] != ad::no_node)
            grads.push_back(t.value(adj[static_cast<std::size_t>(p)]));
        else
            grads.push_back(zeros_like(t.value(p)));
    }
    return grads;
}

// Gradient of a scalar loss with respect to registered parameters, returned in
// registration order.
inline std::vector<tensor2> grad_params(ad::tape& t, ad::node_id loss,
                                        const std::vector<ad::node_id>& param_ids) {
    return collect_grads(t, t.backward(loss), param_ids);
}

// Adjoint of `input` as a live tape node: downstream expressions built from it
// (norms, penalties) remain differentiable, which is exactly what a gradient
// penalty needs.
inline ad::node_id grad_input_differentiable(ad::tape& t, ad::node_id scalar_root,
                                             ad::node_id input) {
    require(t.at(input).needs_grad,
            "grad_input_differentiable: input was not marked differentiable");
    const auto adj = t.backward(scalar_root, 1.0, input);
    const auto slot = adj[static_cast<std::size_t>(input)];
    if (slot == ad::no_node)
        return t.constant(zeros_like(t.value(input)));
    return slot;
}

}  // namespace tilegan

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "tilegan/adam.hpp"
#include "tilegan/mlp.hpp"
#include "tilegan/rng.hpp"

namespace {

using namespace tilegan;

tensor2 random_matrix(int rows, int cols, rng& gen) {
    tensor2 m(rows, cols);
    for (int i = 0; i < m.size(); ++i)
        m.data()[i] = gen.normal();
    return m;
}

} // namespace

TEST_CASE("taped forward and off-tape eval agree bit for bit") {
    mlp_spec spec;
    spec.widths = {5, 8, 4, 3};
    spec.hidden = activation::leaky_relu;
    spec.leaky_slope = 0.2;
    rng init(21);
    parameter_set params = init_mlp_params(spec, init);
    rng gen(22);
    tensor2 input = random_matrix(6, 5, gen);

    ad::tape t;
    auto ids = push_params(t, params, false);
    tensor2 taped = t.value(mlp_forward(t, spec, ids, t.input(input)));
    tensor2 plain = mlp_eval(spec, params, input);

    REQUIRE(taped.rows() == plain.rows());
    REQUIRE(taped.cols() == plain.cols());
    for (int i = 0; i < taped.size(); ++i)
        REQUIRE(taped.data()[i] == plain.data()[i]);
}

TEST_CASE("parameter init is deterministic and shaped w0,b0,w1,b1") {
    mlp_spec spec;
    spec.widths = {4, 7, 2};
    rng a(9), b(9);
    parameter_set pa = init_mlp_params(spec, a);
    parameter_set pb = init_mlp_params(spec, b);

    REQUIRE(pa.entries.size() == 4);
    REQUIRE(pa.entries[0].value.rows() == 4);
    REQUIRE(pa.entries[0].value.cols() == 7);
    REQUIRE(pa.entries[1].value.rows() == 1);
    REQUIRE(pa.entries[1].value.cols() == 7);
    REQUIRE(pa.entries[2].value.rows() == 7);
    REQUIRE(pa.entries[2].value.cols() == 2);
    REQUIRE(pa.entries[3].value.rows() == 1);
    REQUIRE(pa.entries[3].value.cols() == 2);
    REQUIRE(pa.entries[1].value.isZero(0.0));
    REQUIRE(pa.entries[3].value.isZero(0.0));

    auto fa = pa.flatten();
    auto fb = pb.flatten();
    REQUIRE(fa == fb);
}

TEST_CASE("cross-entropy matches a direct log-sum-exp computation") {
    rng gen(33);
    tensor2 logits = random_matrix(5, 4, gen);
    logits *= 3.0; // spread the rows so the shift actually matters
    std::vector<int> labels = {2, 0, 3, 1, 2};

    ad::tape t;
    ad::node_id ln = t.input(logits, true);
    ad::node_id loss = softmax_cross_entropy(t, ln, labels);

    double direct = 0.0;
    for (int r = 0; r < 5; ++r) {
        double lse = 0.0;
        for (int c = 0; c < 4; ++c)
            lse += std::exp(logits(r, c));
        direct += std::log(lse) - logits(r, labels[r]);
    }
    direct /= 5.0;
    REQUIRE(t.value(loss)(0, 0) == Catch::Approx(direct).margin(1e-12));

    // The gradient of mean CE wrt logits is (softmax - onehot) / batch.
    auto adj = t.backward(loss);
    tensor2 probs = softmax_rows(logits);
    tensor2 hot = one_hot_rows(labels, 4);
    const tensor2& g = t.value(adj[ln]);
    for (int i = 0; i < g.size(); ++i)
        REQUIRE(g.data()[i] ==
                Catch::Approx((probs.data()[i] - hot.data()[i]) / 5.0)
                    .margin(1e-12));
}

TEST_CASE("softmax rows sum to one and order logits monotonically") {
    rng gen(44);
    tensor2 logits = random_matrix(8, 3, gen);
    tensor2 p = softmax_rows(logits);
    for (int r = 0; r < 8; ++r) {
        REQUIRE(p.row(r).sum() == Catch::Approx(1.0).margin(1e-12));
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                if (logits(r, a) > logits(r, b))
                    REQUIRE(p(r, a) > p(r, b));
    }
}

TEST_CASE("adam reproduces a hand-executed two-step trace") {
    // One scalar parameter, constant gradient of 2.0, beta1=0.9, beta2=0.999.
    // Every quantity below is written out exactly as the update rule defines
    // it, with the bias corrections evaluated by hand.
    adam_config cfg;
    cfg.lr = 0.1;
    cfg.beta1 = 0.9;
    cfg.beta2 = 0.999;
    cfg.eps = 1e-8;

    parameter_set params;
    params.add("w", tensor2::Constant(1, 1, 1.0));
    adam_state state = adam_state::zeros_for(params);
    std::vector<tensor2> grads = {tensor2::Constant(1, 1, 2.0)};

    // Step 1: m = 0.2, v = 0.004; m_hat = 0.2/0.1 = 2, v_hat = 0.004/0.001 = 4.
    // theta = 1 - 0.1 * 2 / (2 + 1e-8).
    adam_step(params, grads, state, cfg);
    const double theta1 = 1.0 - 0.1 * 2.0 / (2.0 + 1e-8);
    REQUIRE(params.entries[0].value(0, 0) ==
            Catch::Approx(theta1).margin(1e-15));
    REQUIRE(state.m[0](0, 0) == Catch::Approx(0.2).margin(1e-15));
    REQUIRE(state.v[0](0, 0) == Catch::Approx(0.004).margin(1e-15));
    REQUIRE(state.t == 1);

    // Step 2 with the same gradient: m = 0.9*0.2 + 0.1*2 = 0.38,
    // v = 0.999*0.004 + 0.001*4 = 0.007996;
    // m_hat = 0.38 / (1 - 0.81) = 2, v_hat = 0.007996 / (1 - 0.998001) = 4.
    adam_step(params, grads, state, cfg);
    const double m2 = 0.9 * 0.2 + 0.1 * 2.0;
    const double v2 = 0.999 * 0.004 + 0.001 * 4.0;
    const double m_hat2 = m2 / (1.0 - 0.9 * 0.9);
    const double v_hat2 = v2 / (1.0 - 0.999 * 0.999);
    const double theta2 =
        theta1 - 0.1 * m_hat2 / (std::sqrt(v_hat2) + 1e-8);
    REQUIRE(params.entries[0].value(0, 0) ==
            Catch::Approx(theta2).margin(1e-15));
    REQUIRE(state.m[0](0, 0) == Catch::Approx(m2).margin(1e-15));
    REQUIRE(state.v[0](0, 0) == Catch::Approx(v2).margin(1e-15));
    REQUIRE(state.t == 2);
}

TEST_CASE("adam rejects mismatched gradient lists") {
    parameter_set params;
    params.add("w", tensor2::Zero(2, 2));
    adam_state state = adam_state::zeros_for(params);
    std::vector<tensor2> wrong_count;
    REQUIRE_THROWS_AS(adam_step(params, wrong_count, state, adam_config{}),
                      contract_error);
    std::vector<tensor2> wrong_shape = {tensor2::Zero(1, 2)};
    REQUIRE_THROWS_AS(adam_step(params, wrong_shape, state, adam_config{}),
                      contract_error);
}

TEST_CASE("one-hot encoding rejects out-of-range labels") {
    REQUIRE_THROWS_AS(one_hot_rows({0, 3}, 3), contract_error);
    tensor2 hot = one_hot_rows({1, 0, 2}, 3);
    REQUIRE(hot(0, 1) == 1.0);
    REQUIRE(hot(1, 0) == 1.0);
    REQUIRE(hot(2, 2) == 1.0);
    REQUIRE(hot.sum() == 3.0);
}

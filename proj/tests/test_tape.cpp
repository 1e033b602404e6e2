#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "tilegan/mlp.hpp"
#include "tilegan/rng.hpp"
#include "tilegan/tape.hpp"

namespace {

using namespace tilegan;

// Mixed relative/absolute comparison: behaves like a relative error for
// gradients of ordinary magnitude and like a 1e-3-scaled absolute error for
// entries near zero, where finite differences bottom out in roundoff.
double rel_err(double a, double b) {
    return std::abs(a - b) / std::max(1e-3, std::abs(a) + std::abs(b));
}

// Scalar loss of a small MLP, recomputed from scratch so finite differences
// see a pure function of the flattened parameter vector.
double mlp_loss(const mlp_spec& spec, const parameter_set& params,
                const tensor2& input) {
    ad::tape t;
    auto ids = push_params(t, params, false);
    ad::node_id out = mlp_forward(t, spec, ids, t.input(input));
    return t.value(t.mean_all(t.tanh(out)))(0, 0);
}

double mlp_loss_at(const mlp_spec& spec, const parameter_set& base,
                   const std::vector<double>& flat, const tensor2& input) {
    parameter_set p = base;
    p.unflatten(flat);
    return mlp_loss(spec, p, input);
}

// ||grad_x D(x)||^2 for a tiny critic, as a plain function of the flattened
// parameters. Each call replays the whole double-backward pipeline on a fresh
// tape, which is exactly what an outer finite difference needs.
double grad_norm_sq(const mlp_spec& spec, const parameter_set& base,
                    const std::vector<double>& flat, const tensor2& x) {
    parameter_set p = base;
    p.unflatten(flat);
    ad::tape t;
    auto ids = push_params(t, p, true);
    ad::node_id xin = t.input(x, true);
    ad::node_id score = t.mean_all(mlp_forward(t, spec, ids, xin));
    ad::node_id g = grad_input_differentiable(t, score, xin);
    return t.value(t.sum_all(t.hadamard(g, g)))(0, 0);
}

} // namespace

TEST_CASE("two-layer forward and backward match a hand-derived straight line") {
    // y = w2 * tanh(w1 * x + b1) + b2 with scalars throughout, so every
    // intermediate and every adjoint has a closed form.
    const double w1 = 0.7, b1 = -0.2, w2 = 1.3, b2 = 0.4, x = 0.5;

    ad::tape t;
    ad::node_id xn = t.input(tensor2::Constant(1, 1, x), true);
    ad::node_id w1n = t.param(tensor2::Constant(1, 1, w1), 0);
    ad::node_id b1n = t.param(tensor2::Constant(1, 1, b1), 1);
    ad::node_id w2n = t.param(tensor2::Constant(1, 1, w2), 2);
    ad::node_id b2n = t.param(tensor2::Constant(1, 1, b2), 3);

    ad::node_id h = t.tanh(t.add(t.matmul(xn, w1n), b1n));
    ad::node_id y = t.add(t.matmul(h, w2n), b2n);

    const double pre = w1 * x + b1;
    const double hv = std::tanh(pre);
    const double yv = w2 * hv + b2;
    REQUIRE(t.value(y)(0, 0) == Catch::Approx(yv).margin(1e-12));
    REQUIRE(t.value(h)(0, 0) == Catch::Approx(hv).margin(1e-12));

    auto adj = t.backward(y);
    const double dh = w2;
    const double dpre = dh * (1.0 - hv * hv);
    REQUIRE(t.value(adj[b2n])(0, 0) == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(t.value(adj[w2n])(0, 0) == Catch::Approx(hv).margin(1e-12));
    REQUIRE(t.value(adj[b1n])(0, 0) == Catch::Approx(dpre).margin(1e-12));
    REQUIRE(t.value(adj[w1n])(0, 0) == Catch::Approx(dpre * x).margin(1e-12));
    REQUIRE(t.value(adj[xn])(0, 0) == Catch::Approx(dpre * w1).margin(1e-12));
}

TEST_CASE("backward gradients agree with central finite differences") {
    // A handful of random architectures; the acceptance suite widens this to
    // twenty. Central differences with step 1e-5 resolve smooth parts to well
    // below the 1e-6 bar.
    const double step = 1e-5;
    rng gen(42);
    for (int trial = 0; trial < 5; ++trial) {
        mlp_spec spec;
        int in = 2 + static_cast<int>(gen.uniform() * 3);
        int hid = 3 + static_cast<int>(gen.uniform() * 4);
        int out = 1 + static_cast<int>(gen.uniform() * 2);
        spec.widths = {in, hid, out};
        spec.hidden = trial % 2 == 0 ? activation::tanh : activation::sigmoid;

        rng init(gen.next_u64());
        parameter_set params = init_mlp_params(spec, init);
        tensor2 input(3, in);
        for (int i = 0; i < input.size(); ++i)
            input.data()[i] = gen.normal();

        ad::tape t;
        auto ids = push_params(t, params, true);
        ad::node_id loss =
            t.mean_all(t.tanh(mlp_forward(t, spec, ids, t.input(input))));
        auto grads = collect_grads(t, t.backward(loss), ids);

        std::vector<double> flat = params.flatten();
        std::vector<double> analytic;
        for (const auto& g : grads)
            analytic.insert(analytic.end(), g.data(), g.data() + g.size());
        REQUIRE(analytic.size() == flat.size());

        for (std::size_t i = 0; i < flat.size(); ++i) {
            std::vector<double> hi = flat, lo = flat;
            hi[i] += step;
            lo[i] -= step;
            double fd = (mlp_loss_at(spec, params, hi, input) -
                         mlp_loss_at(spec, params, lo, input)) /
                        (2.0 * step);
            INFO("trial " << trial << " param " << i);
            REQUIRE(rel_err(analytic[i], fd) < 1e-6);
        }
    }
}

TEST_CASE("double backward differentiates the gradient-norm penalty") {
    mlp_spec spec;
    spec.widths = {3, 5, 1};
    spec.hidden = activation::tanh;
    spec.output = activation::linear;
    rng init(7);
    parameter_set params = init_mlp_params(spec, init);

    rng gen(11);
    tensor2 x(2, 3);
    for (int i = 0; i < x.size(); ++i)
        x.data()[i] = gen.normal();

    // First backward: grad wrt the input must itself match finite differences
    // of the critic score.
    ad::tape t;
    auto ids = push_params(t, params, true);
    ad::node_id xin = t.input(x, true);
    ad::node_id score = t.mean_all(mlp_forward(t, spec, ids, xin));
    ad::node_id g = grad_input_differentiable(t, score, xin);

    const double step = 1e-5;
    for (int i = 0; i < x.size(); ++i) {
        tensor2 hi = x, lo = x;
        hi.data()[i] += step;
        lo.data()[i] -= step;
        auto eval = [&](const tensor2& pt) {
            ad::tape s;
            auto sids = push_params(s, params, false);
            return s.value(s.mean_all(mlp_forward(s, spec, sids, s.input(pt))))(
                0, 0);
        };
        double fd = (eval(hi) - eval(lo)) / (2.0 * step);
        REQUIRE(rel_err(t.value(g).data()[i], fd) < 1e-6);
    }

    // Second backward: the parameter gradient of ||g||^2 must match an outer
    // finite difference over the whole first-backward computation.
    ad::node_id penalty = t.sum_all(t.hadamard(g, g));
    auto grads = collect_grads(t, t.backward(penalty), ids);
    std::vector<double> analytic;
    for (const auto& gr : grads)
        analytic.insert(analytic.end(), gr.data(), gr.data() + gr.size());

    std::vector<double> flat = params.flatten();
    REQUIRE(analytic.size() == flat.size());
    for (std::size_t i = 0; i < flat.size(); ++i) {
        std::vector<double> hi = flat, lo = flat;
        hi[i] += step;
        lo[i] -= step;
        double fd = (grad_norm_sq(spec, params, hi, x) -
                     grad_norm_sq(spec, params, lo, x)) /
                    (2.0 * step);
        INFO("param " << i);
        REQUIRE(rel_err(analytic[i], fd) < 1e-4);
    }
}

TEST_CASE("backward restricted toward one leaf matches the full sweep there") {
    mlp_spec spec;
    spec.widths = {4, 6, 1};
    spec.hidden = activation::tanh;
    rng init(3);
    parameter_set params = init_mlp_params(spec, init);
    rng gen(5);
    tensor2 x(3, 4);
    for (int i = 0; i < x.size(); ++i)
        x.data()[i] = gen.normal();

    auto input_grad = [&](bool restricted) {
        ad::tape t;
        auto ids = push_params(t, params, true);
        ad::node_id xin = t.input(x, true);
        ad::node_id loss = t.mean_all(mlp_forward(t, spec, ids, xin));
        auto adj = restricted ? t.backward(loss, 1.0, xin) : t.backward(loss);
        REQUIRE(adj[xin] != ad::no_node);
        return tensor2(t.value(adj[xin]));
    };

    tensor2 full = input_grad(false);
    tensor2 pruned = input_grad(true);
    REQUIRE((full - pruned).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("tape rejects malformed uses") {
    ad::tape t;
    ad::node_id a = t.input(tensor2::Zero(2, 3));
    ad::node_id b = t.input(tensor2::Zero(2, 3));
    REQUIRE_THROWS_AS(t.matmul(a, b), shape_error);

    ad::node_id wide = t.input(tensor2::Zero(2, 2), true);
    REQUIRE_THROWS_AS(t.backward(wide), contract_error);
}

TEST_CASE("elementwise op gradients match their closed forms") {
    rng gen(17);
    tensor2 v(2, 4);
    for (int i = 0; i < v.size(); ++i)
        v.data()[i] = 0.3 + gen.uniform(); // keep log/sqrt/reciprocal safe

    struct case_t {
        const char* name;
        ad::node_id (ad::tape::*op)(ad::node_id);
        double (*d)(double);
    };
    const case_t cases[] = {
        {"tanh", &ad::tape::tanh,
         [](double x) { double t = std::tanh(x); return 1.0 - t * t; }},
        {"sigmoid", &ad::tape::sigmoid,
         [](double x) {
             double s = 1.0 / (1.0 + std::exp(-x));
             return s * (1.0 - s);
         }},
        {"exp", &ad::tape::exp, [](double x) { return std::exp(x); }},
        {"log", &ad::tape::log, [](double x) { return 1.0 / x; }},
        {"sqrt", &ad::tape::sqrt,
         [](double x) { return 0.5 / std::sqrt(x); }},
        {"reciprocal", &ad::tape::reciprocal,
         [](double x) { return -1.0 / (x * x); }},
    };
    for (const auto& c : cases) {
        ad::tape t;
        ad::node_id in = t.input(v, true);
        ad::node_id out = t.sum_all((t.*c.op)(in));
        auto adj = t.backward(out);
        const tensor2& g = t.value(adj[in]);
        for (int i = 0; i < v.size(); ++i) {
            INFO(c.name << " entry " << i);
            REQUIRE(g.data()[i] ==
                    Catch::Approx(c.d(v.data()[i])).margin(1e-12));
        }
    }
}

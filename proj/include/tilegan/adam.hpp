#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "tilegan/tensor.hpp"

namespace tilegan {

struct adam_config {
    double lr = 1e-4;
    double beta1 = 0.5;
    double beta2 = 0.9;
    double eps = 1e-8;
};

// First/second moment estimates plus the shared step counter.
struct adam_state {
    std::vector<tensor2> m;
    std::vector<tensor2> v;
    std::int64_t t = 0;

    static adam_state zeros_for(const parameter_set& params) {
        adam_state s;
        s.m.reserve(params.entries.size());
        s.v.reserve(params.entries.size());
        for (const auto& e : params.entries) {
            s.m.push_back(zeros_like(e.value));
            s.v.push_back(zeros_like(e.value));
        }
        return s;
    }
};

// One in-place Adam update with bias correction.
inline void adam_step(parameter_set& params, const std::vector<tensor2>& grads,
                      adam_state& state, const adam_config& cfg) {
    require(grads.size() == params.entries.size(),
            "adam_step: gradient count does not match parameters");
    require(state.m.size() == params.entries.size() &&
                state.v.size() == params.entries.size(),
            "adam_step: state does not match parameters");
    state.t += 1;
    const double corr1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
    const double corr2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < params.entries.size(); ++i) {
        tensor2& theta = params.entries[i].value;
        const tensor2& g = grads[i];
        require(g.rows() == theta.rows() && g.cols() == theta.cols(),
                "adam_step: gradient shape mismatch");
        state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
        state.v[i] =
            (cfg.beta2 * state.v[i].array() + (1.0 - cfg.beta2) * g.array().square())
                .matrix();
        const auto m_hat = state.m[i].array() / corr1;
        const auto v_hat = state.v[i].array() / corr2;
        theta.array() -= cfg.lr * m_hat / (v_hat.sqrt() + cfg.eps);
        require(all_finite(theta), "adam_step: parameters became non-finite");
    }
}

}  // namespace tilegan

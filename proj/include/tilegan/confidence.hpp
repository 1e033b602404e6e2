#pragma once

#include <cmath>
#include <vector>

#include "tilegan/common.hpp"

namespace tilegan {

// Inverse standard-normal CDF (Acklam's rational approximation, |error| < 1.15e-9).
inline double inverse_normal_cdf(double p) {
    require(p > 0.0 && p < 1.0, "inverse_normal_cdf: p must lie in (0,1)");
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p <= 1.0 - p_low) {
        const double q = p - 0.5, r = q * q;
        return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
               q /
               (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    }
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
}

constexpr double sigma_floor = 1e-4;

// Per-class Gaussian over surrogate confidence scores.
struct confidence_model {
    std::vector<double> mu;
    std::vector<double> sigma;
    double alpha_conf = 0.90;

    int classes() const { return static_cast<int>(mu.size()); }
};

enum class threshold_mode : std::uint8_t { quantile, absolute };

namespace detail {

struct em_fit {
    double mu = 0.0;
    double sigma = 0.0;  // population convention, before flooring
    int iterations = 0;
};

// Single-component EM, written as the explicit iteration. With one component
// every responsibility is 1, so the M-step lands on the sample mean and
// population variance; convergence to 1e-10 takes at most two passes.
inline em_fit fit_single_gaussian_em(const std::vector<double>& scores,
                                     int max_iterations = 5,
                                     double tolerance = 1e-10) {
    require(scores.size() >= 2, "fit_single_gaussian_em: need at least 2 scores");
    em_fit fit;
    fit.mu = scores.front();
    fit.sigma = 1.0;
    const auto n = static_cast<double>(scores.size());
    for (int it = 0; it < max_iterations; ++it) {
        fit.iterations = it + 1;
        // E-step: responsibilities of the single component are all 1
        double mean = 0.0;
        for (double s : scores) mean += s;
        mean /= n;
        double var = 0.0;
        for (double s : scores) var += (s - mean) * (s - mean);
        var /= n;
        const double sd = std::sqrt(var);
        const bool converged =
            std::abs(mean - fit.mu) < tolerance && std::abs(sd - fit.sigma) < tolerance;
        fit.mu = mean;
        fit.sigma = sd;
        if (converged) break;
    }
    return fit;
}

}  // namespace detail

// scores_per_class[c] holds the surrogate's confidence (softmax probability
// of class c) for samples generated as class c.
inline confidence_model fit_confidence_model(
    const std::vector<std::vector<double>>& scores_per_class,
    double alpha_conf = 0.90) {
    if (!(alpha_conf > 0.0 && alpha_conf < 1.0))
        throw config_error("fit_confidence_model: alpha_conf must lie in (0,1)");
    confidence_model model;
    model.alpha_conf = alpha_conf;
    for (std::size_t c = 0; c < scores_per_class.size(); ++c) {
        if (scores_per_class[c].size() < 2)
            throw config_error("fit_confidence_model: class " + std::to_string(c) +
                               " has fewer than 2 scores");
        const auto fit = detail::fit_single_gaussian_em(scores_per_class[c]);
        model.mu.push_back(fit.mu);
        model.sigma.push_back(std::max(fit.sigma, sigma_floor));
    }
    return model;
}

// The acceptance cut for class c: the alpha_conf quantile of the fitted
// Gaussian, or the raw alpha_conf value in absolute mode.
inline double acceptance_cut(const confidence_model& model, int c,
                             threshold_mode mode) {
    require(c >= 0 && c < model.classes(), "acceptance_cut: class out of range");
    if (mode == threshold_mode::absolute) return model.alpha_conf;
    return model.mu[static_cast<std::size_t>(c)] +
           inverse_normal_cdf(model.alpha_conf) *
               model.sigma[static_cast<std::size_t>(c)];
}

// Indices of the samples whose confidence clears the cut, in input order.
inline std::vector<std::size_t> filter_samples(
    const std::vector<double>& confidences, const confidence_model& model, int c,
    threshold_mode mode = threshold_mode::quantile) {
    const double cut = acceptance_cut(model, c, mode);
    std::vector<std::size_t> accepted;
    for (std::size_t i = 0; i < confidences.size(); ++i) {
        require(confidences[i] >= 0.0 && confidences[i] <= 1.0,
                "filter_samples: confidences must lie in [0,1]");
        if (confidences[i] >= cut) accepted.push_back(i);
    }
    return accepted;
}

}  // namespace tilegan

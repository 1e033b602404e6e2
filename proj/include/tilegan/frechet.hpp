#pragma once

#include <Eigen/Eigenvalues>
#include <cmath>
#include <vector>

#include "tilegan/common.hpp"
#include "tilegan/surrogate.hpp"
#include "tilegan/tensor.hpp"

namespace tilegan {

struct gaussian_stats_t {
    tensor2 mu;     // 1 x d
    tensor2 sigma;  // d x d, symmetric
};

// Sample mean and unbiased covariance, symmetrized.
inline gaussian_stats_t gaussian_stats(const tensor2& features) {
    if (features.rows() < 2)
        throw contract_error("gaussian_stats: need at least 2 samples");
    const auto n = features.rows();
    gaussian_stats_t s;
    s.mu = features.colwise().mean();
    tensor2 centered = features;
    centered.rowwise() -= s.mu.row(0);
    s.sigma = (centered.transpose() * centered) / static_cast<double>(n - 1);
    s.sigma = ((s.sigma + s.sigma.transpose()) / 2.0).eval();
    return s;
}

namespace detail {

constexpr double psd_tolerance = 1e-8;

// Symmetric PSD square root by eigendecomposition; eigenvalues within
// -1e-8 are treated as rounding and clamped to zero, anything lower is a
// genuine violation.
inline tensor2 psd_sqrt(const tensor2& m, const char* what) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
    Eigen::VectorXd vals = eig.eigenvalues();
    for (Eigen::Index i = 0; i < vals.size(); ++i) {
        if (vals(i) < -psd_tolerance)
            throw numerical_error(std::string(what) +
                                  ": matrix is not positive semi-definite "
                                  "(eigenvalue " +
                                  std::to_string(vals(i)) + ")");
        vals(i) = vals(i) < 0.0 ? 0.0 : std::sqrt(vals(i));
    }
    return eig.eigenvectors() * vals.asDiagonal() *
           eig.eigenvectors().transpose();
}

}  // namespace detail

// ||mu_a - mu_b||^2 + tr(S_a + S_b - 2 (S_a S_b)^{1/2}), with the cross term
// computed through the symmetric form S_a^{1/2} S_b S_a^{1/2}.
inline double frechet_distance(const gaussian_stats_t& a,
                               const gaussian_stats_t& b) {
    if (a.mu.cols() != b.mu.cols())
        throw shape_error("frechet_distance: dimension mismatch");
    const tensor2 root_a = detail::psd_sqrt(a.sigma, "frechet_distance: sigma_a");
    tensor2 inner = root_a * b.sigma * root_a;
    inner = ((inner + inner.transpose()) / 2.0).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(inner);
    double tr_cross = 0.0;
    for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) {
        const double v = eig.eigenvalues()(i);
        if (v < -detail::psd_tolerance)
            throw numerical_error(
                "frechet_distance: cross term is not positive semi-definite "
                "(eigenvalue " +
                std::to_string(v) + ")");
        tr_cross += v > 0.0 ? std::sqrt(v) : 0.0;
    }
    const double mean_term = (a.mu - b.mu).squaredNorm();
    double d = mean_term + a.sigma.trace() + b.sigma.trace() - 2.0 * tr_cross;
    if (d < 0.0) {
        if (d < -detail::psd_tolerance)
            throw numerical_error("frechet_distance: distance " +
                                  std::to_string(d) + " below tolerance");
        d = 0.0;
    }
    return d;
}

// Per split: exp(mean_i KL(p_i || mean of split)); reported as mean and
// population std across splits. Zero probabilities contribute nothing to the
// KL sum (0 log 0 = 0).
inline std::pair<double, double> inception_score(const tensor2& probs,
                                                 int splits = 10) {
    require(splits >= 1, "inception_score: need at least one split");
    const auto n = probs.rows();
    require(n >= splits, "inception_score: fewer samples than splits");
    for (Eigen::Index r = 0; r < n; ++r) {
        double sum = 0.0;
        for (Eigen::Index c = 0; c < probs.cols(); ++c) {
            const double p = probs(r, c);
            require(p >= 0.0 && std::isfinite(p),
                    "inception_score: probabilities must be non-negative");
            sum += p;
        }
        require(std::abs(sum - 1.0) <= 1e-9,
                "inception_score: a row does not sum to 1");
    }
    std::vector<double> scores;
    for (int s = 0; s < splits; ++s) {
        const auto begin = n * s / splits;
        const auto end = n * (s + 1) / splits;
        const auto len = end - begin;
        tensor2 marginal = probs.middleRows(begin, len).colwise().mean();
        double mean_kl = 0.0;
        for (Eigen::Index r = begin; r < end; ++r) {
            double kl = 0.0;
            for (Eigen::Index c = 0; c < probs.cols(); ++c) {
                const double p = probs(r, c);
                if (p > 0.0) kl += p * (std::log(p) - std::log(marginal(0, c)));
            }
            mean_kl += kl;
        }
        mean_kl /= static_cast<double>(len);
        scores.push_back(std::exp(mean_kl));
    }
    double mean = 0.0;
    for (double v : scores) mean += v;
    mean /= static_cast<double>(splits);
    double var = 0.0;
    for (double v : scores) var += (v - mean) * (v - mean);
    var /= static_cast<double>(splits);
    return {mean, std::sqrt(var)};
}

struct fid_report {
    double topofid = 0.0;
    double is_mean = 0.0;
    double is_std = 0.0;
    int n_real = 0;
    int n_gen = 0;
};

// Surrogate-feature Frechet distance between the two sets plus the
// classifier-based inception score of the generated set.
inline fid_report topofid_report(
    const surrogate_model& model, const tensor2& real_rows,
    const tensor2& gen_rows, int is_splits = 10,
    const std::function<void(const std::string&)>& warn = {}) {
    require(real_rows.rows() > 0 && gen_rows.rows() > 0,
            "topofid_report: both sets must be non-empty");
    fid_report rep;
    rep.n_real = static_cast<int>(real_rows.rows());
    rep.n_gen = static_cast<int>(gen_rows.rows());
    if (warn && (rep.n_real < model.feature_dim() || rep.n_gen < model.feature_dim()))
        warn("topofid_report: sample count below feature dimension " +
             std::to_string(model.feature_dim()) +
             "; covariance estimates will be degenerate");
    const auto stats_real = gaussian_stats(extract_features(model, real_rows));
    const auto stats_gen = gaussian_stats(extract_features(model, gen_rows));
    rep.topofid = frechet_distance(stats_real, stats_gen);
    const auto [is_mean, is_std] =
        inception_score(predict_probabilities(model, gen_rows), is_splits);
    rep.is_mean = is_mean;
    rep.is_std = is_std;
    return rep;
}

}  // namespace tilegan

#pragma once

#include <algorithm>
#include <limits>
#include <map>
#include <utility>
#include <vector>

#include "tilegan/fft.hpp"
#include "tilegan/pattern.hpp"

namespace tilegan {

struct peak_detect_config {
    double alpha_fft = 0.3;   // threshold sensitivity in (0,1)
    int radius = 1;           // local-max neighborhood, bins
    double spacing_tol = 0.25;  // allowed relative deviation from the modal gap

    void validate() const {
        if (!(alpha_fft > 0.0 && alpha_fft < 1.0))
            throw config_error("peak_detect_config: alpha_fft must lie in (0,1)");
        if (radius < 1)
            throw config_error("peak_detect_config: radius must be at least 1");
        if (!(spacing_tol > 0.0))
            throw config_error("peak_detect_config: spacing_tol must be positive");
    }
};

struct unit_cell_estimate {
    int p_h = 1;
    int p_w = 1;
    bool valid = false;
    std::vector<int> peaks_h;  // vertical-axis peak bins (row profile)
    std::vector<int> peaks_w;  // horizontal-axis peak bins (column profile)
    double tau_h = 0.0;
    double tau_w = 0.0;
};

// horizontal profile: column sums (length W); vertical: row sums (length H).
inline std::pair<std::vector<double>, std::vector<double>> project(
    const tensor2& spectrum) {
    std::vector<double> horizontal(static_cast<std::size_t>(spectrum.cols()));
    std::vector<double> vertical(static_cast<std::size_t>(spectrum.rows()));
    for (Eigen::Index c = 0; c < spectrum.cols(); ++c)
        horizontal[static_cast<std::size_t>(c)] = spectrum.col(c).sum();
    for (Eigen::Index r = 0; r < spectrum.rows(); ++r)
        vertical[static_cast<std::size_t>(r)] = spectrum.row(r).sum();
    return {std::move(horizontal), std::move(vertical)};
}

inline double peak_threshold(const std::vector<double>& profile, double alpha) {
    const auto [lo, hi] = std::minmax_element(profile.begin(), profile.end());
    return *lo + alpha * (*hi - *lo);
}

namespace detail {

// Range of the profile with the center bin left out. The relocated DC line
// aggregates the entire zero-frequency column of the other axis; it is never
// a peak candidate, so it must not stretch the detection range either.
inline std::pair<double, double> range_excluding_center(
    const std::vector<double>& profile) {
    const int n = static_cast<int>(profile.size());
    const int center = n / 2;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (int b = 0; b < n; ++b) {
        if (b == center) continue;
        lo = std::min(lo, profile[static_cast<std::size_t>(b)]);
        hi = std::max(hi, profile[static_cast<std::size_t>(b)]);
    }
    return {lo, hi};
}

inline double threshold_excluding_center(const std::vector<double>& profile,
                                         double alpha) {
    const auto [lo, hi] = range_excluding_center(profile);
    return lo + alpha * (hi - lo);
}

inline double median_excluding_center(const std::vector<double>& profile) {
    const int n = static_cast<int>(profile.size());
    std::vector<double> rest;
    rest.reserve(profile.size());
    for (int b = 0; b < n; ++b)
        if (b != n / 2) rest.push_back(profile[static_cast<std::size_t>(b)]);
    if (rest.empty()) return 0.0;
    const auto mid = rest.begin() + static_cast<std::ptrdiff_t>(rest.size() / 2);
    std::nth_element(rest.begin(), mid, rest.end());
    return *mid;
}

// A cell whose odd harmonics fall below tau loses every other comb line, so
// the modal gap doubles. When each mid-gap bin between modal-spaced peaks
// still carries a strict local maximum well above the floor, those are the
// missing harmonics and the true spacing is half the modal one. Two guards
// keep this from firing on anything but a genuine comb: the relocated DC bin
// is never accepted as evidence, and the mid-gap bin must clear twice the
// profile median — a dense noise floor puts the median right at the mid-gap
// bins, while a harmonic comb leaves most bins near zero.
inline int refine_half_spacing(const std::vector<int>& peaks, int spacing,
                               const std::vector<double>& profile, int radius) {
    if (spacing < 2 || spacing % 2 != 0) return spacing;
    const int n = static_cast<int>(profile.size());
    const int center = n / 2;
    const auto [lo, hi] = range_excluding_center(profile);
    const double floor_cut = std::max(lo + 0.02 * (hi - lo),
                                      2.0 * median_excluding_center(profile));
    int supported = 0;
    for (std::size_t i = 1; i < peaks.size(); ++i) {
        if (peaks[i] - peaks[i - 1] != spacing) continue;
        const int mid = peaks[i - 1] + spacing / 2;
        if (mid == center) continue;
        const double v = profile[static_cast<std::size_t>(mid)];
        if (!(v > floor_cut)) return spacing;
        for (int d = 1; d <= radius; ++d) {
            if (mid - d >= 0 && v < profile[static_cast<std::size_t>(mid - d)])
                return spacing;
            if (mid + d < n && v < profile[static_cast<std::size_t>(mid + d)])
                return spacing;
        }
        ++supported;
    }
    return supported > 0 ? spacing / 2 : spacing;
}

// A cell whose even harmonics vanish exactly keeps only the odd multiples of
// the true spacing: every surviving peak then sits half a modal gap off the
// DC-anchored lattice, which no genuine spacing-g comb can do. When all
// detected peaks share that half-phase the modal spacing is twice the true
// one and the mid-gap bins are exactly zero, so refine_half_spacing cannot
// see it. Scattered noise peaks never satisfy the all-bins congruence.
inline int refine_phase_offset(const std::vector<int>& peaks, int spacing,
                               int center) {
    if (spacing < 2 || spacing % 2 != 0) return spacing;
    int off_lattice = 0;
    for (int b : peaks) {
        if (b == center) continue;  // the reinserted DC bin is always aligned
        if (std::abs(b - center) % spacing != spacing / 2) return spacing;
        ++off_lattice;
    }
    return off_lattice >= 2 ? spacing / 2 : spacing;
}

// Most frequent value; ties go to the smaller one.
inline int mode_smallest(const std::vector<int>& values) {
    std::map<int, int> hist;
    for (int v : values) ++hist[v];
    int best = values.front(), best_count = 0;
    for (const auto& [v, count] : hist)
        if (count > best_count) {  // map is ordered, first wins ties
            best = v;
            best_count = count;
        }
    return best;
}

}  // namespace detail

// Threshold + local-max candidates (DC bin excluded), then a spacing
// regularity pass: a candidate stays only if at least one of its gaps to
// adjacent candidates is close to the modal gap.
inline std::vector<int> detect_peaks(const std::vector<double>& profile,
                                     const peak_detect_config& cfg) {
    cfg.validate();
    require(profile.size() >= 3, "detect_peaks: profile too short");
    for (double v : profile)
        require(v >= 0.0 && std::isfinite(v),
                "detect_peaks: profile values must be non-negative and finite");
    const int n = static_cast<int>(profile.size());
    const int center = n / 2;
    const auto [lo, hi] = detail::range_excluding_center(profile);
    if (lo == hi) return {};
    const double tau = lo + cfg.alpha_fft * (hi - lo);

    std::vector<int> candidates;
    for (int b = 0; b < n; ++b) {
        if (b == center) continue;
        if (!(profile[static_cast<std::size_t>(b)] > tau)) continue;
        bool local_max = true;
        for (int d = 1; d <= cfg.radius && local_max; ++d) {
            if (b - d >= 0 && profile[static_cast<std::size_t>(b)] <
                                  profile[static_cast<std::size_t>(b - d)])
                local_max = false;
            if (b + d < n && profile[static_cast<std::size_t>(b)] <
                                 profile[static_cast<std::size_t>(b + d)])
                local_max = false;
        }
        if (local_max) candidates.push_back(b);
    }
    if (candidates.size() < 3) return candidates;

    std::vector<int> gaps;
    for (std::size_t i = 1; i < candidates.size(); ++i)
        gaps.push_back(candidates[i] - candidates[i - 1]);
    const int modal = detail::mode_smallest(gaps);
    const double tol = cfg.spacing_tol * modal;
    auto regular = [&](int gap) { return std::abs(gap - modal) <= tol; };

    std::vector<int> kept;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const bool left_ok = i > 0 && regular(gaps[i - 1]);
        const bool right_ok = i + 1 < candidates.size() && regular(gaps[i]);
        if (left_ok || right_ok) kept.push_back(candidates[i]);
    }
    return kept;
}

// Mode of consecutive gaps between surviving peaks, clamped to [1, side].
// Fewer than two peaks on either axis means no repetition evidence: the
// estimate falls back to (1, 1) and is flagged invalid.
inline unit_cell_estimate estimate_unit_count(const tensor2& img,
                                              const peak_detect_config& cfg) {
    const auto spectrum = magnitude_spectrum(img);
    auto [horizontal, vertical] = project(spectrum);
    unit_cell_estimate est;
    est.tau_w = detail::threshold_excluding_center(horizontal, cfg.alpha_fft);
    est.tau_h = detail::threshold_excluding_center(vertical, cfg.alpha_fft);
    est.peaks_w = detect_peaks(horizontal, cfg);
    est.peaks_h = detect_peaks(vertical, cfg);

    auto spacing_of = [&cfg](std::vector<int> peaks,
                             const std::vector<double>& profile,
                             int side) -> int {
        if (peaks.size() < 2) return 0;
        // The DC bin is barred from peak candidacy but is always a comb
        // lattice point; without it the gap spanning the center reads as
        // twice the true spacing and can tip the modal vote.
        const int center = static_cast<int>(profile.size()) / 2;
        peaks.insert(std::upper_bound(peaks.begin(), peaks.end(), center),
                     center);
        std::vector<int> gaps;
        for (std::size_t i = 1; i < peaks.size(); ++i)
            gaps.push_back(peaks[i] - peaks[i - 1]);
        const int modal = std::clamp(detail::mode_smallest(gaps), 1, side);
        int refined =
            detail::refine_half_spacing(peaks, modal, profile, cfg.radius);
        if (refined == modal)
            refined = detail::refine_phase_offset(peaks, modal, center);
        return std::clamp(refined, 1, side);
    };
    const int ph =
        spacing_of(est.peaks_h, vertical, static_cast<int>(img.rows()));
    const int pw =
        spacing_of(est.peaks_w, horizontal, static_cast<int>(img.cols()));
    est.valid = ph > 0 && pw > 0;
    est.p_h = est.valid ? ph : 1;
    est.p_w = est.valid ? pw : 1;
    return est;
}

// Independent period estimate from circular autocorrelation: per axis, the
// smallest non-zero lag with maximal correlation; a flat correlation means no
// repetition. Unit count = side / period, rounded.
inline std::pair<int, int> autocorrelation_period_oracle(const tensor2& img) {
    require(is_binary(img), "autocorrelation_period_oracle: binary input only");
    require(img.rows() >= 2 && img.cols() >= 2,
            "autocorrelation_period_oracle: image must be at least 2x2");
    auto axis_count = [](const tensor2& x, bool rows_axis) {
        const int n = static_cast<int>(rows_axis ? x.rows() : x.cols());
        std::vector<double> corr(static_cast<std::size_t>(n), 0.0);
        for (int lag = 0; lag < n; ++lag) {
            double acc = 0.0;
            for (Eigen::Index r = 0; r < x.rows(); ++r)
                for (Eigen::Index c = 0; c < x.cols(); ++c) {
                    const Eigen::Index rr = rows_axis ? (r + lag) % x.rows() : r;
                    const Eigen::Index cc = rows_axis ? c : (c + lag) % x.cols();
                    acc += x(r, c) * x(rr, cc);
                }
            corr[static_cast<std::size_t>(lag)] = acc;
        }
        double best = corr[1], worst = corr[1];
        bool flat = true;
        for (int lag = 1; lag < n; ++lag) {
            const double v = corr[static_cast<std::size_t>(lag)];
            if (v != corr[1]) flat = false;
            best = std::max(best, v);
            worst = std::min(worst, v);
        }
        if (flat) return 1;
        // Noise turns the exact ties at multiples of the period into near
        // ties; the period is the smallest lag on that top plateau.
        const double cutoff = best - 0.05 * (best - worst);
        int best_lag = 1;
        for (int lag = 1; lag < n; ++lag)
            if (corr[static_cast<std::size_t>(lag)] >= cutoff) {
                best_lag = lag;
                break;
            }
        return static_cast<int>(std::lround(static_cast<double>(n) / best_lag));
    };
    return {axis_count(img, true), axis_count(img, false)};
}

// Batch aggregation: per-image estimates, then the most common (p_h, p_w)
// with ties toward smaller counts.
inline unit_cell_estimate estimate_batch_mode(
    const std::vector<tensor2>& images, const peak_detect_config& cfg) {
    require(!images.empty(), "estimate_batch_mode: empty batch");
    std::map<std::pair<int, int>, int> hist;
    std::vector<unit_cell_estimate> all;
    for (const auto& img : images) {
        auto est = estimate_unit_count(img, cfg);
        if (est.valid) ++hist[{est.p_h, est.p_w}];
        all.push_back(std::move(est));
    }
    unit_cell_estimate out;
    if (hist.empty()) return out;  // invalid, (1,1)
    std::pair<int, int> best{1, 1};
    int best_count = 0;
    for (const auto& [pq, count] : hist)
        if (count > best_count) {  // ordered map: smaller pair wins ties
            best = pq;
            best_count = count;
        }
    out.valid = true;
    out.p_h = best.first;
    out.p_w = best.second;
    return out;
}

}  // namespace tilegan

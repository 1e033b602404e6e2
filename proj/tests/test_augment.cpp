#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "tilegan/balance.hpp"
#include "tilegan/confidence.hpp"
#include "tilegan/rng.hpp"

namespace {

using namespace tilegan;

scored_entry make_scored(std::string path, int label, double confidence) {
    scored_entry s;
    s.entry.path = std::move(path);
    s.entry.label = label;
    s.confidence = confidence;
    return s;
}

dataset_manifest manifest_with_counts(const std::array<int, num_classes>& counts) {
    dataset_manifest m;
    m.root = "real_root";
    int idx = 0;
    for (int c = 0; c < static_cast<int>(counts.size()); ++c) {
        for (int k = 0; k < counts[static_cast<std::size_t>(c)]; ++k) {
            manifest_entry e;
            e.path = "real_" + std::to_string(idx++) + ".pgm";
            e.label = c;
            m.entries.push_back(e);
        }
    }
    return m;
}

std::vector<std::string> paths_of(const dataset_manifest& m) {
    std::vector<std::string> out;
    for (const auto& e : m.entries) out.push_back(e.path);
    return out;
}

}  // namespace

TEST_CASE("inverse normal cdf matches reference quantiles") {
    // Acklam's approximation is good to |error| < 1.15e-9.
    CHECK(inverse_normal_cdf(0.5) == 0.0);
    CHECK(inverse_normal_cdf(0.90) == Catch::Approx(1.2815515655446004).margin(2e-9));
    CHECK(inverse_normal_cdf(0.975) == Catch::Approx(1.959963984540054).margin(2e-9));
    CHECK(inverse_normal_cdf(0.01) == Catch::Approx(-2.3263478740408408).margin(2e-9));

    for (double p : {0.001, 0.02, 0.1, 0.3, 0.45})
        CHECK(inverse_normal_cdf(p) ==
              Catch::Approx(-inverse_normal_cdf(1.0 - p)).margin(1e-8));

    double prev = inverse_normal_cdf(0.001);
    for (double p = 0.005; p < 1.0; p += 0.005) {
        const double z = inverse_normal_cdf(p);
        CHECK(z > prev);
        prev = z;
    }

    CHECK_THROWS_AS(inverse_normal_cdf(0.0), contract_error);
    CHECK_THROWS_AS(inverse_normal_cdf(1.0), contract_error);
    CHECK_THROWS_AS(inverse_normal_cdf(-0.3), contract_error);
}

TEST_CASE("single gaussian em lands on the closed form") {
    SECTION("two-point fixture") {
        const auto fit = detail::fit_single_gaussian_em({0.6, 1.0});
        CHECK(fit.mu == Catch::Approx(0.8).margin(1e-12));
        CHECK(fit.sigma == Catch::Approx(0.2).margin(1e-12));
        CHECK(fit.iterations <= 5);
    }
    SECTION("random scores against the two-pass oracle") {
        rng gen(77);
        std::vector<double> scores(1000);
        for (auto& s : scores) s = gen.uniform();
        const auto fit = detail::fit_single_gaussian_em(scores);
        double mean = 0.0;
        for (double s : scores) mean += s;
        mean /= static_cast<double>(scores.size());
        double var = 0.0;
        for (double s : scores) var += (s - mean) * (s - mean);
        var /= static_cast<double>(scores.size());
        CHECK(fit.mu == Catch::Approx(mean).margin(1e-10));
        CHECK(fit.sigma == Catch::Approx(std::sqrt(var)).margin(1e-10));
        CHECK(fit.iterations <= 5);
    }
    SECTION("fewer than two scores") {
        CHECK_THROWS_AS(detail::fit_single_gaussian_em({0.5}), contract_error);
    }
}

TEST_CASE("confidence model floors degenerate sigma") {
    const auto model = fit_confidence_model({{0.8, 0.8, 0.8}, {0.6, 1.0}});
    REQUIRE(model.classes() == 2);
    CHECK(model.mu[0] == Catch::Approx(0.8).margin(1e-12));
    CHECK(model.sigma[0] == sigma_floor);
    CHECK(model.mu[1] == Catch::Approx(0.8).margin(1e-12));
    CHECK(model.sigma[1] == Catch::Approx(0.2).margin(1e-12));
    CHECK(model.alpha_conf == 0.90);
}

TEST_CASE("confidence model rejects bad input") {
    CHECK_THROWS_WITH(fit_confidence_model({{0.6, 1.0}, {0.5}}),
                      Catch::Matchers::ContainsSubstring("class 1"));
    CHECK_THROWS_AS(fit_confidence_model({{0.6, 1.0}}, 0.0), config_error);
    CHECK_THROWS_AS(fit_confidence_model({{0.6, 1.0}}, 1.0), config_error);
}

TEST_CASE("acceptance cut in quantile and absolute modes") {
    confidence_model model;
    model.mu = {0.8, 0.5};
    model.sigma = {0.05, 0.1};
    model.alpha_conf = 0.90;

    const double z90 = 1.2815515655446004;
    CHECK(acceptance_cut(model, 0, threshold_mode::quantile) ==
          Catch::Approx(0.8 + z90 * 0.05).margin(1e-9));
    CHECK(acceptance_cut(model, 1, threshold_mode::quantile) ==
          Catch::Approx(0.5 + z90 * 0.1).margin(1e-9));
    CHECK(acceptance_cut(model, 0, threshold_mode::absolute) == 0.90);
    CHECK(acceptance_cut(model, 1, threshold_mode::absolute) == 0.90);
    CHECK_THROWS_AS(acceptance_cut(model, 2, threshold_mode::quantile),
                    contract_error);
    CHECK_THROWS_AS(acceptance_cut(model, -1, threshold_mode::absolute),
                    contract_error);
}

TEST_CASE("filter keeps input order and respects the cut") {
    confidence_model model;
    model.mu = {0.0};
    model.sigma = {sigma_floor};
    model.alpha_conf = 0.5;  // absolute mode: cut at exactly 0.5

    const std::vector<double> conf = {0.6, 0.4, 0.5, 0.7, 0.1};
    const auto accepted = filter_samples(conf, model, 0, threshold_mode::absolute);
    // >= comparison: the sample sitting exactly on the cut is accepted.
    CHECK(accepted == std::vector<std::size_t>{0, 2, 3});

    CHECK_THROWS_AS(filter_samples({0.5, 1.5}, model, 0, threshold_mode::absolute),
                    contract_error);
    CHECK_THROWS_AS(filter_samples({-0.1}, model, 0, threshold_mode::absolute),
                    contract_error);
    CHECK(filter_samples({}, model, 0, threshold_mode::absolute).empty());
}

TEST_CASE("raising the acceptance level never re-admits a sample") {
    rng gen(41);
    std::vector<double> conf(200);
    for (auto& c : conf) c = gen.uniform();
    std::vector<std::vector<double>> scores(1);
    scores[0].resize(500);
    for (auto& s : scores[0]) s = 0.5 + 0.08 * gen.normal();

    for (auto mode : {threshold_mode::quantile, threshold_mode::absolute}) {
        std::vector<std::size_t> prev;
        bool have_prev = false;
        for (double alpha : {0.05, 0.2, 0.5, 0.8, 0.95}) {
            const auto model = fit_confidence_model(scores, alpha);
            const auto accepted = filter_samples(conf, model, 0, mode);
            if (have_prev)
                CHECK(std::includes(prev.begin(), prev.end(), accepted.begin(),
                                    accepted.end()));
            prev = accepted;
            have_prev = true;
        }
    }
}

TEST_CASE("monte carlo acceptance rate matches the normal tail") {
    rng gen(2026);
    const double mu = 0.7, sd = 0.05, alpha = 0.90;
    std::vector<std::vector<double>> scores(1);
    scores[0].resize(1000);
    for (auto& s : scores[0]) s = mu + sd * gen.normal();
    const auto model = fit_confidence_model(scores, alpha);

    std::vector<double> fresh(1000);
    for (auto& c : fresh) c = mu + sd * gen.normal();
    const auto accepted = filter_samples(fresh, model, 0, threshold_mode::quantile);
    const double rate =
        static_cast<double>(accepted.size()) / static_cast<double>(fresh.size());
    CHECK(rate == Catch::Approx(1.0 - alpha).margin(0.05));
}

TEST_CASE("additions needed to reach the majority class") {
    CHECK(additions_for({700, 387, 224}) == std::array<int, num_classes>{0, 313, 476});
    CHECK(additions_for({1448, 190, 42}) ==
          std::array<int, num_classes>{0, 1258, 1406});
    CHECK(additions_for({5, 5, 5}) == std::array<int, num_classes>{0, 0, 0});
}

TEST_CASE("balance tops classes up to the majority") {
    const auto real = manifest_with_counts({4, 2, 1});

    std::array<std::vector<scored_entry>, num_classes> pools;
    pools[1] = {make_scored("gen_b0.pgm", 1, 0.5), make_scored("gen_b1.pgm", 1, 0.9),
                make_scored("gen_b2.pgm", 1, 0.7)};
    pools[2] = {make_scored("gen_c0.pgm", 2, 0.8), make_scored("gen_c1.pgm", 2, 0.8),
                make_scored("gen_c2.pgm", 2, 0.95), make_scored("gen_c3.pgm", 2, 0.1)};

    balance_report report;
    const auto balanced = balance_dataset(real, pools, &report);

    CHECK(report.before == std::array<int, num_classes>{4, 2, 1});
    CHECK(report.added == std::array<int, num_classes>{0, 2, 3});
    CHECK(balanced.counts() == std::array<int, num_classes>{4, 4, 4});
    CHECK(balanced.root == real.root);

    // Real entries come first, untouched and in order.
    const auto got = paths_of(balanced);
    REQUIRE(got.size() == real.entries.size() + 5);
    for (std::size_t i = 0; i < real.entries.size(); ++i)
        CHECK(got[i] == real.entries[i].path);

    // Synthetic picks follow confidence-descending order; ties keep pool order.
    const std::vector<std::string> want_tail = {"gen_b1.pgm", "gen_b2.pgm",
                                                "gen_c2.pgm", "gen_c0.pgm",
                                                "gen_c1.pgm"};
    const std::vector<std::string> tail(got.end() - 5, got.end());
    CHECK(tail == want_tail);

    // Every real path appears exactly once.
    for (const auto& e : real.entries)
        CHECK(std::count(got.begin(), got.end(), e.path) == 1);
}

TEST_CASE("already balanced input passes through unchanged") {
    const auto real = manifest_with_counts({2, 2, 2});
    std::array<std::vector<scored_entry>, num_classes> pools;
    pools[0] = {make_scored("g0.pgm", 0, 0.9)};

    balance_report report;
    const auto out = balance_dataset(real, pools, &report);
    CHECK(report.added == std::array<int, num_classes>{0, 0, 0});
    CHECK(paths_of(out) == paths_of(real));
}

TEST_CASE("pool shortfall reports per-class deficits") {
    const auto real = manifest_with_counts({4, 2, 1});
    std::array<std::vector<scored_entry>, num_classes> pools;
    pools[1] = {make_scored("gen_b0.pgm", 1, 0.5)};  // need 2, have 1

    try {
        balance_dataset(real, pools);
        FAIL("expected shortfall_error");
    } catch (const shortfall_error& e) {
        CHECK(e.deficit() == std::array<int, num_classes>{0, 1, 3});
        const std::string msg = e.what();
        CHECK(msg.find("class 1 short by 1") != std::string::npos);
        CHECK(msg.find("class 2 short by 3") != std::string::npos);
    }
}

TEST_CASE("pooled samples must carry their class label") {
    const auto real = manifest_with_counts({2, 1, 2});
    std::array<std::vector<scored_entry>, num_classes> pools;
    pools[1] = {make_scored("gen_wrong.pgm", 2, 0.9)};
    CHECK_THROWS_AS(balance_dataset(real, pools), contract_error);
}

TEST_CASE("augmentation comparison deltas and validation") {
    eval_metrics base;
    base.accuracy = 0.750;
    base.macro_f1 = 0.75;
    eval_metrics aug;
    aug.accuracy = 0.802;
    aug.macro_f1 = 0.80;

    const auto cmp =
        evaluate_augmentation("profile_a", base, aug, "test_a:540", "test_a:540", 540);
    CHECK(cmp.accuracy_delta() == Catch::Approx(0.052).margin(1e-12));
    CHECK(cmp.macro_f1_delta() == Catch::Approx(0.05).margin(1e-12));

    const auto same =
        evaluate_augmentation("profile_a", base, base, "test_a:540", "test_a:540", 540);
    CHECK(same.accuracy_delta() == 0.0);
    CHECK(same.macro_f1_delta() == 0.0);

    CHECK_THROWS_AS(evaluate_augmentation("profile_a", base, aug, "test_a:540",
                                          "test_b:540", 540),
                    contract_error);
    CHECK_THROWS_AS(
        evaluate_augmentation("profile_a", base, aug, "test_a:540", "test_a:540", 0),
        contract_error);
}

TEST_CASE("comparison table renders fixed-precision rows") {
    CHECK(format_accuracy_percent(0.750) == "75.0");
    CHECK(format_accuracy_percent(0.802) == "80.2");
    CHECK(format_accuracy_percent(0.567) == "56.7");
    CHECK(format_macro_f1(0.53) == "0.53");
    CHECK(format_macro_f1(0.80) == "0.80");

    auto metrics = [](double acc, double f1) {
        eval_metrics m;
        m.accuracy = acc;
        m.macro_f1 = f1;
        return m;
    };
    const std::vector<augmentation_comparison> rows = {
        evaluate_augmentation("profile_a", metrics(0.750, 0.75), metrics(0.802, 0.80),
                              "ta", "ta", 540),
        evaluate_augmentation("profile_b", metrics(0.738, 0.74), metrics(0.780, 0.79),
                              "tb", "tb", 450),
        evaluate_augmentation("profile_c", metrics(0.567, 0.53), metrics(0.717, 0.71),
                              "tc", "tc", 120),
    };
    const std::string want =
        "dataset,augmentation,accuracy_pct,macro_f1,test_samples\n"
        "profile_a,baseline,75.0,0.75,540\n"
        "profile_a,augmented,80.2,0.80,540\n"
        "profile_b,baseline,73.8,0.74,450\n"
        "profile_b,augmented,78.0,0.79,450\n"
        "profile_c,baseline,56.7,0.53,120\n"
        "profile_c,augmented,71.7,0.71,120\n";
    CHECK(augmentation_rows_csv(rows) == want);
}

#pragma once

#include <algorithm>
#include <array>
#include <cstdio>
#include <numeric>
#include <string>
#include <vector>

#include "tilegan/common.hpp"
#include "tilegan/dataset.hpp"
#include "tilegan/surrogate.hpp"

namespace tilegan {

// Synthetic samples needed to raise every class to the majority count.
inline std::array<int, num_classes> additions_for(
    const std::array<int, num_classes>& counts) {
    const int top = *std::max_element(counts.begin(), counts.end());
    std::array<int, num_classes> add{};
    for (std::size_t c = 0; c < counts.size(); ++c) add[c] = top - counts[c];
    return add;
}

struct scored_entry {
    manifest_entry entry;
    double confidence = 0.0;
};

class shortfall_error : public config_error {
public:
    shortfall_error(std::string msg, std::array<int, num_classes> deficit)
        : config_error(std::move(msg)), deficit_(deficit) {}

    const std::array<int, num_classes>& deficit() const { return deficit_; }

private:
    std::array<int, num_classes> deficit_;
};

struct balance_report {
    std::array<int, num_classes> before{};
    std::array<int, num_classes> added{};
};

// Top every class up to the majority count using accepted synthetic samples,
// taken in (confidence desc, pool position asc) order. Real entries are kept
// untouched and first; a balanced input therefore passes through unchanged.
inline dataset_manifest balance_dataset(
    const dataset_manifest& real,
    const std::array<std::vector<scored_entry>, num_classes>& accepted_pools,
    balance_report* report = nullptr) {
    const auto counts = real.counts();
    const auto need = additions_for(counts);

    std::array<int, num_classes> deficit{};
    bool short_somewhere = false;
    for (std::size_t c = 0; c < need.size(); ++c) {
        const int have = static_cast<int>(accepted_pools[c].size());
        if (have < need[c]) {
            deficit[c] = need[c] - have;
            short_somewhere = true;
        }
    }
    if (short_somewhere) {
        std::string msg = "balance_dataset: accepted pool shortfall:";
        for (std::size_t c = 0; c < deficit.size(); ++c)
            if (deficit[c] > 0)
                msg += " class " + std::to_string(c) + " short by " +
                       std::to_string(deficit[c]) + ";";
        throw shortfall_error(msg, deficit);
    }

    dataset_manifest out;
    out.root = real.root;
    out.entries = real.entries;
    for (std::size_t c = 0; c < need.size(); ++c) {
        const auto& pool = accepted_pools[c];
        std::vector<std::size_t> order(pool.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t i, std::size_t j) {
                             return pool[i].confidence > pool[j].confidence;
                         });
        for (int k = 0; k < need[c]; ++k) {
            const auto& chosen = pool[order[static_cast<std::size_t>(k)]];
            require(chosen.entry.label == static_cast<int>(c),
                    "balance_dataset: pooled sample labeled for a different class");
            out.entries.push_back(chosen.entry);
        }
    }
    if (report != nullptr) {
        report->before = counts;
        report->added = need;
    }
    return out;
}

namespace detail {

inline std::string fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

}  // namespace detail

// Accuracy is carried as a fraction; rendered as a one-decimal percentage.
inline std::string format_accuracy_percent(double accuracy) {
    return detail::fixed(accuracy * 100.0, 1);
}

inline std::string format_macro_f1(double macro_f1) {
    return detail::fixed(macro_f1, 2);
}

struct augmentation_comparison {
    std::string dataset;
    eval_metrics baseline;
    eval_metrics augmented;
    int test_samples = 0;

    double accuracy_delta() const {
        return augmented.accuracy - baseline.accuracy;
    }
    double macro_f1_delta() const {
        return augmented.macro_f1 - baseline.macro_f1;
    }
};

// Both metric sets must come from the same held-out split; the caller passes
// whatever identifies that split (path + size works).
inline augmentation_comparison evaluate_augmentation(
    const std::string& dataset, const eval_metrics& baseline,
    const eval_metrics& augmented, const std::string& baseline_test_id,
    const std::string& augmented_test_id, int test_samples) {
    if (baseline_test_id != augmented_test_id)
        throw contract_error(
            "evaluate_augmentation: baseline and augmented metrics come from "
            "different test splits (" +
            baseline_test_id + " vs " + augmented_test_id + ")");
    require(test_samples > 0, "evaluate_augmentation: empty test split");
    augmentation_comparison cmp;
    cmp.dataset = dataset;
    cmp.baseline = baseline;
    cmp.augmented = augmented;
    cmp.test_samples = test_samples;
    return cmp;
}

// Two CSV rows per comparison: baseline then augmented, with percentage
// accuracy to one decimal and macro-F1 to two.
inline std::string augmentation_rows_csv(
    const std::vector<augmentation_comparison>& comparisons) {
    std::string out = "dataset,augmentation,accuracy_pct,macro_f1,test_samples\n";
    for (const auto& cmp : comparisons) {
        out += cmp.dataset + ",baseline," +
               format_accuracy_percent(cmp.baseline.accuracy) + "," +
               format_macro_f1(cmp.baseline.macro_f1) + "," +
               std::to_string(cmp.test_samples) + "\n";
        out += cmp.dataset + ",augmented," +
               format_accuracy_percent(cmp.augmented.accuracy) + "," +
               format_macro_f1(cmp.augmented.macro_f1) + "," +
               std::to_string(cmp.test_samples) + "\n";
    }
    return out;
}

}  // namespace tilegan

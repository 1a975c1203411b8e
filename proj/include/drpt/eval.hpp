#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "drpt/dataset.hpp"
#include "drpt/pipeline.hpp"

namespace drpt {

enum class Classifier { knn, centroid };

struct EvalResult {
    std::vector<double> accuracy_curve;  // index t-1 holds accuracy with t features
    std::size_t best_t = 0;              // smallest argmax
    double best_accuracy = 0.0;
    std::string classifier;
    std::uint64_t split_seed = 0;
    std::vector<std::string> warnings;

    std::string to_json() const;
};

struct StabilityRun {
    std::uint64_t seed = 0;
    std::vector<std::string> selected;  // ranked feature names
    double best_accuracy = 0.0;
};

struct StabilityResult {
    std::size_t runs = 0;
    double mean_selected = 0.0;
    double sd_selected = 0.0;
    double mean_accuracy = 0.0;
    double sd_accuracy = 0.0;
    double mean_jaccard = 0.0;  // pairwise, over selected name sets
    std::vector<StabilityRun> run_records;

    std::string to_json() const;
};

struct EvalOptions {
    Classifier classifier = Classifier::knn;
    std::size_t knn_k = 5;
    double train_fraction = 0.7;
};

std::vector<double> knn_classify(const Dataset& train, const Dataset& test,
                                 std::size_t k_neighbors);

std::vector<double> nearest_centroid_classify(const Dataset& train, const Dataset& test);

EvalResult prefix_accuracy(const Dataset& d, const SelectionReport& report,
                           const SplitPlan& split, const EvalOptions& opts,
                           std::size_t k);

// Repeated row-shuffled pipeline runs (run r uses seed cfg.seed + r); the
// evaluation split is derived once from the unshuffled data and mapped
// through each run's shuffle so accuracy differences reflect the selector,
// not test-set resampling.
StabilityResult stability_study(const Dataset& d, const DrptConfig& cfg,
                                std::size_t runs, const EvalOptions& opts);

}  // namespace drpt

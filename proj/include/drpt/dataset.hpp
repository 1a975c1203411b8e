#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "drpt/matrix.hpp"

namespace drpt {

// Feature matrix plus labels. b holds class codes (0..C-1) for datasets
// loaded from CSV, or continuous values for synthetic regression-style
// label vectors.
struct Dataset {
    Matrix a;                               // m samples x n features
    std::vector<double> b;                  // length m
    std::vector<std::string> feature_names; // length n
    std::vector<std::string> class_labels;  // original label values, by class code

    std::size_t samples() const { return a.rows(); }
    std::size_t features() const { return a.cols(); }
    bool has_missing() const { return a.has_non_finite(); }
};

struct SplitPlan {
    std::vector<std::size_t> train_rows;
    std::vector<std::size_t> test_rows;
    std::uint64_t seed = 0;
    double train_fraction = 0.0;
};

struct NormalizationRecord {
    std::vector<double> min;       // per-feature minimum (min-max stage)
    std::vector<double> max;       // per-feature maximum (min-max stage)
    std::vector<double> norm;      // per-feature 2-norm divided out (unit-norm stage)
    std::vector<bool> constant;    // columns mapped to zero by a degenerate stage
    bool min_max_applied = false;
    bool unit_norm_applied = false;
};

struct NormalizeOptions {
    bool min_max = true;
    bool unit_norm = true;
};

// label_column: a feature name, a zero-based index, or "last".
Dataset load_csv(const std::string& path, const std::string& label_column,
                 bool has_header);

Dataset knn_impute(const Dataset& d, std::size_t k);

std::pair<Dataset, NormalizationRecord> normalize(const Dataset& d,
                                                  const NormalizeOptions& opts = {});

SplitPlan stratified_split(const Dataset& d, double train_fraction, std::uint64_t seed);

Dataset permute_rows(const Dataset& d, const std::vector<std::size_t>& perm);
Dataset permute_cols(const Dataset& d, const std::vector<std::size_t>& perm);

Dataset take_rows(const Dataset& d, const std::vector<std::size_t>& rows);

// FNV-1a over the dataset contents; part of the report fingerprint.
std::uint64_t content_hash(const Dataset& d);

void write_csv(const Dataset& d, const std::string& path,
               const std::string& label_name = "label");

}  // namespace drpt

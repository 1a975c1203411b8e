#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "drpt/dataset.hpp"

namespace drpt {

// A linear combination of existing columns: sum of coeff * column(index).
struct LinearTerm {
    double coeff = 0.0;
    std::size_t source = 0;
};

struct PlantedDependency {
    std::size_t target = 0;  // column index, must lie outside the independent block
    std::vector<LinearTerm> combination;
};

struct PlantedSpec {
    std::size_t m = 0;
    std::size_t n_independent = 0;
    std::vector<PlantedDependency> dependencies;
    std::vector<LinearTerm> label_combination;
    double low = -1.0;
    double high = 1.0;
    std::uint64_t seed = 0;

    void validate() const;
    std::size_t total_features() const { return n_independent + dependencies.size(); }
};

// The 100x22 worked example: F1..F20 uniform(-1,1), F21 = 2*F18 + 4*F19,
// F22 = 3*F20, b = 3*F19 + 5*F17 + 2*F20 (b kept continuous).
Dataset paper_synthetic(std::uint64_t seed);

Dataset planted(const PlantedSpec& spec);

// Parse a PlantedSpec from its JSON sidecar form:
// {m, n_independent, dependencies:[{target, combination:[[coeff, source],...]}],
//  label_combination:[[coeff, source],...], low, high, seed}.
PlantedSpec parse_planted_spec(const std::string& json_text);

// Replace continuous labels by 0/1 around their median (upper half -> 1),
// for feeding classifier-based evaluation.
Dataset binarize_labels(const Dataset& d);

}  // namespace drpt

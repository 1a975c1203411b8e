#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "drpt/dataset.hpp"
#include "drpt/matrix.hpp"

namespace drpt {

// Tunables for the selection pipeline. entropy_bins = 0 means automatic
// (ceil(sqrt(m))). min_max_stage controls whether the [0,1] rescaling
// stage runs before unit-norm when the pipeline normalizes its input;
// off by default because the perturbation analysis only needs unit
// columns and the offset introduced by min-max shifts weight onto every
// feature (see README).
struct DrptConfig {
    int s = 3;
    std::size_t smooth_window = 7;
    std::size_t smooth_order = 2;
    std::size_t entropy_bins = 0;
    double cluster_epsilon = 1e-6;
    std::uint64_t seed = 0;
    std::size_t k = 50;
    bool rescale_e_to_spectral = true;
    bool min_max_stage = false;

    void validate() const;
    std::size_t resolve_bins(std::size_t m) const;
};

struct RelevanceFilterResult {
    std::vector<std::size_t> kept;  // indices with |x_i| >= threshold
    double threshold = 0.0;
    std::vector<double> weights;    // |x_i| for all columns
};

struct PerturbationResult {
    std::vector<double> x;        // A+ b
    std::vector<double> x_tilde;  // (A+E)+ b
    std::vector<double> delta_x;  // |x - x_tilde|
    double e_spectral_norm = 0.0;
    double sigma_min = 0.0;
};

struct SubCluster {
    std::vector<std::size_t> members;  // feature indices
    std::size_t representative = 0;
    double entropy = 0.0;
};

struct Cluster {
    std::vector<std::size_t> members;  // feature indices, ascending delta_x
    std::vector<SubCluster> sub_clusters;
};

struct ClusterTree {
    std::vector<Cluster> clusters;
};

struct RankedFeature {
    std::string name;
    std::size_t index = 0;  // position in the original dataset
    double weight = 0.0;    // |x_i| on the reduced matrix
    double delta_x = 0.0;
    double entropy = 0.0;
    std::size_t cluster = 0;
    std::size_t subcluster = 0;
    std::size_t rank = 0;
};

struct DatasetFingerprint {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::uint64_t hash = 0;
    std::string generator;  // RNG algorithm name used for E
};

struct SelectionReport {
    DrptConfig config;
    DatasetFingerprint dataset_fingerprint;
    double threshold = 0.0;
    std::vector<RankedFeature> features;
    bool truncated = false;  // requested k exceeded available representatives

    std::string to_json() const;
};

// Part 1: x = A+ b, threshold = mean of the local maxima of |x|,
// keep everything at or above it. a must be column-normalized.
RelevanceFilterResult relevance_filter(const Matrix& a, const std::vector<double>& b);

// Part 2: perturb A by a seeded random E with spectral norm 10^-s * sigma_min
// and record the per-feature solution shift.
PerturbationResult perturb_and_diff(const Matrix& a, const std::vector<double>& b,
                                    const DrptConfig& cfg);

// Savitzky-Golay smoothing of the ascending delta_x sequence; edge windows
// are truncated. The result is re-sorted ascending.
std::vector<double> smooth_delta(const std::vector<double>& delta_x_sorted,
                                 const DrptConfig& cfg);

// Split the sorted, smoothed sequence into plateau clusters at gaps larger
// than cluster_epsilon * range. Returns position groups.
std::vector<std::vector<std::size_t>> cluster_delta(const std::vector<double>& smoothed,
                                                    const DrptConfig& cfg);

// Shannon entropy of a column after equal-width binning.
double entropy(const std::vector<double>& feature_column, std::size_t bins);

// Part 3: group a cluster's members by (quantized) entropy; each group's
// representative is the member with maximal |x|, ties to the smaller index.
// `entropies` and `weights` are indexed by feature index.
std::vector<SubCluster> subcluster_and_pick(const std::vector<std::size_t>& cluster,
                                            const std::vector<double>& entropies,
                                            const std::vector<double>& weights);

// Amalgamated ranking: rank-sum of the entropy rank and the weight rank.
// Fills rank fields and orders/truncates the entries to k.
void rank_selected(std::vector<RankedFeature>& representatives, std::size_t k,
                   bool& truncated);

SelectionReport run_pipeline(const Dataset& d, const DrptConfig& cfg);

}  // namespace drpt

#include "drpt/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>

#include <nlohmann/json.hpp>

#include "drpt/rng.hpp"
#include "drpt/synth.hpp"

namespace drpt {

namespace {

double euclidean(const Matrix& a, std::size_t i, const Matrix& b, std::size_t j) {
    double s = 0.0;
    for (std::size_t c = 0; c < a.cols(); ++c) {
        const double d = a.at(i, c) - b.at(j, c);
        s += d * d;
    }
    return std::sqrt(s);
}

double accuracy(const std::vector<double>& predicted, const std::vector<double>& truth) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (predicted[i] == truth[i]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(truth.size());
}

std::pair<double, double> mean_sd(const std::vector<double>& v) {
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / v.size())};
}

Dataset restrict_features(const Dataset& d, const std::vector<std::size_t>& cols) {
    Dataset out;
    out.b = d.b;
    out.class_labels = d.class_labels;
    out.a = Matrix(d.samples(), cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j) {
        out.feature_names.push_back(d.feature_names[cols[j]]);
        for (std::size_t i = 0; i < d.samples(); ++i) {
            out.a.at(i, j) = d.a.at(i, cols[j]);
        }
    }
    return out;
}

}  // namespace

std::vector<double> knn_classify(const Dataset& train, const Dataset& test,
                                 std::size_t k_neighbors) {
    if (train.samples() == 0) throw ValidationError("knn_classify: empty training set");
    if (k_neighbors == 0 || k_neighbors > train.samples()) {
        throw ValidationError("knn_classify: k_neighbors must be in [1, train size]");
    }
    if (train.features() != test.features()) {
        throw ShapeError("knn_classify: feature count mismatch");
    }

    std::vector<double> out(test.samples());
    for (std::size_t i = 0; i < test.samples(); ++i) {
        std::vector<std::pair<double, std::size_t>> dist(train.samples());
        for (std::size_t r = 0; r < train.samples(); ++r) {
            dist[r] = {euclidean(test.a, i, train.a, r), r};
        }
        // Distance ties resolve to the lower train-row index.
        std::partial_sort(dist.begin(), dist.begin() + k_neighbors, dist.end());
        std::map<double, std::size_t> votes;
        for (std::size_t t = 0; t < k_neighbors; ++t) votes[train.b[dist[t].second]]++;
        double best = votes.begin()->first;
        for (const auto& [label, count] : votes) {
            // Vote ties resolve to the smaller class code (map iteration order).
            if (count > votes[best]) best = label;
        }
        out[i] = best;
    }
    return out;
}

std::vector<double> nearest_centroid_classify(const Dataset& train, const Dataset& test) {
    if (train.samples() == 0) {
        throw ValidationError("nearest_centroid_classify: empty training set");
    }
    if (train.features() != test.features()) {
        throw ShapeError("nearest_centroid_classify: feature count mismatch");
    }
    std::map<double, std::pair<std::vector<double>, std::size_t>> centroids;
    for (std::size_t i = 0; i < train.samples(); ++i) {
        auto& [sum, count] = centroids[train.b[i]];
        sum.resize(train.features(), 0.0);
        for (std::size_t j = 0; j < train.features(); ++j) sum[j] += train.a.at(i, j);
        ++count;
    }
    for (auto& [label, c] : centroids) {
        for (double& v : c.first) v /= static_cast<double>(c.second);
    }

    std::vector<double> out(test.samples());
    for (std::size_t i = 0; i < test.samples(); ++i) {
        double best_d = std::numeric_limits<double>::infinity();
        double best = centroids.begin()->first;
        for (const auto& [label, c] : centroids) {
            double s = 0.0;
            for (std::size_t j = 0; j < test.features(); ++j) {
                const double d = test.a.at(i, j) - c.first[j];
                s += d * d;
            }
            // Strict < keeps the smaller class code on ties.
            if (s < best_d) {
                best_d = s;
                best = label;
            }
        }
        out[i] = best;
    }
    return out;
}

EvalResult prefix_accuracy(const Dataset& d, const SelectionReport& report,
                           const SplitPlan& split, const EvalOptions& opts,
                           std::size_t k) {
    if (report.features.empty()) {
        throw ValidationError("prefix_accuracy: empty selection report");
    }
    std::vector<std::size_t> ranked_cols;
    for (const auto& f : report.features) {
        if (f.index >= d.features() || d.feature_names[f.index] != f.name) {
            throw ValidationError("prefix_accuracy: report feature '" + f.name +
                                  "' not found in dataset");
        }
        ranked_cols.push_back(f.index);
    }

    EvalResult res;
    res.classifier = opts.classifier == Classifier::knn ? "knn" : "centroid";
    res.split_seed = split.seed;

    const Dataset test_full = take_rows(d, split.test_rows);
    const Dataset train_full = take_rows(d, split.train_rows);
    {
        std::set<double> train_classes(train_full.b.begin(), train_full.b.end());
        for (double c : test_full.b) {
            if (!train_classes.count(c)) {
                res.warnings.push_back("class " + std::to_string(c) +
                                       " appears only in the test rows");
                break;
            }
        }
    }

    const std::size_t kmax = std::min(k, ranked_cols.size());
    for (std::size_t t = 1; t <= kmax; ++t) {
        const std::vector<std::size_t> cols(ranked_cols.begin(), ranked_cols.begin() + t);
        const Dataset train = restrict_features(train_full, cols);
        const Dataset test = restrict_features(test_full, cols);
        const std::vector<double> pred =
            opts.classifier == Classifier::knn
                ? knn_classify(train, test, std::min(opts.knn_k, train.samples()))
                : nearest_centroid_classify(train, test);
        res.accuracy_curve.push_back(accuracy(pred, test.b));
    }
    res.best_t = 1 + static_cast<std::size_t>(
                         std::max_element(res.accuracy_curve.begin(),
                                          res.accuracy_curve.end()) -
                         res.accuracy_curve.begin());
    res.best_accuracy = res.accuracy_curve[res.best_t - 1];
    return res;
}

StabilityResult stability_study(const Dataset& d, const DrptConfig& cfg,
                                std::size_t runs, const EvalOptions& opts) {
    if (runs < 2) throw ValidationError("stability_study: need at least 2 runs");

    // Continuous labels cannot be stratified or classified; binarize at the
    // median in that case.
    std::set<double> classes(d.b.begin(), d.b.end());
    const Dataset base = classes.size() > 10 ? binarize_labels(d) : d;

    // One split, derived on the unshuffled rows, reused by every run.
    const SplitPlan split = stratified_split(base, opts.train_fraction, cfg.seed);

    StabilityResult res;
    res.runs = runs;
    std::vector<double> sizes, accs;
    for (std::size_t r = 0; r < runs; ++r) {
        const std::uint64_t run_seed = cfg.seed + r;
        std::vector<std::size_t> perm(base.samples());
        std::iota(perm.begin(), perm.end(), 0);
        Rng rng(run_seed);
        for (std::size_t i = perm.size() - 1; i > 0; --i) {
            std::swap(perm[i], perm[rng.next_u64() % (i + 1)]);
        }
        const Dataset shuffled = permute_rows(base, perm);

        DrptConfig run_cfg = cfg;
        run_cfg.seed = run_seed;
        const SelectionReport report = run_pipeline(shuffled, run_cfg);

        // Map the frozen split through the shuffle: shuffled row i holds
        // original row perm[i].
        std::vector<std::size_t> where(base.samples());
        for (std::size_t i = 0; i < perm.size(); ++i) where[perm[i]] = i;
        SplitPlan run_split = split;
        for (auto& row : run_split.train_rows) row = where[row];
        for (auto& row : run_split.test_rows) row = where[row];

        const EvalResult ev = prefix_accuracy(shuffled, report, run_split, opts, cfg.k);

        StabilityRun rec;
        rec.seed = run_seed;
        for (const auto& f : report.features) rec.selected.push_back(f.name);
        rec.best_accuracy = ev.best_accuracy;
        sizes.push_back(static_cast<double>(rec.selected.size()));
        accs.push_back(rec.best_accuracy);
        res.run_records.push_back(std::move(rec));
    }

    std::tie(res.mean_selected, res.sd_selected) = mean_sd(sizes);
    std::tie(res.mean_accuracy, res.sd_accuracy) = mean_sd(accs);

    double jac_sum = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < runs; ++i) {
        const std::set<std::string> si(res.run_records[i].selected.begin(),
                                       res.run_records[i].selected.end());
        for (std::size_t j = i + 1; j < runs; ++j) {
            const std::set<std::string> sj(res.run_records[j].selected.begin(),
                                           res.run_records[j].selected.end());
            std::size_t inter = 0;
            for (const auto& name : si) inter += sj.count(name);
            const std::size_t uni = si.size() + sj.size() - inter;
            jac_sum += uni == 0 ? 1.0 : static_cast<double>(inter) / uni;
            ++pairs;
        }
    }
    res.mean_jaccard = jac_sum / static_cast<double>(pairs);
    return res;
}

std::string EvalResult::to_json() const {
    nlohmann::ordered_json j;
    j["classifier"] = classifier;
    j["split_seed"] = split_seed;
    j["accuracy_curve"] = accuracy_curve;
    j["best_t"] = best_t;
    j["best_accuracy"] = best_accuracy;
    if (!warnings.empty()) j["warnings"] = warnings;
    return j.dump(2) + "\n";
}

std::string StabilityResult::to_json() const {
    nlohmann::ordered_json j;
    j["runs"] = runs;
    j["mean_selected"] = mean_selected;
    j["sd_selected"] = sd_selected;
    j["mean_accuracy"] = mean_accuracy;
    j["sd_accuracy"] = sd_accuracy;
    j["mean_jaccard"] = mean_jaccard;
    j["run_records"] = nlohmann::ordered_json::array();
    for (const auto& r : run_records) {
        j["run_records"].push_back({{"seed", r.seed},
                                    {"selected", r.selected},
                                    {"best_accuracy", r.best_accuracy}});
    }
    return j.dump(2) + "\n";
}

}  // namespace drpt

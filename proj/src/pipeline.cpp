#include "drpt/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "drpt/linalg.hpp"
#include "drpt/rng.hpp"

namespace drpt {

namespace {

// Weights at roundoff level are snapped to zero before local-maxima
// detection; otherwise the threshold depends on how many noise-level
// entries happen to poke above their neighbors, which varies under row
// permutation even though the solution is mathematically unchanged.
constexpr double kWeightSnap = 1e-10;

void require_full_row_rank(const RankInfo& info, std::size_t m, std::size_t n,
                           const char* who) {
    if (m <= n && info.numerical_rank < m) {
        throw RankError(std::string(who) + ": matrix has numerical rank " +
                        std::to_string(info.numerical_rank) + " < " + std::to_string(m) +
                        " rows; drop duplicate rows and retry");
    }
}

// First indices of plateaus that are >= both neighbors.
std::vector<std::size_t> local_maxima(const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> out;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[j + 1] == v[i]) ++j;
        const bool left_ok = (i == 0) || v[i - 1] <= v[i];
        const bool right_ok = (j == n - 1) || v[j + 1] <= v[i];
        if (left_ok && right_ok) out.push_back(i);
        i = j + 1;
    }
    return out;
}

// Small dense solve for the smoothing stencils (partial pivoting).
std::vector<double> solve_small(std::vector<std::vector<double>> m,
                                std::vector<double> rhs) {
    const std::size_t n = rhs.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r) {
            if (std::fabs(m[r][c]) > std::fabs(m[piv][c])) piv = r;
        }
        std::swap(m[c], m[piv]);
        std::swap(rhs[c], rhs[piv]);
        for (std::size_t r = c + 1; r < n; ++r) {
            const double f = m[r][c] / m[c][c];
            for (std::size_t cc = c; cc < n; ++cc) m[r][cc] -= f * m[c][cc];
            rhs[r] -= f * rhs[c];
        }
    }
    std::vector<double> x(n);
    for (std::size_t ci = n; ci-- > 0;) {
        double s = rhs[ci];
        for (std::size_t cc = ci + 1; cc < n; ++cc) s -= m[ci][cc] * x[cc];
        x[ci] = s / m[ci][ci];
    }
    return x;
}

// Coefficients of the least-squares polynomial fit evaluated at offset 0,
// for window offsets lo..hi (inclusive, relative to the center).
std::vector<double> stencil(long lo, long hi, std::size_t order) {
    const std::size_t w = static_cast<std::size_t>(hi - lo + 1);
    const std::size_t p = std::min(order, w - 1) + 1;
    // Normal equations G c = Vt y with V the offset Vandermonde; the fitted
    // value at 0 is c_0, a linear functional of y.
    std::vector<std::vector<double>> g(p, std::vector<double>(p, 0.0));
    for (std::size_t r = 0; r < p; ++r) {
        for (std::size_t c = 0; c < p; ++c) {
            double s = 0.0;
            for (long t = lo; t <= hi; ++t) {
                s += std::pow(static_cast<double>(t), static_cast<double>(r + c));
            }
            g[r][c] = s;
        }
    }
    std::vector<double> coeffs(w);
    for (std::size_t j = 0; j < w; ++j) {
        std::vector<double> rhs(p);
        const double t = static_cast<double>(lo + static_cast<long>(j));
        for (std::size_t r = 0; r < p; ++r) rhs[r] = std::pow(t, static_cast<double>(r));
        coeffs[j] = solve_small(g, rhs)[0];
    }
    // The fit must reproduce constants; pin the coefficient sum to 1 so
    // roundoff in the solves cannot drift it.
    double sum = 0.0;
    for (double c : coeffs) sum += c;
    for (double& c : coeffs) c /= sum;
    return coeffs;
}

}  // namespace

void DrptConfig::validate() const {
    if (smooth_window % 2 == 0 || smooth_window <= smooth_order) {
        throw ValidationError("smooth_window must be odd and greater than smooth_order");
    }
    if (s < 1) throw ValidationError("s must be >= 1");
    if (k < 1) throw ValidationError("k must be >= 1");
    if (cluster_epsilon < 0) throw ValidationError("cluster_epsilon must be nonnegative");
}

std::size_t DrptConfig::resolve_bins(std::size_t m) const {
    if (entropy_bins > 0) return entropy_bins;
    return static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(m))));
}

RelevanceFilterResult relevance_filter(const Matrix& a, const std::vector<double>& b) {
    if (b.size() != a.rows()) {
        throw ShapeError("relevance_filter: b length " + std::to_string(b.size()) +
                         " != " + std::to_string(a.rows()) + " rows");
    }
    const Svd dec = svd(a);
    const RankInfo info = rank_info(dec, a.rows(), a.cols());
    require_full_row_rank(info, a.rows(), a.cols(), "relevance_filter");
    const std::vector<double> x = pinv_apply(dec, a.rows(), a.cols(), b);

    RelevanceFilterResult res;
    res.weights.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) res.weights[i] = std::fabs(x[i]);

    std::vector<double> snapped = res.weights;
    const double wmax = *std::max_element(snapped.begin(), snapped.end());
    for (double& w : snapped) {
        if (w <= kWeightSnap * wmax) w = 0.0;
    }

    const auto maxima = local_maxima(snapped);
    double sum = 0.0;
    for (std::size_t i : maxima) sum += snapped[i];
    res.threshold = sum / static_cast<double>(maxima.size());

    for (std::size_t i = 0; i < snapped.size(); ++i) {
        if (snapped[i] >= res.threshold) res.kept.push_back(i);
    }
    // The global maximum is itself a local maximum, so it is never below
    // the mean of the maxima.
    if (res.kept.empty()) {
        throw RankError("relevance_filter: empty kept set (unreachable by construction)");
    }
    return res;
}

PerturbationResult perturb_and_diff(const Matrix& a, const std::vector<double>& b,
                                    const DrptConfig& cfg) {
    cfg.validate();
    const Svd dec = svd(a);
    const RankInfo info = rank_info(dec, a.rows(), a.cols());
    require_full_row_rank(info, a.rows(), a.cols(), "perturb_and_diff");

    PerturbationResult res;
    res.sigma_min = info.sigma_min_effective;
    res.x = pinv_apply(dec, a.rows(), a.cols(), b);

    Rng rng(cfg.seed);
    Matrix e(a.rows(), a.cols());
    for (double& v : e.data()) v = rng.next();

    const double t = std::pow(10.0, -cfg.s) * res.sigma_min;
    double scale = t;
    if (cfg.rescale_e_to_spectral) {
        scale = t / spectral_norm(e);
    }
    for (double& v : e.data()) v *= scale;
    res.e_spectral_norm = spectral_norm(e);

    Matrix perturbed = a;
    for (std::size_t i = 0; i < perturbed.data().size(); ++i) {
        perturbed.data()[i] += e.data()[i];
    }
    const Svd dec_p = svd(perturbed);
    const RankInfo info_p = rank_info(dec_p, a.rows(), a.cols());
    if (info_p.numerical_rank < info.numerical_rank) {
        throw PerturbationError(
            "perturb_and_diff: perturbation collapsed the numerical rank from " +
            std::to_string(info.numerical_rank) + " to " +
            std::to_string(info_p.numerical_rank) + "; increase s");
    }
    res.x_tilde = pinv_apply(dec_p, a.rows(), a.cols(), b);

    res.delta_x.resize(res.x.size());
    for (std::size_t i = 0; i < res.x.size(); ++i) {
        res.delta_x[i] = std::fabs(res.x[i] - res.x_tilde[i]);
    }
    return res;
}

std::vector<double> smooth_delta(const std::vector<double>& delta_x_sorted,
                                 const DrptConfig& cfg) {
    cfg.validate();
    const std::size_t n = delta_x_sorted.size();
    if (cfg.smooth_window > n) return delta_x_sorted;

    const long h = static_cast<long>(cfg.smooth_window / 2);
    std::vector<double> out(n);
    std::map<std::pair<long, long>, std::vector<double>> cache;
    for (std::size_t i = 0; i < n; ++i) {
        const long lo = -std::min<long>(h, static_cast<long>(i));
        const long hi = std::min<long>(h, static_cast<long>(n - 1 - i));
        auto it = cache.find({lo, hi});
        if (it == cache.end()) {
            it = cache.emplace(std::make_pair(lo, hi), stencil(lo, hi, cfg.smooth_order))
                     .first;
        }
        const auto& c = it->second;
        // Residual form: with coefficients summing to 1, a constant window
        // passes through exactly.
        const double center = delta_x_sorted[i];
        double s = 0.0;
        for (long j = lo; j <= hi; ++j) {
            s += c[static_cast<std::size_t>(j - lo)] *
                 (delta_x_sorted[static_cast<std::size_t>(static_cast<long>(i) + j)] -
                  center);
        }
        out[i] = center + s;
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::vector<std::size_t>> cluster_delta(const std::vector<double>& smoothed,
                                                    const DrptConfig& cfg) {
    cfg.validate();
    std::vector<std::vector<std::size_t>> clusters;
    if (smoothed.empty()) return clusters;
    const double range = smoothed.back() - smoothed.front();
    std::vector<std::size_t> cur{0};
    for (std::size_t i = 1; i < smoothed.size(); ++i) {
        if (range > 0 && smoothed[i] - smoothed[i - 1] > cfg.cluster_epsilon * range) {
            clusters.push_back(std::move(cur));
            cur.clear();
        }
        cur.push_back(i);
    }
    clusters.push_back(std::move(cur));
    return clusters;
}

double entropy(const std::vector<double>& feature_column, std::size_t bins) {
    if (feature_column.empty() || bins == 0) return 0.0;
    const auto [lo_it, hi_it] =
        std::minmax_element(feature_column.begin(), feature_column.end());
    const double lo = *lo_it, hi = *hi_it;
    if (hi == lo) return 0.0;  // single bin

    std::vector<std::size_t> counts(bins, 0);
    for (double v : feature_column) {
        auto idx = static_cast<std::size_t>((v - lo) / (hi - lo) * static_cast<double>(bins));
        counts[std::min(idx, bins - 1)]++;
    }
    const auto m = static_cast<double>(feature_column.size());
    double h = 0.0;
    for (std::size_t c : counts) {
        if (c == 0) continue;
        const double f = static_cast<double>(c) / m;
        h -= f * std::log(f);
    }
    return h;
}

std::vector<SubCluster> subcluster_and_pick(const std::vector<std::size_t>& cluster,
                                            const std::vector<double>& entropies,
                                            const std::vector<double>& weights) {
    if (cluster.empty()) throw ValidationError("subcluster_and_pick: empty cluster");
    // Quantize entropies so float jitter cannot split a genuine group.
    std::map<long long, SubCluster> groups;
    std::vector<long long> key_order;
    for (std::size_t f : cluster) {
        const auto key = static_cast<long long>(std::llround(entropies[f] / 1e-9));
        auto it = groups.find(key);
        if (it == groups.end()) {
            it = groups.emplace(key, SubCluster{}).first;
            it->second.entropy = entropies[f];
            key_order.push_back(key);
        }
        it->second.members.push_back(f);
    }
    std::vector<SubCluster> out;
    for (long long key : key_order) {
        SubCluster& sc = groups[key];
        sc.representative = sc.members.front();
        for (std::size_t f : sc.members) {
            if (weights[f] > weights[sc.representative]) sc.representative = f;
        }
        out.push_back(std::move(sc));
    }
    return out;
}

void rank_selected(std::vector<RankedFeature>& representatives, std::size_t k,
                   bool& truncated) {
    if (representatives.empty()) {
        throw ValidationError("rank_selected: no representatives");
    }
    const std::size_t n = representatives.size();

    std::vector<std::size_t> by_entropy(n), by_weight(n);
    std::iota(by_entropy.begin(), by_entropy.end(), 0);
    by_weight = by_entropy;
    std::sort(by_entropy.begin(), by_entropy.end(), [&](std::size_t a, std::size_t b) {
        if (representatives[a].entropy != representatives[b].entropy) {
            return representatives[a].entropy > representatives[b].entropy;
        }
        return representatives[a].index < representatives[b].index;
    });
    std::sort(by_weight.begin(), by_weight.end(), [&](std::size_t a, std::size_t b) {
        if (representatives[a].weight != representatives[b].weight) {
            return representatives[a].weight > representatives[b].weight;
        }
        return representatives[a].index < representatives[b].index;
    });

    std::vector<std::size_t> score(n);
    for (std::size_t r = 0; r < n; ++r) score[by_entropy[r]] += r + 1;
    for (std::size_t r = 0; r < n; ++r) score[by_weight[r]] += r + 1;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (score[a] != score[b]) return score[a] < score[b];
        if (representatives[a].weight != representatives[b].weight) {
            return representatives[a].weight > representatives[b].weight;
        }
        return representatives[a].index < representatives[b].index;
    });

    std::vector<RankedFeature> ranked;
    truncated = k > n;  // fewer representatives than requested
    for (std::size_t r = 0; r < std::min(k, n); ++r) {
        RankedFeature f = representatives[order[r]];
        f.rank = r + 1;
        ranked.push_back(std::move(f));
    }
    representatives = std::move(ranked);
}

SelectionReport run_pipeline(const Dataset& d, const DrptConfig& cfg) {
    cfg.validate();
    if (d.has_missing()) {
        throw ValidationError("run_pipeline: dataset has missing values; impute first");
    }

    auto tag = [](const char* stage, const Error& e) {
        return Error(e.category(), std::string(stage) + ": " + e.what());
    };

    NormalizeOptions nopts;
    nopts.min_max = cfg.min_max_stage;
    nopts.unit_norm = true;
    Dataset nd = normalize(d, nopts).first;

    RelevanceFilterResult filt;
    try {
        filt = relevance_filter(nd.a, nd.b);
    } catch (const Error& e) {
        throw tag("relevance_filter", e);
    }

    Dataset reduced = nd;
    {
        Matrix ra(nd.samples(), filt.kept.size());
        std::vector<std::string> names(filt.kept.size());
        for (std::size_t j = 0; j < filt.kept.size(); ++j) {
            names[j] = nd.feature_names[filt.kept[j]];
            for (std::size_t i = 0; i < nd.samples(); ++i) {
                ra.at(i, j) = nd.a.at(i, filt.kept[j]);
            }
        }
        reduced.a = std::move(ra);
        reduced.feature_names = std::move(names);
    }

    PerturbationResult pert;
    try {
        pert = perturb_and_diff(reduced.a, reduced.b, cfg);
    } catch (const Error& e) {
        throw tag("perturb_and_diff", e);
    }

    // Sort delta_x ascending, carrying the reduced-column identity along
    // through smoothing and the post-smoothing re-sort.
    const std::size_t nk = filt.kept.size();
    std::vector<std::size_t> order(nk);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (pert.delta_x[a] != pert.delta_x[b]) return pert.delta_x[a] < pert.delta_x[b];
        return a < b;
    });
    std::vector<double> sorted(nk);
    for (std::size_t p = 0; p < nk; ++p) sorted[p] = pert.delta_x[order[p]];

    std::vector<double> smoothed = smooth_delta(sorted, cfg);
    {
        std::vector<std::size_t> reorder(nk);
        std::iota(reorder.begin(), reorder.end(), 0);
        std::sort(reorder.begin(), reorder.end(), [&](std::size_t a, std::size_t b) {
            if (smoothed[a] != smoothed[b]) return smoothed[a] < smoothed[b];
            return order[a] < order[b];
        });
        std::vector<std::size_t> o2(nk);
        std::vector<double> s2(nk);
        for (std::size_t p = 0; p < nk; ++p) {
            o2[p] = order[reorder[p]];
            s2[p] = smoothed[reorder[p]];
        }
        order = std::move(o2);
        smoothed = std::move(s2);
    }

    const auto position_clusters = cluster_delta(smoothed, cfg);

    const std::size_t bins = cfg.resolve_bins(nd.samples());
    std::vector<double> entropies(nk, 0.0);
    std::vector<double> weights(nk, 0.0);
    for (std::size_t j = 0; j < nk; ++j) {
        entropies[j] = entropy(reduced.a.column(j), bins);
        weights[j] = std::fabs(pert.x[j]);
    }

    ClusterTree tree;
    std::vector<RankedFeature> reps;
    for (std::size_t ci = 0; ci < position_clusters.size(); ++ci) {
        Cluster cl;
        for (std::size_t p : position_clusters[ci]) cl.members.push_back(order[p]);
        cl.sub_clusters = subcluster_and_pick(cl.members, entropies, weights);
        for (std::size_t si = 0; si < cl.sub_clusters.size(); ++si) {
            const SubCluster& sc = cl.sub_clusters[si];
            const std::size_t j = sc.representative;
            RankedFeature f;
            f.name = reduced.feature_names[j];
            f.index = filt.kept[j];
            f.weight = weights[j];
            f.delta_x = pert.delta_x[j];
            f.entropy = entropies[j];
            f.cluster = ci;
            f.subcluster = si;
            reps.push_back(std::move(f));
        }
        tree.clusters.push_back(std::move(cl));
    }

    SelectionReport report;
    report.config = cfg;
    report.threshold = filt.threshold;
    report.dataset_fingerprint = {d.samples(), d.features(), content_hash(d),
                                  Rng::kAlgorithm};
    try {
        rank_selected(reps, cfg.k, report.truncated);
    } catch (const Error& e) {
        throw tag("rank_selected", e);
    }
    report.features = std::move(reps);
    return report;
}

std::string SelectionReport::to_json() const {
    nlohmann::ordered_json j;
    j["config"] = {{"s", config.s},
                   {"smooth_window", config.smooth_window},
                   {"smooth_order", config.smooth_order},
                   {"entropy_bins", config.entropy_bins},
                   {"cluster_epsilon", config.cluster_epsilon},
                   {"seed", config.seed},
                   {"k", config.k},
                   {"rescale_e_to_spectral", config.rescale_e_to_spectral},
                   {"min_max_stage", config.min_max_stage}};
    char hash_hex[32];
    std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                  static_cast<unsigned long long>(dataset_fingerprint.hash));
    j["dataset_fingerprint"] = {{"rows", dataset_fingerprint.rows},
                                {"cols", dataset_fingerprint.cols},
                                {"hash", hash_hex},
                                {"generator", dataset_fingerprint.generator}};
    j["threshold"] = threshold;
    j["features"] = nlohmann::ordered_json::array();
    for (const auto& f : features) {
        j["features"].push_back({{"name", f.name},
                                 {"index", f.index},
                                 {"weight", f.weight},
                                 {"delta_x", f.delta_x},
                                 {"entropy", f.entropy},
                                 {"cluster", f.cluster},
                                 {"subcluster", f.subcluster},
                                 {"rank", f.rank}});
    }
    if (truncated) j["truncated"] = true;
    return j.dump(2) + "\n";
}

}  // namespace drpt

#include "drpt/synth.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

#include "drpt/rng.hpp"

namespace drpt {

void PlantedSpec::validate() const {
    if (m == 0 || n_independent == 0) {
        throw ValidationError("planted spec: m and n_independent must be positive");
    }
    const std::size_t n = total_features();
    std::set<std::size_t> targets;
    for (const auto& dep : dependencies) {
        if (dep.target < n_independent || dep.target >= n) {
            throw ValidationError("planted spec: dependency target " +
                                  std::to_string(dep.target) +
                                  " must lie outside the independent block");
        }
        if (!targets.insert(dep.target).second) {
            throw ValidationError("planted spec: duplicate dependency target " +
                                  std::to_string(dep.target));
        }
        if (dep.combination.empty()) {
            throw ValidationError("planted spec: empty dependency combination");
        }
        for (const auto& term : dep.combination) {
            if (term.source >= n) {
                throw ValidationError("planted spec: combination source " +
                                      std::to_string(term.source) + " out of range");
            }
        }
    }
    if (label_combination.empty()) {
        throw ValidationError("planted spec: label combination required");
    }
    for (const auto& term : label_combination) {
        if (term.source >= n) {
            throw ValidationError("planted spec: label source " +
                                  std::to_string(term.source) + " out of range");
        }
    }
    if (!(low < high)) throw ValidationError("planted spec: need low < high");
}

Dataset planted(const PlantedSpec& spec) {
    spec.validate();
    const std::size_t n = spec.total_features();
    Matrix a(spec.m, n);

    // Independent block filled row-major so generation order is part of the
    // format (same seed, same bytes).
    Rng rng(spec.seed);
    for (std::size_t i = 0; i < spec.m; ++i) {
        for (std::size_t j = 0; j < spec.n_independent; ++j) {
            a.at(i, j) = rng.uniform(spec.low, spec.high);
        }
    }
    // Dependency targets should not be assumed ordered; sources may refer to
    // any previously defined column. Apply in target order.
    std::vector<PlantedDependency> deps = spec.dependencies;
    std::sort(deps.begin(), deps.end(),
              [](const auto& x, const auto& y) { return x.target < y.target; });
    for (const auto& dep : deps) {
        for (std::size_t i = 0; i < spec.m; ++i) {
            double v = 0.0;
            for (const auto& term : dep.combination) {
                v += term.coeff * a.at(i, term.source);
            }
            a.at(i, dep.target) = v;
        }
    }

    Dataset d;
    d.b.resize(spec.m, 0.0);
    for (std::size_t i = 0; i < spec.m; ++i) {
        double v = 0.0;
        for (const auto& term : spec.label_combination) {
            v += term.coeff * a.at(i, term.source);
        }
        d.b[i] = v;
    }
    d.a = std::move(a);
    for (std::size_t j = 0; j < n; ++j) {
        d.feature_names.push_back("F" + std::to_string(j + 1));
    }
    return d;
}

Dataset paper_synthetic(std::uint64_t seed) {
    PlantedSpec spec;
    spec.m = 100;
    spec.n_independent = 20;
    spec.dependencies = {{20, {{2.0, 17}, {4.0, 18}}}, {21, {{3.0, 19}}}};
    spec.label_combination = {{3.0, 18}, {5.0, 16}, {2.0, 19}};
    spec.seed = seed;
    return planted(spec);
}

PlantedSpec parse_planted_spec(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("planted spec: invalid JSON: ") + e.what());
    }
    auto terms = [](const nlohmann::json& arr) {
        std::vector<LinearTerm> out;
        for (const auto& t : arr) {
            out.push_back({t.at(0).get<double>(), t.at(1).get<std::size_t>()});
        }
        return out;
    };
    PlantedSpec spec;
    try {
        spec.m = j.at("m").get<std::size_t>();
        spec.n_independent = j.at("n_independent").get<std::size_t>();
        for (const auto& dep : j.value("dependencies", nlohmann::json::array())) {
            spec.dependencies.push_back(
                {dep.at("target").get<std::size_t>(), terms(dep.at("combination"))});
        }
        spec.label_combination = terms(j.at("label_combination"));
        spec.low = j.value("low", -1.0);
        spec.high = j.value("high", 1.0);
        spec.seed = j.value("seed", 0ULL);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("planted spec: ") + e.what());
    }
    spec.validate();
    return spec;
}

Dataset binarize_labels(const Dataset& d) {
    std::vector<double> sorted = d.b;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t m = sorted.size();
    const double median =
        m % 2 == 1 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
    Dataset out = d;
    for (double& v : out.b) v = v > median ? 1.0 : 0.0;
    out.class_labels = {"low", "high"};
    return out;
}

}  // namespace drpt

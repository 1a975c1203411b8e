#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "drpt/dataset.hpp"
#include "drpt/eval.hpp"
#include "drpt/pipeline.hpp"
#include "drpt/synth.hpp"

namespace {

struct CliConfig {
    std::string input;
    std::string output = "report.json";
    std::string label = "last";
    drpt::DrptConfig drpt;
    std::string classifier = "knn";
    std::size_t knn_k = 5;
    std::size_t runs = 10;
    double train_fraction = 0.7;
    std::size_t impute_k = 5;
    bool paper_literal_e = false;
    bool min_max = false;
    // synth only
    bool paper = false;
    std::string planted_spec;
};

void add_pipeline_flags(CLI::App* cmd, CliConfig& cfg) {
    cmd->add_option("--input", cfg.input, "Input CSV (features + label column)")
        ->required();
    cmd->add_option("--output", cfg.output, "Output JSON report path")
        ->capture_default_str();
    cmd->add_option("--label", cfg.label,
                    "Label column: name, zero-based index, or \"last\"")
        ->capture_default_str();
    cmd->add_option("--k", cfg.drpt.k, "Number of features to select")
        ->capture_default_str();
    cmd->add_option("--s", cfg.drpt.s, "Perturbation exponent: ||E||2 = 10^-s * sigma_min")
        ->capture_default_str();
    cmd->add_option("--smooth-window", cfg.drpt.smooth_window,
                    "Savitzky-Golay window (odd)")
        ->capture_default_str();
    cmd->add_option("--smooth-order", cfg.drpt.smooth_order,
                    "Savitzky-Golay polynomial order")
        ->capture_default_str();
    cmd->add_option("--bins", cfg.drpt.entropy_bins,
                    "Entropy bins (0 = auto, ceil(sqrt(m)))")
        ->capture_default_str();
    cmd->add_option("--cluster-epsilon", cfg.drpt.cluster_epsilon,
                    "Cluster gap tolerance, relative to the delta-x range")
        ->capture_default_str();
    cmd->add_option("--seed", cfg.drpt.seed, "Random seed")->capture_default_str();
    cmd->add_flag("--paper-literal-e", cfg.paper_literal_e,
                  "Scale E entrywise by t instead of rescaling ||E||2 to t");
    cmd->add_flag("--min-max", cfg.min_max,
                  "Apply [0,1] min-max scaling before unit-norm normalization");
    cmd->add_option("--impute-k", cfg.impute_k, "Neighbors for missing-value imputation")
        ->capture_default_str();
}

void add_eval_flags(CLI::App* cmd, CliConfig& cfg) {
    cmd->add_option("--classifier", cfg.classifier, "Classifier: knn or centroid")
        ->check(CLI::IsMember({"knn", "centroid"}))
        ->capture_default_str();
    cmd->add_option("--knn-k", cfg.knn_k, "Neighbors for the knn classifier")
        ->capture_default_str();
    cmd->add_option("--train-fraction", cfg.train_fraction,
                    "Stratified train fraction")
        ->capture_default_str();
}

drpt::Dataset load_ready(const CliConfig& cfg) {
    drpt::Dataset d = drpt::load_csv(cfg.input, cfg.label, true);
    if (d.has_missing()) d = drpt::knn_impute(d, cfg.impute_k);
    return d;
}

drpt::DrptConfig pipeline_config(const CliConfig& cfg) {
    drpt::DrptConfig c = cfg.drpt;
    c.rescale_e_to_spectral = !cfg.paper_literal_e;
    c.min_max_stage = cfg.min_max;
    return c;
}

drpt::EvalOptions eval_options(const CliConfig& cfg) {
    drpt::EvalOptions opts;
    opts.classifier =
        cfg.classifier == "knn" ? drpt::Classifier::knn : drpt::Classifier::centroid;
    opts.knn_k = cfg.knn_k;
    opts.train_fraction = cfg.train_fraction;
    return opts;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw drpt::FormatError("cannot open output file: " + path);
    out << text;
}

std::string ranked_csv(const drpt::SelectionReport& report) {
    std::ostringstream out;
    out << "name,rank,weight,delta_x,entropy\n";
    char buf[64];
    for (const auto& f : report.features) {
        out << f.name << ',' << f.rank;
        std::snprintf(buf, sizeof(buf), ",%.17g", f.weight);
        out << buf;
        std::snprintf(buf, sizeof(buf), ",%.17g", f.delta_x);
        out << buf;
        std::snprintf(buf, sizeof(buf), ",%.17g", f.entropy);
        out << buf << '\n';
    }
    return out.str();
}

std::string sibling_csv_path(const std::string& json_path) {
    std::string path = json_path;
    const std::string suffix = ".json";
    if (path.size() >= suffix.size() &&
        path.compare(path.size() - suffix.size(), suffix.size(), suffix) == 0) {
        path.resize(path.size() - suffix.size());
    }
    return path + ".csv";
}

int cmd_select(const CliConfig& cfg) {
    const drpt::Dataset d = load_ready(cfg);
    const drpt::SelectionReport report = drpt::run_pipeline(d, pipeline_config(cfg));
    write_text(cfg.output, report.to_json());
    write_text(sibling_csv_path(cfg.output), ranked_csv(report));
    std::cout << "selected " << report.features.size() << " features (seed "
              << cfg.drpt.seed << ") -> " << cfg.output << "\n";
    return 0;
}

int cmd_synth(const CliConfig& cfg) {
    drpt::Dataset d;
    if (cfg.paper) {
        d = drpt::paper_synthetic(cfg.drpt.seed);
    } else if (!cfg.planted_spec.empty()) {
        std::ifstream in(cfg.planted_spec, std::ios::binary);
        if (!in) throw drpt::FormatError("cannot open spec file: " + cfg.planted_spec);
        std::stringstream buf;
        buf << in.rdbuf();
        drpt::PlantedSpec spec = drpt::parse_planted_spec(buf.str());
        spec.seed = cfg.drpt.seed;
        d = drpt::planted(spec);
    } else {
        throw drpt::ValidationError("synth: pass --paper or --spec");
    }
    drpt::write_csv(d, cfg.output);
    std::cout << "wrote " << d.samples() << "x" << d.features() << " dataset (seed "
              << cfg.drpt.seed << ") -> " << cfg.output << "\n";
    return 0;
}

int cmd_eval(const CliConfig& cfg) {
    const drpt::Dataset raw = load_ready(cfg);
    std::set<double> classes(raw.b.begin(), raw.b.end());
    const drpt::Dataset d = classes.size() > 10 ? drpt::binarize_labels(raw) : raw;

    const drpt::DrptConfig pcfg = pipeline_config(cfg);
    const drpt::SelectionReport report = drpt::run_pipeline(d, pcfg);
    const drpt::SplitPlan split =
        drpt::stratified_split(d, cfg.train_fraction, pcfg.seed);
    const drpt::EvalResult res =
        drpt::prefix_accuracy(d, report, split, eval_options(cfg), pcfg.k);
    write_text(cfg.output, res.to_json());
    std::cout << "best accuracy " << res.best_accuracy << " at t=" << res.best_t
              << " (" << res.classifier << ", seed " << pcfg.seed << ") -> "
              << cfg.output << "\n";
    return 0;
}

int cmd_stability(const CliConfig& cfg) {
    const drpt::Dataset d = load_ready(cfg);
    const drpt::StabilityResult res =
        drpt::stability_study(d, pipeline_config(cfg), cfg.runs, eval_options(cfg));
    write_text(cfg.output, res.to_json());
    std::cout << "runs=" << res.runs << " mean_accuracy=" << res.mean_accuracy
              << " sd=" << res.sd_accuracy << " jaccard=" << res.mean_jaccard
              << " (seed " << cfg.drpt.seed << ") -> " << cfg.output << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"DRPT feature selection: perturbation-based redundancy removal",
                 "drpt"};
    app.require_subcommand(1);

    CliConfig cfg;

    CLI::App* select = app.add_subcommand("select", "Rank features and write a report");
    add_pipeline_flags(select, cfg);

    CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic dataset CSV");
    synth->add_option("--output,--out", cfg.output, "Output CSV path")
        ->capture_default_str();
    synth->add_option("--seed", cfg.drpt.seed, "Random seed")->capture_default_str();
    synth->add_flag("--paper", cfg.paper,
                    "Emit the 100x22 worked example (two planted dependencies)");
    synth->add_option("--spec", cfg.planted_spec, "Planted-structure spec JSON file");

    CLI::App* eval = app.add_subcommand("eval", "Prefix-accuracy curve on a split");
    add_pipeline_flags(eval, cfg);
    add_eval_flags(eval, cfg);

    CLI::App* stability =
        app.add_subcommand("stability", "Repeated shuffled runs: accuracy SD + Jaccard");
    add_pipeline_flags(stability, cfg);
    add_eval_flags(stability, cfg);
    stability->add_option("--runs", cfg.runs, "Number of shuffled runs (>= 2)")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (select->parsed()) return cmd_select(cfg);
        if (synth->parsed()) return cmd_synth(cfg);
        if (eval->parsed()) return cmd_eval(cfg);
        if (stability->parsed()) return cmd_stability(cfg);
    } catch (const drpt::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.category() == drpt::ErrorCategory::input ? 2 : 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}

// scalenet: synthetic data, cross-validated training, ablation sweeps and
// Grad-CAM interpretation from one flat config file plus --set overrides.

#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "scalenet/config.hpp"
#include "scalenet/data.hpp"
#include "scalenet/experiment.hpp"
#include "scalenet/metrics.hpp"
#include "scalenet/synth.hpp"

namespace fs = std::filesystem;
using namespace scalenet;

namespace {

struct CommonOptions {
    std::string config_path;
    std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
    cmd->add_option("-c,--config", opts.config_path, "config file (key = value lines)");
    cmd->add_option("-s,--set", opts.overrides, "override one key, e.g. --set epochs=200")->take_all();
}

Config build_config(const CommonOptions& opts) {
    Config cfg = opts.config_path.empty() ? Config() : Config::load(opts.config_path);
    for (const auto& o : opts.overrides) cfg.apply_override(o);
    return cfg;
}

ExperimentConfig experiment_from(const Config& cfg) {
    ExperimentConfig e = to_experiment_config(cfg);
    e.snapshot = cfg.dump();
    return e;
}

void print_aggregate(const std::string& label, const AggregateMetrics& m) {
    std::cout << label << "accuracy " << format_mean_std(m.accuracy) << "  precision "
              << format_mean_std(m.precision) << "  recall " << format_mean_std(m.recall) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-scale spectral network trainer"};
    app.require_subcommand(1);
    app.footer("Config keys (file or --set):\n" + describe_config_keys());

    CommonOptions synth_opts, cv_opts, sweep_opts, conv_opts, interp_opts;
    std::string synth_out, data_path, out_dir, run_dir, interp_data, interp_out;
    long long sample = -1;

    auto* synth = app.add_subcommand("synth", "generate a synthetic dataset CSV from the synth_* keys");
    add_common(synth, synth_opts);
    synth->add_option("-o,--out", synth_out, "output CSV")->required();

    auto* cv = app.add_subcommand("cv", "k-fold cross-validation of one model kind");
    add_common(cv, cv_opts);
    cv->add_option("-d,--data", data_path, "dataset CSV")->required();
    cv->add_option("-o,--out", out_dir, "run directory")->required();

    auto* sweep = app.add_subcommand("sweep", "CV of ours for each J in sweep_scales, trained and frozen");
    add_common(sweep, sweep_opts);
    sweep->add_option("-d,--data", data_path, "dataset CSV")->required();
    sweep->add_option("-o,--out", out_dir, "output directory")->required();

    auto* conv = app.add_subcommand("converge", "test-accuracy curves of ours and 2-MLP_I per learning rate");
    add_common(conv, conv_opts);
    conv->add_option("-d,--data", data_path, "dataset CSV")->required();
    conv->add_option("-o,--out", out_dir, "output directory")->required();

    bool cohort = false;
    auto* interp = app.add_subcommand("interpret", "Grad-CAM saliency for one sample, or all samples, of a cv run");
    add_common(interp, interp_opts);
    interp->add_option("-r,--run", run_dir, "run directory written by cv")->required();
    auto* sample_opt = interp->add_option("-n,--sample", sample, "sample index in the dataset");
    auto* cohort_opt = interp->add_flag("--cohort", cohort, "mean normalised map over every held-out sample");
    sample_opt->excludes(cohort_opt);
    interp->add_option("-d,--data", interp_data, "dataset CSV (default: the run's data path)");
    interp->add_option("-o,--out", interp_out, "output CSV (default: <run>/saliency_<n>.csv or saliency_cohort.csv)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*synth) {
            const Config cfg = build_config(synth_opts);
            const Dataset d = synth_generate(to_synth_spec(cfg));
            save_csv(d, synth_out);
            std::cout << "wrote " << d.num_samples() << " samples x " << d.num_features() << " features to "
                      << synth_out << "\n";
        } else if (*cv) {
            const Config cfg = build_config(cv_opts);
            const ExperimentConfig e = experiment_from(cfg);
            const Dataset d = load_csv(data_path);
            const RunArtifact run = run_cv(d, e, data_path);
            write_run(run, out_dir);
            for (const auto& f : run.folds) {
                std::cout << "fold " << f.fold << ": accuracy " << format_double(f.metrics.accuracy) << "\n";
            }
            print_aggregate(to_string(e.kind) + ": ", run.aggregate());
        } else if (*sweep) {
            const Config cfg = build_config(sweep_opts);
            const ExperimentConfig e = experiment_from(cfg);
            const Dataset d = load_csv(data_path);
            const std::vector<int> js = cfg.get_ints("sweep_scales");
            const auto rows = sweep_scales(d, js, e);
            fs::create_directories(out_dir);
            write_text(fs::path(out_dir) / "config.txt", e.snapshot);
            write_text(fs::path(out_dir) / "sweep.csv", sweep_csv(rows));
            for (const auto& r : rows) {
                print_aggregate("J=" + std::to_string(r.num_scales) + (r.frozen ? " frozen:  " : " trained: "),
                                r.metrics);
            }
        } else if (*conv) {
            const Config cfg = build_config(conv_opts);
            const ExperimentConfig e = experiment_from(cfg);
            const Dataset d = load_csv(data_path);
            const std::vector<double> lrs = cfg.get_reals("converge_lrs");
            const double threshold = cfg.get_double("converge_threshold");
            const auto curves = compare_convergence(d, e, lrs);
            fs::create_directories(out_dir);
            write_text(fs::path(out_dir) / "config.txt", e.snapshot);
            write_text(fs::path(out_dir) / "curves.csv", convergence_curves_csv(curves));
            const std::string table = convergence_thresholds_csv(curves, threshold);
            write_text(fs::path(out_dir) / "thresholds.csv", table);
            std::cout << table;
        } else if (*interp) {
            const Config cfg = build_config(interp_opts);
            const RunArtifact run = load_artifact(fs::path(run_dir) / "artifact.json");
            const std::string path = interp_data.empty() ? run.data_path : interp_data;
            if (path.empty()) throw std::invalid_argument("interpret: run has no data path; pass --data");
            const Dataset d = load_csv(path);
            const SaliencyTarget target = parse_saliency_target(cfg.get_string("saliency_target"));
            if (cohort) {
                const CohortSaliency c = cohort_saliency(run, d, target);
                const fs::path out = interp_out.empty() ? fs::path(run_dir) / "saliency_cohort.csv" : fs::path(interp_out);
                write_text(out, cohort_saliency_csv(c));
                std::cout << "cohort of " << c.samples << " samples, top region " << c.ranking.front().name
                          << ": wrote " << out.string() << "\n";
            } else {
                if (sample_opt->count() == 0)
                    throw std::invalid_argument("interpret: pass --sample or --cohort");
                const auto result = interpret_sample(run, d, sample, target);
                const fs::path out = interp_out.empty()
                                         ? fs::path(run_dir) / ("saliency_" + std::to_string(sample) + ".csv")
                                         : fs::path(interp_out);
                write_text(out, saliency_csv(result, run.class_names));
                std::cout << "sample " << sample << " (fold " << result.fold << ", predicted "
                          << run.class_names[static_cast<std::size_t>(result.map.predicted_class)] << "): wrote "
                          << out.string() << "\n";
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

#include "scalenet/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "scalenet/rng.hpp"

namespace scalenet {

using json = nlohmann::json;

ModelKind parse_model_kind(std::string_view name) {
    if (name == "ours") return ModelKind::ours;
    if (name == "mlp1") return ModelKind::mlp1;
    if (name == "mlp2_r") return ModelKind::mlp2_r;
    if (name == "mlp2_i") return ModelKind::mlp2_i;
    throw std::invalid_argument("unknown model kind '" + std::string(name) + "'");
}

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::ours: return "ours";
        case ModelKind::mlp1: return "mlp1";
        case ModelKind::mlp2_r: return "mlp2_r";
        case ModelKind::mlp2_i: return "mlp2_i";
    }
    return "?";
}

TrainConfig to_train_config(const Config& cfg) {
    TrainConfig t;
    t.epochs = static_cast<int>(cfg.get_int("epochs"));
    t.seed = cfg.get_uint("seed");
    t.lr_weights = cfg.get_double("lr_weights");
    t.lr_scales = cfg.get_double("lr_scales");
    t.weight_decay = cfg.get_double("weight_decay");
    t.num_scales = static_cast<int>(cfg.get_int("num_scales"));
    t.scale_init_min = cfg.get_double("scale_init_min");
    t.scale_init_max = cfg.get_double("scale_init_max");
    const double alpha = cfg.get_double("kernel_alpha");
    const double beta = cfg.get_double("kernel_beta");
    const double x1 = cfg.get_double("kernel_x1");
    const double x2 = cfg.get_double("kernel_x2");
    if (cfg.get_bool("kernel_solve")) {
        t.kernel = make_spline_kernel(alpha, beta, x1, x2);
    } else {
        const auto c = cfg.get_reals("kernel_coeffs");
        if (c.size() != 4) throw std::invalid_argument("kernel_coeffs must list exactly 4 values");
        t.kernel = {alpha, beta, x1, x2, {c[0], c[1], c[2], c[3]}};
    }
    t.activation = parse_activation(cfg.get_string("activation"));
    t.freeze_scales = cfg.get_bool("freeze_scales");
    t.normalize_eigenvalues = cfg.get_bool("normalize_eigenvalues");
    t.oversample = cfg.get_bool("oversample");
    t.adasyn_neighbors = static_cast<int>(cfg.get_int("adasyn_neighbors"));
    t.adasyn_balance = cfg.get_double("adasyn_balance");
    t.validate();
    return t;
}

SynthSpec to_synth_spec(const Config& cfg) {
    SynthSpec s;
    s.p = cfg.get_int("synth_p");
    s.n = cfg.get_int("synth_n");
    s.num_classes = static_cast<int>(cfg.get_int("synth_classes"));
    s.informative_components = cfg.get_int("synth_informative");
    s.signal_strength = cfg.get_double("synth_strength");
    s.noise_std = cfg.get_double("synth_noise");
    s.class_priors = cfg.get_reals("synth_priors");
    const auto& basis = cfg.get_string("synth_basis");
    if (basis == "random") {
        s.basis = SynthBasis::random;
    } else if (basis == "identity") {
        s.basis = SynthBasis::identity;
    } else {
        throw std::invalid_argument("synth_basis must be random or identity");
    }
    s.seed = cfg.get_uint("seed");
    s.validate();
    return s;
}

ExperimentConfig to_experiment_config(const Config& cfg) {
    ExperimentConfig e;
    e.train = to_train_config(cfg);
    e.kind = parse_model_kind(cfg.get_string("model"));
    e.folds = static_cast<int>(cfg.get_int("folds"));
    const auto& mode = cfg.get_string("standardize");
    if (mode == "zscore") {
        e.standardize = StandardizeMode::zscore;
    } else if (mode == "center") {
        e.standardize = StandardizeMode::center;
    } else {
        throw std::invalid_argument("standardize must be zscore or center");
    }
    e.mlp2_r_budget = cfg.get_int("mlp2_r_budget");
    e.saliency_target = parse_saliency_target(cfg.get_string("saliency_target"));
    e.threads = static_cast<int>(std::max<std::int64_t>(1, cfg.get_int("threads")));
    e.snapshot = cfg.dump();
    return e;
}

Prediction predict(const TrainedModel& model, const Eigen::MatrixXd& standardized) {
    return std::visit([&](const auto& m) { return m.predict(standardized); }, model);
}

MlpSpec baseline_spec(ModelKind kind, Index p, Index num_classes, const ExperimentConfig& cfg) {
    MlpSpec spec;
    switch (kind) {
        case ModelKind::mlp1: spec = make_1mlp(p, num_classes); break;
        case ModelKind::mlp2_i: spec = make_2mlp_identity(p, num_classes); break;
        case ModelKind::mlp2_r: {
            const Index budget = cfg.mlp2_r_budget > 0
                                     ? cfg.mlp2_r_budget
                                     : scalenet_parameter_count(p, num_classes, cfg.train.num_scales);
            spec = make_2mlp_reduced(p, num_classes, budget);
            break;
        }
        case ModelKind::ours: throw std::invalid_argument("baseline_spec: 'ours' is not an MLP baseline");
    }
    spec.activation = cfg.train.activation;
    return spec;
}

AggregateMetrics RunArtifact::aggregate() const {
    std::vector<double> acc, prec, rec;
    for (const auto& f : folds) {
        acc.push_back(f.metrics.accuracy);
        prec.push_back(f.metrics.macro_precision);
        rec.push_back(f.metrics.macro_recall);
    }
    return {mean_std(acc), mean_std(prec), mean_std(rec)};
}

ClassificationMetrics evaluate_fold(const FoldResult& fold, const Dataset& data, int num_classes) {
    const Dataset test = data.subset(fold.test_indices);
    const Eigen::MatrixXd x = apply_standardizer(fold.standardizer, test.features);
    const auto predicted = predict(fold.model, x).predicted_labels();
    return classification_metrics(test.labels, predicted, num_classes);
}

FoldResult run_fold(const Dataset& data, std::vector<Index> train_indices, std::vector<Index> test_indices,
                    const ExperimentConfig& cfg, int fold, std::uint64_t fold_seed) {
    const auto start = std::chrono::steady_clock::now();
    FoldResult out;
    out.fold = fold;
    out.seed = fold_seed;
    out.train_indices = std::move(train_indices);
    out.test_indices = std::move(test_indices);

    const Dataset raw_train = data.subset(out.train_indices);
    out.standardizer = fit_standardizer(raw_train, cfg.standardize);
    const Dataset train_split = apply_standardizer(out.standardizer, raw_train);
    const Dataset test_split = apply_standardizer(out.standardizer, data.subset(out.test_indices));

    TrainConfig tc = cfg.train;
    tc.seed = fold_seed;
    if (cfg.kind == ModelKind::ours) {
        auto result = train(train_split, test_split, tc);
        out.model = std::move(result.model);
        out.log = std::move(result.log);
    } else {
        const MlpSpec spec = baseline_spec(cfg.kind, data.num_features(), data.num_classes(), cfg);
        auto result = train_mlp(spec, train_split, test_split, tc);
        out.model = std::move(result.model);
        out.log = std::move(result.log);
    }
    out.metrics = evaluate_fold(out, data, data.num_classes());
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

RunArtifact run_cv(const Dataset& data, const ExperimentConfig& cfg, std::string data_path) {
    data.validate();
    const FoldPlan plan = make_folds(data.labels, cfg.folds, derive_seed(cfg.train.seed, "folds"));

    RunArtifact run;
    run.config_snapshot = cfg.snapshot;
    run.seed = cfg.train.seed;
    run.kind = cfg.kind;
    run.data_path = std::move(data_path);
    run.feature_names = data.feature_names;
    run.class_names = data.class_names;
    run.folds.resize(static_cast<std::size_t>(cfg.folds));

    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(cfg.folds));
    auto work = [&](int f) {
        try {
            run.folds[static_cast<std::size_t>(f)] =
                run_fold(data, plan.train_indices(f), plan.test_indices(f), cfg, f,
                         derive_seed(cfg.train.seed, "fold/" + std::to_string(f)));
        } catch (...) {
            errors[static_cast<std::size_t>(f)] = std::current_exception();
        }
    };
    const int workers = std::min(cfg.threads, cfg.folds);
    if (workers <= 1) {
        for (int f = 0; f < cfg.folds; ++f) work(f);
    } else {
        std::vector<std::jthread> pool;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (int f = w; f < cfg.folds; f += workers) work(f);
            });
        }
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return run;
}

std::vector<SweepRow> sweep_scales(const Dataset& data, std::span<const int> scale_counts,
                                   const ExperimentConfig& cfg) {
    std::vector<SweepRow> rows;
    for (int J : scale_counts) {
        for (bool frozen : {false, true}) {
            ExperimentConfig c = cfg;
            c.kind = ModelKind::ours;
            c.train.num_scales = J;
            c.train.freeze_scales = frozen;
            rows.push_back({J, frozen, run_cv(data, c).aggregate()});
        }
    }
    return rows;
}

std::vector<ConvergenceCurve> compare_convergence(const Dataset& data, const ExperimentConfig& cfg,
                                                  std::span<const double> lrs) {
    std::vector<ConvergenceCurve> curves;
    for (double lr : lrs) {
        for (ModelKind kind : {ModelKind::ours, ModelKind::mlp2_i}) {
            ExperimentConfig c = cfg;
            c.kind = kind;
            c.train.lr_weights = lr;
            c.train.lr_scales = lr;
            const RunArtifact run = run_cv(data, c);
            for (const auto& fold : run.folds) {
                ConvergenceCurve curve{to_string(kind), lr, fold.fold, {}};
                for (const auto& rec : fold.log) curve.test_accuracy.push_back(rec.test_accuracy);
                curves.push_back(std::move(curve));
            }
        }
    }
    return curves;
}

std::optional<int> epochs_to_threshold(const ConvergenceCurve& curve, double threshold) {
    for (std::size_t e = 0; e < curve.test_accuracy.size(); ++e) {
        if (curve.test_accuracy[e] >= threshold) return static_cast<int>(e);
    }
    return std::nullopt;
}

// ---- persistence --------------------------------------------------------

namespace {

json matrix_json(const Eigen::MatrixXd& m) {
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::vector<double>(m.data(), m.data() + m.size())}};
}

Eigen::MatrixXd matrix_from(const json& j) {
    const auto rows = j.at("rows").get<Index>();
    const auto cols = j.at("cols").get<Index>();
    const auto data = j.at("data").get<std::vector<double>>();
    if (static_cast<Index>(data.size()) != rows * cols) throw std::runtime_error("artifact: matrix size mismatch");
    return Eigen::Map<const Eigen::MatrixXd>(data.data(), rows, cols);
}

json vector_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vector_from(const json& j) {
    const auto data = j.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(data.data(), static_cast<Index>(data.size()));
}

json metrics_object(const ClassificationMetrics& m) {
    return {{"accuracy", m.accuracy}, {"precision", m.macro_precision}, {"recall", m.macro_recall}};
}

json model_json(const TrainedModel& model) {
    if (const auto* ours = std::get_if<ScaleNetModel>(&model)) {
        const auto& k = ours->kernel;
        return {{"kind", "ours"},
                {"activation", to_string(ours->params.activation)},
                {"weights", matrix_json(ours->params.weights)},
                {"bias", vector_json(ours->params.bias)},
                {"log_scales", vector_json(ours->params.scales.log_scales)},
                {"eigenvectors", matrix_json(ours->basis.eigenvectors)},
                {"eigenvalues", vector_json(ours->basis.eigenvalues)},
                {"kernel",
                 {{"alpha", k.alpha}, {"beta", k.beta}, {"x1", k.x1}, {"x2", k.x2}, {"coeffs", k.spline_coeffs}}}};
    }
    const auto& mlp = std::get<MlpModel>(model);
    json weights = json::array();
    json biases = json::array();
    for (const auto& w : mlp.params.weights) weights.push_back(matrix_json(w));
    for (const auto& b : mlp.params.biases) biases.push_back(vector_json(b));
    return {{"kind", "mlp"},
            {"activation", to_string(mlp.spec.activation)},
            {"layer_widths", mlp.spec.layer_widths},
            {"weights", weights},
            {"biases", biases}};
}

TrainedModel model_from(const json& j) {
    if (j.at("kind") == "ours") {
        ScaleNetModel m;
        m.params.activation = parse_activation(j.at("activation").get<std::string>());
        m.params.weights = matrix_from(j.at("weights"));
        m.params.bias = vector_from(j.at("bias"));
        m.params.scales.log_scales = vector_from(j.at("log_scales"));
        m.basis.eigenvectors = matrix_from(j.at("eigenvectors"));
        m.basis.eigenvalues = vector_from(j.at("eigenvalues"));
        const auto& k = j.at("kernel");
        m.kernel.alpha = k.at("alpha");
        m.kernel.beta = k.at("beta");
        m.kernel.x1 = k.at("x1");
        m.kernel.x2 = k.at("x2");
        m.kernel.spline_coeffs = k.at("coeffs").get<std::array<double, 4>>();
        return m;
    }
    MlpModel m;
    m.spec.activation = parse_activation(j.at("activation").get<std::string>());
    m.spec.layer_widths = j.at("layer_widths").get<std::vector<Index>>();
    for (const auto& w : j.at("weights")) m.params.weights.push_back(matrix_from(w));
    for (const auto& b : j.at("biases")) m.params.biases.push_back(vector_from(b));
    return m;
}

json log_json(std::span<const EpochRecord> log) {
    json rows = json::array();
    for (const auto& r : log) {
        rows.push_back({r.epoch, r.train_loss,
                        std::isfinite(r.test_accuracy) ? json(r.test_accuracy) : json(nullptr)});
    }
    return rows;
}

std::vector<EpochRecord> log_from(const json& j) {
    std::vector<EpochRecord> out;
    for (const auto& row : j) {
        out.push_back({row.at(0).get<int>(), row.at(1).get<double>(),
                       row.at(2).is_null() ? std::numeric_limits<double>::quiet_NaN() : row.at(2).get<double>()});
    }
    return out;
}

std::string csv_number(double v) { return std::isfinite(v) ? format_double(v) : "nan"; }

}  // namespace

std::string artifact_to_json(const RunArtifact& run) {
    json folds = json::array();
    for (const auto& f : run.folds) {
        folds.push_back({{"fold", f.fold},
                         {"seed", f.seed},
                         {"train_indices", f.train_indices},
                         {"test_indices", f.test_indices},
                         {"standardizer", {{"means", vector_json(f.standardizer.means)},
                                           {"stds", vector_json(f.standardizer.stds)}}},
                         {"model", model_json(f.model)},
                         {"metrics", metrics_object(f.metrics)},
                         {"epoch_log", log_json(f.log)}});
    }
    json doc = {{"format", "scalenet-run/1"},
                {"config", run.config_snapshot},
                {"seed", run.seed},
                {"model_kind", to_string(run.kind)},
                {"data_path", run.data_path},
                {"feature_names", run.feature_names},
                {"class_names", run.class_names},
                {"folds", folds}};
    return doc.dump(1) + "\n";
}

RunArtifact artifact_from_json(const std::string& text) {
    const json doc = json::parse(text);
    if (doc.at("format") != "scalenet-run/1") throw std::runtime_error("artifact: unsupported format");
    RunArtifact run;
    run.config_snapshot = doc.at("config").get<std::string>();
    run.seed = doc.at("seed").get<std::uint64_t>();
    run.kind = parse_model_kind(doc.at("model_kind").get<std::string>());
    run.data_path = doc.at("data_path").get<std::string>();
    run.feature_names = doc.at("feature_names").get<std::vector<std::string>>();
    run.class_names = doc.at("class_names").get<std::vector<std::string>>();
    for (const auto& jf : doc.at("folds")) {
        FoldResult f;
        f.fold = jf.at("fold");
        f.seed = jf.at("seed");
        f.train_indices = jf.at("train_indices").get<std::vector<Index>>();
        f.test_indices = jf.at("test_indices").get<std::vector<Index>>();
        f.standardizer.means = vector_from(jf.at("standardizer").at("means"));
        f.standardizer.stds = vector_from(jf.at("standardizer").at("stds"));
        f.model = model_from(jf.at("model"));
        const auto& m = jf.at("metrics");
        f.metrics = {m.at("accuracy"), m.at("precision"), m.at("recall")};
        f.log = log_from(jf.at("epoch_log"));
        run.folds.push_back(std::move(f));
    }
    return run;
}

RunArtifact load_artifact(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open artifact: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return artifact_from_json(buf.str());
}

std::string metrics_json(const RunArtifact& run) {
    json folds = json::array();
    for (const auto& f : run.folds) {
        json m = metrics_object(f.metrics);
        m["fold"] = f.fold;
        folds.push_back(m);
    }
    const auto agg = run.aggregate();
    auto ms = [](const MeanStd& v) { return json{{"mean", v.mean}, {"std", v.std}, {"text", format_mean_std(v)}}; };
    const json doc = {{"model", to_string(run.kind)},
                      {"folds", folds},
                      {"aggregate",
                       {{"accuracy", ms(agg.accuracy)}, {"precision", ms(agg.precision)}, {"recall", ms(agg.recall)}}}};
    return doc.dump(2) + "\n";
}

std::string epoch_log_csv(std::span<const EpochRecord> log) {
    std::ostringstream out;
    out << "epoch,train_loss,test_accuracy\n";
    for (const auto& r : log) out << r.epoch << ',' << csv_number(r.train_loss) << ',' << csv_number(r.test_accuracy) << '\n';
    return out.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

void write_run(const RunArtifact& run, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_text(dir / "config.txt", run.config_snapshot);
    write_text(dir / "metrics.json", metrics_json(run));
    write_text(dir / "artifact.json", artifact_to_json(run));
    json timings = json::array();
    for (const auto& f : run.folds) {
        write_text(dir / ("epochs_fold" + std::to_string(f.fold) + ".csv"), epoch_log_csv(f.log));
        timings.push_back({{"fold", f.fold}, {"seconds", f.seconds}});
    }
    write_text(dir / "timings.json", timings.dump(2) + "\n");
}

std::string sweep_csv(std::span<const SweepRow> rows) {
    std::ostringstream out;
    out << "num_scales,scales,accuracy_mean,accuracy_std,precision_mean,recall_mean\n";
    for (const auto& r : rows) {
        out << r.num_scales << ',' << (r.frozen ? "frozen" : "trained") << ',' << csv_number(r.metrics.accuracy.mean)
            << ',' << csv_number(r.metrics.accuracy.std) << ',' << csv_number(r.metrics.precision.mean) << ','
            << csv_number(r.metrics.recall.mean) << '\n';
    }
    return out.str();
}

std::string convergence_curves_csv(std::span<const ConvergenceCurve> curves) {
    std::ostringstream out;
    out << "epoch,model,lr,fold,test_accuracy\n";
    for (const auto& c : curves) {
        for (std::size_t e = 0; e < c.test_accuracy.size(); ++e) {
            out << e << ',' << c.model << ',' << format_double(c.lr) << ',' << c.fold << ','
                << csv_number(c.test_accuracy[e]) << '\n';
        }
    }
    return out.str();
}

std::string convergence_thresholds_csv(std::span<const ConvergenceCurve> curves, double threshold) {
    std::ostringstream out;
    out << "model,lr,fold,threshold,epochs_to_threshold\n";
    for (const auto& c : curves) {
        const auto e = epochs_to_threshold(c, threshold);
        out << c.model << ',' << format_double(c.lr) << ',' << c.fold << ',' << format_double(threshold) << ','
            << (e ? std::to_string(*e) : std::string("none")) << '\n';
    }
    return out.str();
}

SampleInterpretation interpret_sample(const RunArtifact& run, const Dataset& data, Index sample_index,
                                      SaliencyTarget target) {
    if (sample_index < 0 || sample_index >= data.num_samples()) {
        throw std::invalid_argument("interpret: sample index " + std::to_string(sample_index) + " out of range [0, " +
                                    std::to_string(data.num_samples()) + ")");
    }
    if (data.num_features() != static_cast<Index>(run.feature_names.size())) {
        throw std::invalid_argument("interpret: dataset does not match the run's feature count");
    }
    for (const auto& f : run.folds) {
        if (std::find(f.test_indices.begin(), f.test_indices.end(), sample_index) == f.test_indices.end()) continue;
        const auto* model = std::get_if<ScaleNetModel>(&f.model);
        if (model == nullptr) throw std::invalid_argument("interpret: run was not trained with model=ours");
        const Eigen::MatrixXd x = apply_standardizer(f.standardizer, Eigen::MatrixXd(data.features.col(sample_index)));
        SampleInterpretation out;
        out.fold = f.fold;
        out.map = saliency_map(*model, x.col(0), sample_index, target);
        out.ranking = rank_regions(out.map.values.col(out.map.predicted_class), data.feature_names);
        return out;
    }
    throw std::invalid_argument("interpret: sample " + std::to_string(sample_index) + " is in no test fold");
}

std::string saliency_csv(const SampleInterpretation& interp, std::span<const std::string> class_names) {
    std::ostringstream out;
    out << "region_name,class,saliency,rank\n";
    const std::string& cls = class_names[static_cast<std::size_t>(interp.map.predicted_class)];
    for (std::size_t r = 0; r < interp.ranking.size(); ++r) {
        out << interp.ranking[r].name << ',' << cls << ',' << format_double(interp.ranking[r].score) << ',' << r + 1
            << '\n';
    }
    return out.str();
}

CohortSaliency cohort_saliency(const RunArtifact& run, const Dataset& data, SaliencyTarget target) {
    CohortSaliency out;
    out.values = Eigen::VectorXd::Zero(data.num_features());
    for (Index i = 0; i < data.num_samples(); ++i) {
        const auto interp = interpret_sample(run, data, i, target);
        const Eigen::VectorXd map = interp.map.values.col(interp.map.predicted_class);
        const double total = map.sum();
        if (total <= 0.0) continue;
        out.values += map / total;
        ++out.samples;
    }
    if (out.samples > 0) out.values /= static_cast<double>(out.samples);
    out.ranking = rank_regions(out.values, data.feature_names);
    return out;
}

std::string cohort_saliency_csv(const CohortSaliency& cohort) {
    std::ostringstream out;
    out << "region_name,saliency,rank\n";
    for (std::size_t r = 0; r < cohort.ranking.size(); ++r)
        out << cohort.ranking[r].name << ',' << format_double(cohort.ranking[r].score) << ',' << r + 1 << '\n';
    return out.str();
}

}  // namespace scalenet

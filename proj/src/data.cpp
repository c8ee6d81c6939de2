#include "scalenet/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "scalenet/rng.hpp"

namespace scalenet {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(trim(line.substr(start)));
            break;
        }
        out.push_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
    return out;
}

}  // namespace

std::string format_double(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

void Dataset::validate(bool require_all_classes) const {
    const Index p = num_features();
    const Index n = num_samples();
    if (static_cast<Index>(labels.size()) != n) {
        throw std::invalid_argument("dataset: labels length " + std::to_string(labels.size()) +
                                    " does not match sample count " + std::to_string(n));
    }
    if (static_cast<Index>(feature_names.size()) != p) {
        throw std::invalid_argument("dataset: feature name count does not match feature count");
    }
    const int C = num_classes();
    std::vector<int> counts(static_cast<std::size_t>(C), 0);
    for (int y : labels) {
        if (y < 0 || y >= C) throw std::invalid_argument("dataset: label " + std::to_string(y) + " out of range");
        ++counts[static_cast<std::size_t>(y)];
    }
    if (require_all_classes) {
        for (int c = 0; c < C; ++c) {
            if (counts[static_cast<std::size_t>(c)] == 0) {
                throw std::invalid_argument("dataset: class '" + class_names[static_cast<std::size_t>(c)] +
                                            "' has no samples");
            }
        }
    }
    if (!features.allFinite()) throw std::invalid_argument("dataset: non-finite feature value");
}

Dataset Dataset::subset(std::span<const Index> indices) const {
    Dataset out;
    out.features.resize(num_features(), static_cast<Index>(indices.size()));
    out.labels.reserve(indices.size());
    for (std::size_t j = 0; j < indices.size(); ++j) {
        out.features.col(static_cast<Index>(j)) = features.col(indices[j]);
        out.labels.push_back(labels[static_cast<std::size_t>(indices[j])]);
    }
    out.feature_names = feature_names;
    out.class_names = class_names;
    return out;
}

Dataset load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset file: " + path.string());

    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty dataset file: " + path.string());
    const auto header = split_commas(line);
    if (header.size() < 2 || header.back() != "label") {
        throw std::runtime_error("dataset header must have at least one feature and end with 'label'");
    }
    const std::size_t p = header.size() - 1;

    Dataset data;
    for (std::size_t i = 0; i < p; ++i) data.feature_names.emplace_back(header[i]);

    std::vector<double> values;
    std::map<std::string, int, std::less<>> class_ids;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        ++row;
        const auto cells = split_commas(line);
        if (cells.size() != header.size()) {
            throw std::runtime_error("row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                                     " columns, expected " + std::to_string(header.size()));
        }
        for (std::size_t c = 0; c < p; ++c) {
            const std::string_view cell = cells[c];
            double v = 0.0;
            const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
                throw std::runtime_error("non-numeric value at row " + std::to_string(row) + ", column " +
                                         std::to_string(c + 1));
            }
            if (!std::isfinite(v)) {
                throw std::runtime_error("non-finite value at row " + std::to_string(row) + ", column " +
                                         std::to_string(c + 1));
            }
            values.push_back(v);
        }
        const std::string_view name = cells.back();
        auto it = class_ids.find(name);
        if (it == class_ids.end()) {
            it = class_ids.emplace(std::string(name), static_cast<int>(data.class_names.size())).first;
            data.class_names.emplace_back(name);
        }
        data.labels.push_back(it->second);
    }
    if (row == 0) throw std::runtime_error("dataset has no samples: " + path.string());
    if (data.class_names.size() < 2) throw std::runtime_error("dataset has a single class: " + path.string());

    data.features = Eigen::Map<const Eigen::MatrixXd>(values.data(), static_cast<Index>(p), static_cast<Index>(row));
    data.validate();
    return data;
}

void save_csv(const Dataset& data, const std::filesystem::path& path) {
    data.validate(false);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write dataset file: " + path.string());
    for (const auto& name : data.feature_names) out << name << ',';
    out << "label\n";
    for (Index j = 0; j < data.num_samples(); ++j) {
        for (Index i = 0; i < data.num_features(); ++i) out << format_double(data.features(i, j)) << ',';
        out << data.class_names[static_cast<std::size_t>(data.labels[static_cast<std::size_t>(j)])] << '\n';
    }
}

Standardizer fit_standardizer(const Dataset& train, StandardizeMode mode) {
    const Index n = train.num_samples();
    if (n == 0) throw std::invalid_argument("fit_standardizer: empty training set");
    Standardizer s;
    s.means = train.features.rowwise().mean();
    s.stds.resize(train.num_features());
    for (Index i = 0; i < train.num_features(); ++i) {
        const double var = (train.features.row(i).array() - s.means(i)).square().mean();
        if (!(var > 0.0)) {
            throw std::invalid_argument("fit_standardizer: feature '" +
                                        train.feature_names[static_cast<std::size_t>(i)] + "' has zero variance");
        }
        s.stds(i) = mode == StandardizeMode::zscore ? std::sqrt(var) : 1.0;
    }
    return s;
}

Eigen::MatrixXd apply_standardizer(const Standardizer& standardizer, const Eigen::MatrixXd& features) {
    if (features.rows() != standardizer.means.size()) {
        throw std::invalid_argument("apply_standardizer: dimension mismatch (" + std::to_string(features.rows()) +
                                    " features, standardizer has " + std::to_string(standardizer.means.size()) + ")");
    }
    return ((features.colwise() - standardizer.means).array().colwise() / standardizer.stds.array()).matrix();
}

Dataset apply_standardizer(const Standardizer& standardizer, const Dataset& data) {
    Dataset out = data;
    out.features = apply_standardizer(standardizer, data.features);
    return out;
}

std::vector<Index> FoldPlan::train_indices(int fold) const {
    std::vector<Index> out;
    for (std::size_t i = 0; i < assignments.size(); ++i) {
        if (assignments[i] != fold) out.push_back(static_cast<Index>(i));
    }
    return out;
}

std::vector<Index> FoldPlan::test_indices(int fold) const {
    std::vector<Index> out;
    for (std::size_t i = 0; i < assignments.size(); ++i) {
        if (assignments[i] == fold) out.push_back(static_cast<Index>(i));
    }
    return out;
}

FoldPlan make_folds(std::span<const int> labels, int k, std::uint64_t seed) {
    if (k < 2) throw std::invalid_argument("make_folds: k must be at least 2");
    const int C = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
    std::vector<std::vector<Index>> by_class(static_cast<std::size_t>(C));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0) throw std::invalid_argument("make_folds: negative label");
        by_class[static_cast<std::size_t>(labels[i])].push_back(static_cast<Index>(i));
    }

    FoldPlan plan;
    plan.k = k;
    plan.seed = seed;
    plan.assignments.assign(labels.size(), -1);
    Rng rng(seed);
    // Rotating the starting fold across classes keeps total fold sizes even.
    int offset = 0;
    for (int c = 0; c < C; ++c) {
        auto& members = by_class[static_cast<std::size_t>(c)];
        if (members.empty()) continue;
        if (static_cast<int>(members.size()) < k) {
            throw std::invalid_argument("make_folds: class " + std::to_string(c) + " has " +
                                        std::to_string(members.size()) + " samples, fewer than k=" + std::to_string(k));
        }
        rng.shuffle(std::span<Index>(members));
        for (std::size_t i = 0; i < members.size(); ++i) {
            plan.assignments[static_cast<std::size_t>(members[i])] = static_cast<int>((offset + static_cast<int>(i)) % k);
        }
        offset = static_cast<int>((offset + members.size()) % static_cast<std::size_t>(k));
    }
    return plan;
}

namespace {

// K nearest neighbours of column `query` among `candidates` (excluding the
// query itself); equal distances resolve to the lower sample index.
std::vector<Index> nearest_neighbors(const Eigen::MatrixXd& x, Index query, std::span<const Index> candidates, int k) {
    std::vector<std::pair<double, Index>> dist;
    dist.reserve(candidates.size());
    for (Index j : candidates) {
        if (j == query) continue;
        dist.emplace_back((x.col(j) - x.col(query)).squaredNorm(), j);
    }
    const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(k), dist.size());
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(take), dist.end());
    std::vector<Index> out;
    out.reserve(take);
    for (std::size_t i = 0; i < take; ++i) out.push_back(dist[i].second);
    return out;
}

}  // namespace

OversampleResult adasyn_oversample(const Eigen::MatrixXd& features, std::span<const int> labels,
                                   const OversampleConfig& cfg) {
    const Index n = features.cols();
    if (static_cast<Index>(labels.size()) != n) throw std::invalid_argument("adasyn: labels/features size mismatch");
    if (cfg.neighbors < 1) throw std::invalid_argument("adasyn: neighbors must be >= 1");
    if (!(cfg.balance > 0.0 && cfg.balance <= 1.0)) throw std::invalid_argument("adasyn: balance must be in (0, 1]");

    const int C = n == 0 ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
    std::vector<std::vector<Index>> by_class(static_cast<std::size_t>(std::max(C, 0)));
    for (Index i = 0; i < n; ++i) by_class[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])].push_back(i);
    const auto present = std::count_if(by_class.begin(), by_class.end(), [](const auto& v) { return !v.empty(); });
    if (present < 2) throw std::invalid_argument("adasyn: need at least two classes");

    std::size_t majority = 0;
    for (const auto& members : by_class) majority = std::max(majority, members.size());

    std::vector<Index> all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), Index{0});

    Rng rng(cfg.seed);
    std::vector<Eigen::VectorXd> synthetic;
    std::vector<int> synthetic_labels;

    for (int m = 0; m < C; ++m) {
        const auto& members = by_class[static_cast<std::size_t>(m)];
        if (members.empty() || members.size() >= majority) continue;
        if (static_cast<int>(members.size()) <= cfg.neighbors) {
            throw std::invalid_argument("adasyn: class " + std::to_string(m) + " has " +
                                        std::to_string(members.size()) + " samples, need more than K=" +
                                        std::to_string(cfg.neighbors));
        }
        const double total = std::round(static_cast<double>(majority - members.size()) * cfg.balance);

        std::vector<double> ratio(members.size());
        for (std::size_t i = 0; i < members.size(); ++i) {
            const auto nn = nearest_neighbors(features, members[i], all, cfg.neighbors);
            const auto foreign = std::count_if(nn.begin(), nn.end(),
                                               [&](Index j) { return labels[static_cast<std::size_t>(j)] != m; });
            ratio[i] = static_cast<double>(foreign) / static_cast<double>(cfg.neighbors);
        }
        const double ratio_sum = std::accumulate(ratio.begin(), ratio.end(), 0.0);
        for (std::size_t i = 0; i < members.size(); ++i) {
            const double weight = ratio_sum > 0.0 ? ratio[i] / ratio_sum : 1.0 / static_cast<double>(members.size());
            const auto count = static_cast<long>(std::round(weight * total));
            if (count <= 0) continue;
            const Index xi = members[i];
            const auto same = nearest_neighbors(features, xi, members, cfg.neighbors);
            for (long g = 0; g < count; ++g) {
                const Index xz = same[rng.index(same.size())];
                const double delta = rng.uniform();
                synthetic.emplace_back(features.col(xi) + delta * (features.col(xz) - features.col(xi)));
                synthetic_labels.push_back(m);
            }
        }
    }

    OversampleResult out;
    out.features.resize(features.rows(), n + static_cast<Index>(synthetic.size()));
    out.features.leftCols(n) = features;
    for (std::size_t s = 0; s < synthetic.size(); ++s) out.features.col(n + static_cast<Index>(s)) = synthetic[s];
    out.labels.assign(labels.begin(), labels.end());
    out.labels.insert(out.labels.end(), synthetic_labels.begin(), synthetic_labels.end());
    return out;
}

}  // namespace scalenet

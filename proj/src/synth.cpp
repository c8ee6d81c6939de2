#include "scalenet/synth.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "scalenet/rng.hpp"

namespace scalenet {

void SynthSpec::validate() const {
    if (p < 1 || n < 1 || num_classes < 2) throw std::invalid_argument("synth: need p >= 1, n >= 1, classes >= 2");
    if (informative_components < 0 || informative_components > p) {
        throw std::invalid_argument("synth: informative_components must be in [0, p]");
    }
    if (!(signal_strength >= 0.0) || !(noise_std >= 0.0)) {
        throw std::invalid_argument("synth: signal_strength and noise_std must be non-negative");
    }
    if (!class_priors.empty()) {
        if (static_cast<int>(class_priors.size()) != num_classes) {
            throw std::invalid_argument("synth: class_priors length must equal number of classes");
        }
        for (double w : class_priors) {
            if (!(w > 0.0)) throw std::invalid_argument("synth: class priors must be positive");
        }
    }
}

std::vector<Index> synth_class_counts(const SynthSpec& spec) {
    std::vector<double> w = spec.class_priors;
    if (w.empty()) {
        w.assign(static_cast<std::size_t>(spec.num_classes), 1.0);
        w[0] = 2.0;
    }
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    std::vector<Index> counts(w.size());
    Index assigned = 0;
    for (std::size_t c = 0; c < w.size(); ++c) {
        counts[c] = static_cast<Index>(std::floor(static_cast<double>(spec.n) * w[c] / total));
        assigned += counts[c];
    }
    // Remainder goes to the earliest classes.
    for (std::size_t c = 0; assigned < spec.n; c = (c + 1) % counts.size(), ++assigned) ++counts[c];
    return counts;
}

SyntheticData synth_generate_with_truth(const SynthSpec& spec) {
    spec.validate();
    Rng rng(derive_seed(spec.seed, "synth"));
    const Index p = spec.p;

    SyntheticData out;
    if (spec.basis == SynthBasis::random) {
        Eigen::MatrixXd g(p, p);
        for (Index i = 0; i < g.size(); ++i) g.data()[i] = rng.normal();
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
        Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(p, p);
        const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
        for (Index k = 0; k < p; ++k) {
            if (r(k, k) < 0.0) q.col(k) = -q.col(k);
        }
        out.basis = std::move(q);
    } else {
        std::vector<Index> perm(static_cast<std::size_t>(p));
        std::iota(perm.begin(), perm.end(), Index{0});
        rng.shuffle(std::span<Index>(perm));
        out.basis = Eigen::MatrixXd::Zero(p, p);
        for (Index k = 0; k < p; ++k) out.basis(perm[static_cast<std::size_t>(k)], k) = 1.0;
        out.informative_features.assign(perm.begin(), perm.begin() + spec.informative_components);
    }

    Eigen::VectorXd sigma(p);
    for (Index k = 0; k < p; ++k) {
        const double t = p > 1 ? static_cast<double>(k) / static_cast<double>(p - 1) : 0.0;
        sigma(k) = spec.noise_std * std::pow(4.0, -t);
    }

    const auto counts = synth_class_counts(spec);
    Dataset& data = out.data;
    data.features.resize(p, spec.n);
    data.labels.reserve(static_cast<std::size_t>(spec.n));
    for (Index i = 0; i < p; ++i) data.feature_names.push_back("f" + std::to_string(i));
    for (int c = 0; c < spec.num_classes; ++c) data.class_names.push_back("c" + std::to_string(c));

    Index col = 0;
    for (int c = 0; c < spec.num_classes; ++c) {
        Eigen::VectorXd coeff_mean = Eigen::VectorXd::Zero(p);
        for (Index d = 0; d < spec.informative_components; ++d) {
            coeff_mean(d) = (d % spec.num_classes == c ? 1.0 : -1.0) * spec.signal_strength;
        }
        for (Index s = 0; s < counts[static_cast<std::size_t>(c)]; ++s, ++col) {
            Eigen::VectorXd z(p);
            for (Index k = 0; k < p; ++k) z(k) = coeff_mean(k) + sigma(k) * rng.normal();
            data.features.col(col) = out.basis * z;
            data.labels.push_back(c);
        }
    }
    return out;
}

Dataset synth_generate(const SynthSpec& spec) { return synth_generate_with_truth(spec).data; }

}  // namespace scalenet

#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "scalenet/data.hpp"

namespace scalenet {

enum class SynthBasis {
    random,    // class signal lives on random orthonormal directions
    identity,  // signal lives on individual features (planted-feature tests)
};

struct SynthSpec {
    Index p = 40;
    Index n = 200;
    int num_classes = 2;
    Index informative_components = 4;
    double signal_strength = 2.0;
    double noise_std = 1.0;
    /// Relative class weights; empty means 2:1:1:... (class 0 is the majority).
    std::vector<double> class_priors;
    SynthBasis basis = SynthBasis::random;
    std::uint64_t seed = 0;

    void validate() const;
};

struct SyntheticData {
    Dataset data;
    Eigen::MatrixXd basis;                     // p x p orthonormal
    std::vector<Index> informative_features;   // identity basis only
};

/// Samples x = mu_c + V * (sigma .* z). The class means mu_c put
/// +/- signal_strength on the first `informative_components` columns of the
/// orthonormal basis V; the sign of direction d is + for class d mod C and -
/// otherwise. Noise scales sigma decay log-linearly from noise_std to
/// noise_std/4 across directions, so the informative directions lead the
/// covariance spectrum. Samples are grouped by class.
SyntheticData synth_generate_with_truth(const SynthSpec& spec);
Dataset synth_generate(const SynthSpec& spec);

/// Integer class sizes for `n` samples under `class_priors`.
std::vector<Index> synth_class_counts(const SynthSpec& spec);

}  // namespace scalenet

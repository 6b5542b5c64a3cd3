#pragma once

#include "hiernet/types.hpp"

#include <array>

namespace hiernet {

enum class MainSupport { Prefix, Random };

struct DataGenConfig {
    int n_features = 30;
    int n_nonzero_main = 10;
    double interaction_ratio = 0.0345;  // fraction of the N(N-1)/2 interactions
    int n_samples_per_split = 100;
    double target_snr_db = 5.0;  // +inf means noiseless
    std::uint64_t seed = 0;
    MainSupport main_support = MainSupport::Prefix;

    void validate() const;
};

/// Sparse truth with strong-hierarchy structure: interactions live inside the
/// nonzero-main block and theta_bar is symmetric with zero diagonal.
struct GroundTruth {
    Vector v_bar;
    Matrix theta_bar;
};

struct GeneratedSplits {
    Dataset train;
    Dataset validation;
    Dataset test;
    /// Empirical SNR per split in dB (train, validation, test); NaN when the
    /// signal has zero variance and the dataset falls back to unit noise.
    std::array<double, 3> empirical_snr_db;
    bool snr_defined = true;
};

/// Nonzero main effects drawn from {-5,...,-1,1,...,5}; interaction values from
/// {-10,-8,...,-2,2,...,8,10} placed on round(rho * N(N-1)/2) upper-triangle
/// positions inside the nonzero-main block. Throws when rho asks for more
/// interactions than that block can host.
GroundTruth generate_ground_truth(const DataGenConfig& cfg);

/// x_l ~ N(0, I_N); y_l = x_l^T v_bar + x_l^T Theta_bar x_l + eps_l with the
/// noise rescaled per split so the empirical SNR matches target_snr_db exactly.
GeneratedSplits generate_dataset(const GroundTruth& truth, const DataGenConfig& cfg);

/// The two synthetic presets used throughout: N=30 with 10 nonzero mains and
/// rho=3.45%, and N=100 with 30 nonzero mains and rho=0.30%.
DataGenConfig preset_dataset30(std::uint64_t seed);
DataGenConfig preset_dataset100(std::uint64_t seed);

}  // namespace hiernet

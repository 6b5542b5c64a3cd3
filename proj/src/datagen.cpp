#include "hiernet/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

namespace hiernet {

namespace {

// Independent sub-streams for the truth and the three splits.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t x = seed ^ (0x9E3779B97F4A7C15ULL * (stream + 1));
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

double sample_variance(const Vector& x) {
    if (x.size() < 2) return 0.0;
    const double mean = x.mean();
    return (x.array() - mean).square().sum() / static_cast<double>(x.size() - 1);
}

Dataset make_split(const GroundTruth& truth, const DataGenConfig& cfg,
                   std::uint64_t stream, SplitRole role, double& snr_db_out,
                   bool& snr_defined) {
    const Eigen::Index n = truth.v_bar.size();
    const Eigen::Index L = cfg.n_samples_per_split;
    std::mt19937_64 rng(mix_seed(cfg.seed, stream));
    std::normal_distribution<double> gauss(0.0, 1.0);

    Matrix X(L, n);
    for (Eigen::Index l = 0; l < L; ++l) {
        for (Eigen::Index j = 0; j < n; ++j) X(l, j) = gauss(rng);
    }
    Vector signal = X * truth.v_bar + (X * truth.theta_bar).cwiseProduct(X).rowwise().sum();

    if (std::isinf(cfg.target_snr_db)) {
        snr_db_out = std::numeric_limits<double>::infinity();
        return Dataset(std::move(X), std::move(signal), role);
    }

    Vector noise(L);
    for (Eigen::Index l = 0; l < L; ++l) noise[l] = gauss(rng);
    // Exact empirical unit variance so the realized SNR matches the target.
    const double noise_sd = std::sqrt(sample_variance(noise));
    if (noise_sd > 0.0) {
        noise = (noise.array() - noise.mean()) / noise_sd;
    }

    const double sig_var = sample_variance(signal);
    double noise_var = 1.0;  // convention for a degenerate signal
    if (sig_var > 0.0) {
        noise_var = sig_var / std::pow(10.0, cfg.target_snr_db / 10.0);
        snr_db_out = 10.0 * std::log10(sig_var / noise_var);
    } else {
        snr_db_out = std::numeric_limits<double>::quiet_NaN();
        snr_defined = false;
    }
    Vector y = signal + std::sqrt(noise_var) * noise;
    return Dataset(std::move(X), std::move(y), role);
}

}  // namespace

void DataGenConfig::validate() const {
    if (n_features < 1) {
        throw ContractError("DataGenConfig.n_features: must be >= 1");
    }
    if (n_nonzero_main < 0 || n_nonzero_main > n_features) {
        throw ContractError("DataGenConfig.n_nonzero_main: must be in [0, n_features]");
    }
    if (!(interaction_ratio >= 0.0) || !(interaction_ratio <= 1.0)) {
        throw ContractError("DataGenConfig.interaction_ratio: must be in [0, 1]");
    }
    if (n_samples_per_split < 1) {
        throw ContractError("DataGenConfig.n_samples_per_split: must be >= 1");
    }
    if (std::isnan(target_snr_db)) {
        throw ContractError("DataGenConfig.target_snr_db: must not be NaN");
    }
}

GroundTruth generate_ground_truth(const DataGenConfig& cfg) {
    cfg.validate();
    const int n = cfg.n_features;
    const int k = cfg.n_nonzero_main;
    std::mt19937_64 rng(mix_seed(cfg.seed, 0));

    std::vector<int> support(n);
    std::iota(support.begin(), support.end(), 0);
    if (cfg.main_support == MainSupport::Random) {
        std::shuffle(support.begin(), support.end(), rng);
    }
    support.resize(k);
    std::sort(support.begin(), support.end());

    static constexpr double kMainValues[] = {-5, -4, -3, -2, -1, 1, 2, 3, 4, 5};
    static constexpr double kInterValues[] = {-10, -8, -6, -4, -2, 2, 4, 6, 8, 10};
    std::uniform_int_distribution<int> pick(0, 9);

    Vector v_bar = Vector::Zero(n);
    for (int idx : support) v_bar[idx] = kMainValues[pick(rng)];

    const auto total_pairs = static_cast<double>(n) * (n - 1) / 2.0;
    const auto target = static_cast<std::int64_t>(std::llround(cfg.interaction_ratio * total_pairs));
    const std::int64_t available = static_cast<std::int64_t>(k) * (k - 1) / 2;
    if (target > available) {
        throw ContractError("generate_ground_truth: interaction_ratio asks for " +
                            std::to_string(target) + " interactions but only " +
                            std::to_string(available) +
                            " pairs have both main effects nonzero");
    }

    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(static_cast<std::size_t>(available));
    for (std::size_t a = 0; a < support.size(); ++a) {
        for (std::size_t c = a + 1; c < support.size(); ++c) {
            pairs.emplace_back(support[a], support[c]);
        }
    }
    std::shuffle(pairs.begin(), pairs.end(), rng);

    Matrix theta_bar = Matrix::Zero(n, n);
    for (std::int64_t t = 0; t < target; ++t) {
        const auto [i, j] = pairs[static_cast<std::size_t>(t)];
        const double value = kInterValues[pick(rng)];
        theta_bar(i, j) = value;
        theta_bar(j, i) = value;
    }
    return GroundTruth{std::move(v_bar), std::move(theta_bar)};
}

GeneratedSplits generate_dataset(const GroundTruth& truth, const DataGenConfig& cfg) {
    cfg.validate();
    if (truth.v_bar.size() != cfg.n_features || truth.theta_bar.rows() != cfg.n_features ||
        truth.theta_bar.cols() != cfg.n_features) {
        throw DimensionError("generate_dataset: truth does not match n_features");
    }
    bool snr_defined = true;
    std::array<double, 3> snr{};
    Dataset train = make_split(truth, cfg, 1, SplitRole::Train, snr[0], snr_defined);
    Dataset val = make_split(truth, cfg, 2, SplitRole::Validation, snr[1], snr_defined);
    Dataset test = make_split(truth, cfg, 3, SplitRole::Test, snr[2], snr_defined);
    return GeneratedSplits{std::move(train), std::move(val), std::move(test), snr,
                           snr_defined};
}

DataGenConfig preset_dataset30(std::uint64_t seed) {
    DataGenConfig cfg;
    cfg.n_features = 30;
    cfg.n_nonzero_main = 10;
    cfg.interaction_ratio = 0.0345;
    cfg.seed = seed;
    return cfg;
}

DataGenConfig preset_dataset100(std::uint64_t seed) {
    DataGenConfig cfg;
    cfg.n_features = 100;
    cfg.n_nonzero_main = 30;
    cfg.interaction_ratio = 0.0030;
    cfg.seed = seed;
    return cfg;
}

}  // namespace hiernet

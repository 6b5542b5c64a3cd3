#pragma once

#include "hiernet/datagen.hpp"
#include "hiernet/types.hpp"

#include <string>
#include <vector>

namespace hiernet {

/// (1/L) sum_l (y_l - x_l^T v - x_l^T Theta x_l)^2.
double mse(const ModelParams& params, const Dataset& data);

struct CvRecord {
    double lambda = 0.0;
    double train_mean = 0.0, train_std = 0.0;
    double val_mean = 0.0, val_std = 0.0;
    double test_mean = 0.0, test_std = 0.0;
    int n_ok = 0;  // seeds that completed (divergent cells are excluded)
};

struct CvResult {
    std::vector<CvRecord> per_lambda;  // ascending lambda
    double best_lambda = 0.0;          // argmin mean val MSE, ties -> smaller
    std::vector<std::string> warnings;
};

struct CvOptions {
    std::int64_t max_iters = 30000;
    double tol_objective = 1e-7;
    double tol_iterate = 1e-7;
    /// Rescale responses of all three splits by the train split's sample
    /// standard deviation before fitting and scoring.
    bool standardize_responses = true;
    /// 0 = use HIERNET_THREADS, falling back to hardware concurrency.
    int threads = 0;
    std::uint64_t solver_seed = 0;
    std::int64_t trace_stride = 1000;
};

/// Regenerates the synthetic data per seed (gen.seed + s for s in [0, n_seeds))
/// and fits every lambda of the grid on each train split. The grid is sorted
/// internally; cells run concurrently with a deterministic reduction order.
CvResult cross_validate(const DataGenConfig& gen, const RegConfig& reg_template,
                        const std::vector<double>& lambda_grid, int n_seeds,
                        const CvOptions& opts = {});

/// Fixed-data variant: one fit per lambda on the provided splits.
CvResult cross_validate(const Dataset& train, const Dataset& validation,
                        const Dataset& test, const RegConfig& reg_template,
                        const std::vector<double>& lambda_grid,
                        const CvOptions& opts = {});

/// OR-reduction of bin_size adjacent binary columns; output has
/// ceil(N/bin_size) features. Throws on entries outside {0,1}.
Dataset bin_features(const Dataset& raw, int bin_size);

/// Random permutation split; the first ceil(L/2) samples form the train half.
std::pair<Dataset, Dataset> half_split(const Dataset& data, std::uint64_t seed);

}  // namespace hiernet

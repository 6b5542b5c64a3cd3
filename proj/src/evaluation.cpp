#include "hiernet/evaluation.hpp"

#include "hiernet/objective.hpp"
#include "hiernet/solver.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <thread>

namespace hiernet {

namespace {

struct CellResult {
    bool ok = false;
    double train_mse = 0.0, val_mse = 0.0, test_mse = 0.0;
    std::string warning;
};

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("HIERNET_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

Dataset scaled_responses(const Dataset& data, double factor) {
    return Dataset(data.features(), data.responses() / factor, data.role());
}

double train_sd(const Dataset& train) {
    const Vector& y = train.responses();
    if (y.size() < 2) return 1.0;
    const double mean = y.mean();
    const double var = (y.array() - mean).square().sum() / static_cast<double>(y.size() - 1);
    return var > 0.0 ? std::sqrt(var) : 1.0;
}

CellResult fit_and_score(const Dataset& train, const Dataset& val, const Dataset& test,
                         RegConfig reg, double lambda, const CvOptions& opts) {
    CellResult cell;
    reg.lambda = lambda;
    try {
        const SplittingSpec spec = reg.hierarchy == Hierarchy::Weak
                                       ? SplittingSpec::weak(reg.norm_r)
                                       : SplittingSpec::strong(reg.norm_r);
        const double beta = estimate_beta(train);
        const auto [tau, sigma] = default_steps(beta, spec);
        SolverConfig cfg(tau, sigma, beta, spec.op_norm, opts.max_iters,
                         opts.tol_objective, opts.tol_iterate, opts.solver_seed,
                         opts.trace_stride);
        const SolveReport report = reg.hierarchy == Hierarchy::Weak
                                       ? solve_weak(train, reg, cfg)
                                       : solve_strong(train, reg, cfg);
        cell.train_mse = mse(report.final_params, train);
        cell.val_mse = mse(report.final_params, val);
        cell.test_mse = mse(report.final_params, test);
        cell.ok = true;
    } catch (const Error& e) {
        cell.warning = std::string("lambda ") + std::to_string(lambda) + ": " + e.what();
    }
    return cell;
}

void run_cells(int threads, std::size_t n_cells,
               const std::function<void(std::size_t)>& work) {
    if (threads <= 1 || n_cells <= 1) {
        for (std::size_t c = 0; c < n_cells; ++c) work(c);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t c = next.fetch_add(1);
            if (c >= n_cells) return;
            work(c);
        }
    };
    std::vector<std::thread> pool;
    const int n_workers = std::min<int>(threads, static_cast<int>(n_cells));
    pool.reserve(static_cast<std::size_t>(n_workers));
    for (int t = 0; t < n_workers; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

CvResult reduce_cells(const std::vector<double>& grid, int n_seeds,
                      const std::vector<CellResult>& cells) {
    CvResult result;
    result.per_lambda.reserve(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g) {
        CvRecord rec;
        rec.lambda = grid[g];
        std::vector<double> tr, va, te;
        for (int s = 0; s < n_seeds; ++s) {
            const CellResult& cell = cells[g * static_cast<std::size_t>(n_seeds) +
                                           static_cast<std::size_t>(s)];
            if (!cell.ok) {
                if (!cell.warning.empty()) {
                    result.warnings.push_back("seed " + std::to_string(s) + ", " +
                                              cell.warning);
                }
                continue;
            }
            tr.push_back(cell.train_mse);
            va.push_back(cell.val_mse);
            te.push_back(cell.test_mse);
        }
        auto stats = [](const std::vector<double>& xs, double& mean, double& sd) {
            if (xs.empty()) {
                mean = std::numeric_limits<double>::quiet_NaN();
                sd = std::numeric_limits<double>::quiet_NaN();
                return;
            }
            mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
            double ss = 0.0;
            for (double x : xs) ss += (x - mean) * (x - mean);
            sd = xs.size() > 1 ? std::sqrt(ss / static_cast<double>(xs.size() - 1)) : 0.0;
        };
        rec.n_ok = static_cast<int>(va.size());
        stats(tr, rec.train_mean, rec.train_std);
        stats(va, rec.val_mean, rec.val_std);
        stats(te, rec.test_mean, rec.test_std);
        result.per_lambda.push_back(rec);
    }

    // Ties break toward the smaller lambda (grid is ascending).
    double best = std::numeric_limits<double>::infinity();
    result.best_lambda = result.per_lambda.empty() ? 0.0 : result.per_lambda.front().lambda;
    for (const CvRecord& rec : result.per_lambda) {
        if (rec.n_ok > 0 && rec.val_mean < best) {
            best = rec.val_mean;
            result.best_lambda = rec.lambda;
        }
    }
    return result;
}

std::vector<double> sorted_grid(std::vector<double> grid) {
    if (grid.empty()) {
        throw ContractError("cross_validate: lambda grid must be nonempty");
    }
    for (double l : grid) {
        if (!(l >= 0.0) || !std::isfinite(l)) {
            throw ContractError("cross_validate: lambda grid entries must be finite and >= 0");
        }
    }
    std::sort(grid.begin(), grid.end());
    return grid;
}

}  // namespace

double mse(const ModelParams& params, const Dataset& data) {
    const Vector b = residuals(params, data);
    return b.squaredNorm() / static_cast<double>(b.size());
}

CvResult cross_validate(const DataGenConfig& gen, const RegConfig& reg_template,
                        const std::vector<double>& lambda_grid, int n_seeds,
                        const CvOptions& opts) {
    if (n_seeds < 1) {
        throw ContractError("cross_validate: n_seeds must be >= 1");
    }
    reg_template.validate();
    const std::vector<double> grid = sorted_grid(lambda_grid);

    // Each seed gets its own truth and splits, standardized once up front so
    // cells only pay for the solve.
    struct SeedData {
        Dataset train, val, test;
    };
    std::vector<SeedData> seeds;
    seeds.reserve(static_cast<std::size_t>(n_seeds));
    for (int s = 0; s < n_seeds; ++s) {
        DataGenConfig cfg = gen;
        cfg.seed = gen.seed + static_cast<std::uint64_t>(s);
        GroundTruth truth = generate_ground_truth(cfg);
        GeneratedSplits sp = generate_dataset(truth, cfg);
        const double scale = opts.standardize_responses ? train_sd(sp.train) : 1.0;
        seeds.push_back(SeedData{scaled_responses(sp.train, scale),
                                 scaled_responses(sp.validation, scale),
                                 scaled_responses(sp.test, scale)});
    }

    const std::size_t n_cells = grid.size() * static_cast<std::size_t>(n_seeds);
    std::vector<CellResult> cells(n_cells);
    run_cells(resolve_threads(opts.threads), n_cells, [&](std::size_t c) {
        const std::size_t g = c / static_cast<std::size_t>(n_seeds);
        const std::size_t s = c % static_cast<std::size_t>(n_seeds);
        const SeedData& sd = seeds[s];
        cells[c] = fit_and_score(sd.train, sd.val, sd.test, reg_template, grid[g], opts);
    });
    return reduce_cells(grid, n_seeds, cells);
}

CvResult cross_validate(const Dataset& train, const Dataset& validation,
                        const Dataset& test, const RegConfig& reg_template,
                        const std::vector<double>& lambda_grid, const CvOptions& opts) {
    reg_template.validate();
    if (train.n_features() != validation.n_features() ||
        train.n_features() != test.n_features()) {
        throw DimensionError("cross_validate: splits disagree on feature count");
    }
    const std::vector<double> grid = sorted_grid(lambda_grid);
    const double scale = opts.standardize_responses ? train_sd(train) : 1.0;
    const Dataset tr = scaled_responses(train, scale);
    const Dataset va = scaled_responses(validation, scale);
    const Dataset te = scaled_responses(test, scale);

    std::vector<CellResult> cells(grid.size());
    run_cells(resolve_threads(opts.threads), grid.size(), [&](std::size_t g) {
        cells[g] = fit_and_score(tr, va, te, reg_template, grid[g], opts);
    });
    return reduce_cells(grid, 1, cells);
}

Dataset bin_features(const Dataset& raw, int bin_size) {
    if (bin_size < 1) {
        throw ContractError("bin_features: bin_size must be >= 1");
    }
    const Matrix& X = raw.features();
    for (Eigen::Index l = 0; l < X.rows(); ++l) {
        for (Eigen::Index j = 0; j < X.cols(); ++j) {
            if (X(l, j) != 0.0 && X(l, j) != 1.0) {
                throw ContractError("bin_features: entry at row " + std::to_string(l) +
                                    ", column " + std::to_string(j) +
                                    " is not binary: " + std::to_string(X(l, j)));
            }
        }
    }
    const Eigen::Index n_out = (X.cols() + bin_size - 1) / bin_size;
    Matrix out = Matrix::Zero(X.rows(), n_out);
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        const Eigen::Index bin = j / bin_size;
        for (Eigen::Index l = 0; l < X.rows(); ++l) {
            if (X(l, j) != 0.0) out(l, bin) = 1.0;
        }
    }
    return Dataset(std::move(out), raw.responses(), raw.role());
}

std::pair<Dataset, Dataset> half_split(const Dataset& data, std::uint64_t seed) {
    const Eigen::Index L = data.n_samples();
    if (L < 2) {
        throw ContractError("half_split: need at least 2 samples");
    }
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(L));
    std::iota(perm.begin(), perm.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(perm.begin(), perm.end(), rng);

    const Eigen::Index n_train = (L + 1) / 2;
    Matrix tr_x(n_train, data.n_features()), te_x(L - n_train, data.n_features());
    Vector tr_y(n_train), te_y(L - n_train);
    for (Eigen::Index i = 0; i < n_train; ++i) {
        tr_x.row(i) = data.features().row(perm[static_cast<std::size_t>(i)]);
        tr_y[i] = data.responses()[perm[static_cast<std::size_t>(i)]];
    }
    for (Eigen::Index i = n_train; i < L; ++i) {
        te_x.row(i - n_train) = data.features().row(perm[static_cast<std::size_t>(i)]);
        te_y[i - n_train] = data.responses()[perm[static_cast<std::size_t>(i)]];
    }
    return {Dataset(std::move(tr_x), std::move(tr_y), SplitRole::Train),
            Dataset(std::move(te_x), std::move(te_y), SplitRole::Test)};
}

}  // namespace hiernet

#include "hiernet/types.hpp"

#include <cmath>

namespace hiernet {

Dataset::Dataset(Matrix features, Vector responses, SplitRole role)
    : features_(std::move(features)), responses_(std::move(responses)), role_(role) {
    if (features_.rows() < 1 || features_.cols() < 1) {
        throw DimensionError("Dataset.features: need at least 1 sample and 1 feature, got " +
                             std::to_string(features_.rows()) + "x" +
                             std::to_string(features_.cols()));
    }
    if (features_.rows() != responses_.size()) {
        throw DimensionError("Dataset.responses: length " + std::to_string(responses_.size()) +
                             " does not match features row count " +
                             std::to_string(features_.rows()));
    }
    if (!features_.allFinite()) {
        throw ContractError("Dataset.features: non-finite entry");
    }
    if (!responses_.allFinite()) {
        throw ContractError("Dataset.responses: non-finite entry");
    }
}

ModelParams ModelParams::zero(Eigen::Index n) {
    return ModelParams{Vector::Zero(n), Vector::Zero(n), Matrix::Zero(n, n)};
}

void RegConfig::validate() const {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw ContractError("RegConfig.lambda: must be finite and >= 0, got " +
                            std::to_string(lambda));
    }
}

DualState DualState::zero(Eigen::Index n, Hierarchy mode) {
    DualState state{Vector::Zero(n), Vector::Zero(n), Matrix::Zero(n, n), std::nullopt};
    if (mode == Hierarchy::Strong) {
        state.lambda_mat_2 = Matrix::Zero(n, n);
    }
    return state;
}

SolverConfig::SolverConfig(double tau_, double sigma_, double beta_, double op_norm_,
                           std::int64_t max_iters_, double tol_objective_,
                           double tol_iterate_, std::uint64_t seed_,
                           std::int64_t trace_stride_)
    : tau(tau_),
      sigma(sigma_),
      beta(beta_),
      op_norm(op_norm_),
      max_iters(max_iters_),
      tol_objective(tol_objective_),
      tol_iterate(tol_iterate_),
      seed(seed_),
      trace_stride(trace_stride_) {
    validate();
}

void SolverConfig::validate() const {
    if (!(tau > 0.0) || !(sigma > 0.0) || !(op_norm > 0.0) || beta < 0.0) {
        throw StepSizeError("SolverConfig: tau, sigma, op_norm must be positive and beta >= 0");
    }
    if (max_iters < 1) {
        throw ContractError("SolverConfig.max_iters: must be >= 1");
    }
    if (tol_objective < 0.0 || tol_iterate < 0.0) {
        throw ContractError("SolverConfig: tolerances must be >= 0");
    }
    if (trace_stride < 1) {
        throw ContractError("SolverConfig.trace_stride: must be >= 1");
    }
    const double slack = 1.0 / tau - sigma * op_norm * op_norm - beta / 2.0;
    if (!(slack >= -1e-12)) {
        throw StepSizeError("SolverConfig: 1/tau - sigma*|H|^2 >= beta/2 violated (slack " +
                            std::to_string(slack) + ")");
    }
}

}  // namespace hiernet

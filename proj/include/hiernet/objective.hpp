#pragma once

#include "hiernet/types.hpp"

namespace hiernet {

struct Gradients {
    Vector v_plus;
    Vector v_minus;
    Matrix theta;
};

/// Residuals b_l = y_l - x_l^T(v+ - v-) - x_l^T Theta x_l, l ascending.
Vector residuals(const ModelParams& params, const Dataset& data);

/// Row norm |Theta^(i,.)|_r used by the coupling constraints.
double row_norm(const Eigen::Ref<const Eigen::RowVectorXd>& row, Norm r);

/// Objective in the max-penalty form:
///   1/2 sum b_l^2 + lambda/2 |Theta|_1 + lambda sum_i max{|v_i|, |Theta^(i,.)|_r}
/// with v = v+ - v-. Returns +inf in Strong mode when Theta is not symmetric
/// (relative Frobenius tolerance 1e-9).
double evaluate_objective(const ModelParams& params, const Dataset& data,
                          const RegConfig& reg);

/// Objective in the epigraph form:
///   1/2 sum b_l^2 + lambda/2 |Theta|_1 + lambda 1^T(v+ + v-)
/// Returns +inf when any row violates |Theta^(i,.)|_r <= v+_i + v-_i by more
/// than 1e-9 (absolute), or in Strong mode when Theta is not symmetric.
double evaluate_objective_epi(const ModelParams& params, const Dataset& data,
                              const RegConfig& reg);

/// Gradient of the smooth part f = quadratic loss + lambda 1^T(v+ + v-).
Gradients gradient_f(const ModelParams& params, const Dataset& data,
                     const RegConfig& reg);

/// Lipschitz constant of grad f: the largest eigenvalue of Phi^T Phi, where Phi
/// is the linear map (v+, v-, Theta) -> predictions. Computed by power iteration
/// on the L x L Gram matrix 2*X*X^T + (X*X^T)^{o2} to relative change 1e-8
/// (at most 1000 iterations).
double estimate_beta(const Dataset& data);

namespace detail {
/// Shared penalty arithmetic for the max-penalty objective; symmetry and
/// feasibility guards live in the public evaluators.
double objective_core(const Vector& b, const ModelParams& params, const RegConfig& reg);
void check_dims(const ModelParams& params, const Dataset& data, const char* where);
bool symmetric_within(const Matrix& theta, double rel_tol);
}  // namespace detail

}  // namespace hiernet

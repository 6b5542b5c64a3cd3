#pragma once

#include "hiernet/objective.hpp"
#include "hiernet/types.hpp"

#include <utility>

namespace hiernet {

/// Identifies which splitting of the composite objective a run uses and the
/// operator norm of its dual coupling map H (1 for Weak, sqrt(2) for Strong,
/// where Theta feeds two dual blocks).
struct SplittingSpec {
    Hierarchy mode = Hierarchy::Weak;
    Norm norm_r = Norm::L1;
    double op_norm = 1.0;

    static SplittingSpec weak(Norm r);
    static SplittingSpec strong(Norm r);

    void validate() const;
};

/// tau for a given sigma from 1/tau = 1.01 * (beta/2 + sigma*|H|^2).
double step_tau_for_sigma(double beta, double sigma, double op_norm);

/// Default step sizes: sigma = 0.99/|H|^2 and tau = min(tau(sigma), sigma).
/// The returned pair satisfies 1/tau - sigma*|H|^2 >= 1.01 * beta/2.
std::pair<double, double> default_steps(double beta, const SplittingSpec& spec);

/// 2*current - previous; shapes must match.
Vector extrapolate(const Vector& current, const Vector& previous);
Matrix extrapolate(const Matrix& current, const Matrix& previous);

/// Primal-dual splitting iteration for the weak hierarchy (C = R^{NxN}):
/// orthant projections on v+/-, soft-thresholding on Theta, per-row
/// conjugate-prox of the epigraph indicator at the extrapolated point.
SolveReport solve_weak(const Dataset& data, const RegConfig& reg,
                       const SolverConfig& cfg);
SolveReport solve_weak(const Dataset& data, const RegConfig& reg,
                       const SolverConfig& cfg, const ModelParams& init_params,
                       const DualState& init_dual);

/// Strong hierarchy counterpart (C = S): Theta is projected onto the symmetric
/// matrices, the l1 term moves to a dual block handled by the conjugate prox
/// (clamping to [-lambda/2, lambda/2]), and the epigraph dual becomes Lambda_2.
SolveReport solve_strong(const Dataset& data, const RegConfig& reg,
                         const SolverConfig& cfg);
SolveReport solve_strong(const Dataset& data, const RegConfig& reg,
                         const SolverConfig& cfg, const ModelParams& init_params,
                         const DualState& init_dual);

}  // namespace hiernet

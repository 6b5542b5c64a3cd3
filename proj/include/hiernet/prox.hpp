#pragma once

#include "hiernet/types.hpp"

namespace hiernet {

/// A point of R x R x R^M fed to the epigraphical projections.
struct EpiPoint {
    double omega_plus = 0.0;
    double omega_minus = 0.0;
    Vector u;
};

/// P_O: componentwise max{0, .}.
Vector project_orthant(const Vector& x);

/// P_S: (Theta + Theta^T)/2. Throws DimensionError on non-square input.
Matrix project_symmetric(const Matrix& theta);

/// Soft-thresholding sign(x) * max(|x| - gamma, 0), gamma >= 0.
Vector prox_l1(const Vector& x, double gamma);
Matrix prox_l1(const Matrix& x, double gamma);

/// Projection onto E_inf = {(w+, w-, u) : |u|_inf <= w+ + w-}.
///
/// Sorted closed form: with nu the ascending sort of |u| and nbar the index
/// bucket containing the optimal level t = eta+ + eta-,
///   eta- = [w- - (M - nbar + 1)(w+ - w-) + sum_{i>=nbar} nu_i] / [1 + 2(M - nbar + 1)]
///   eta+ = eta- + w+ - w-
///   p    = clamp(u, -t, t).
/// When the stationary level is negative (possible for far-outside inputs) the
/// level is clamped to 0, see kClampLevelToZero.
EpiPoint project_epi_linf(const EpiPoint& point);

/// Projection onto E_1^+ = {(w+, w-, u) : sum u <= w+ + w-, u >= 0}.
/// Requires u >= 0 (ContractError otherwise). Inputs already in the set are
/// returned unchanged; otherwise the boundary point is found by the sorted
/// Duchi-style threshold alpha with
///   eta+/- = w+/- + alpha,  p = max(u - alpha, 0).
EpiPoint project_epi_l1_pos(const EpiPoint& point);

/// Projection onto E_1 = {(w+, w-, u) : |u|_1 <= w+ + w-}: project |u| onto
/// E_1^+ and restore signs componentwise.
EpiPoint project_epi_l1(const EpiPoint& point);

/// Moreau identity: prox of the conjugate of an indicator,
///   prox_{sigma iota*_E}(x) = x - sigma * P_E(x / sigma),  sigma > 0.
template <class Projection>
EpiPoint prox_conjugate(Projection&& project, const EpiPoint& point, double sigma) {
    EpiPoint scaled{point.omega_plus / sigma, point.omega_minus / sigma,
                    point.u / sigma};
    EpiPoint proj = project(scaled);
    return EpiPoint{point.omega_plus - sigma * proj.omega_plus,
                    point.omega_minus - sigma * proj.omega_minus,
                    point.u - sigma * proj.u};
}

/// The stationary-level formulas of the epigraphical projections can return a
/// negative level t = eta+ + eta- for inputs far outside the set; every such
/// point projects to level 0. The oracle suite confirms clamping the level sum
/// (not the individual etas, which may legitimately be negative).
inline constexpr bool kClampLevelToZero = true;

namespace tol {
inline constexpr double kMembership = 1e-10;
inline constexpr double kIdempotence = 1e-10;
inline constexpr double kMoreau = 1e-12;
}  // namespace tol

namespace detail {
/// In-place cores used by the solver hot loop; buffers are caller-provided
/// scratch of length m.
void project_epi_linf_inplace(double& wp, double& wm, double* u, Eigen::Index m,
                              double* scratch);
void project_epi_l1_inplace(double& wp, double& wm, double* u, Eigen::Index m,
                            double* scratch);
}  // namespace detail

}  // namespace hiernet

#include "hiernet/solver.hpp"

#include "hiernet/prox.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace hiernet {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;
constexpr int kStopStreak = 10;  // consecutive small-change iterations before stopping

double objective_value(const Vector& b, const Vector& v_diff, const Matrix& theta,
                       const RegConfig& reg) {
    double max_sum = 0.0;
    for (Eigen::Index i = 0; i < v_diff.size(); ++i) {
        max_sum += std::max(std::abs(v_diff[i]), row_norm(theta.row(i), reg.norm_r));
    }
    return 0.5 * b.squaredNorm() + 0.5 * reg.lambda * theta.cwiseAbs().sum() +
           reg.lambda * max_sum;
}

void check_state_dims(const ModelParams& params, const DualState& dual,
                      Eigen::Index n, Hierarchy mode) {
    if (params.v_plus.size() != n || params.v_minus.size() != n ||
        params.theta.rows() != n || params.theta.cols() != n) {
        throw DimensionError("solver: initial params do not match feature count " +
                             std::to_string(n));
    }
    if (dual.s_plus.size() != n || dual.s_minus.size() != n ||
        dual.lambda_mat_1.rows() != n || dual.lambda_mat_1.cols() != n) {
        throw DimensionError("solver: initial dual state does not match feature count " +
                             std::to_string(n));
    }
    if ((mode == Hierarchy::Strong) != dual.lambda_mat_2.has_value()) {
        throw ContractError("solver: dual.lambda_mat_2 must be present exactly in Strong mode");
    }
    if (dual.lambda_mat_2 &&
        (dual.lambda_mat_2->rows() != n || dual.lambda_mat_2->cols() != n)) {
        throw DimensionError("solver: lambda_mat_2 does not match feature count " +
                             std::to_string(n));
    }
}

SolveReport run_primal_dual(Hierarchy mode, const Dataset& data, const RegConfig& reg,
                            const SolverConfig& cfg, const ModelParams& init_params,
                            const DualState& init_dual) {
    reg.validate();
    cfg.validate();
    if (reg.hierarchy != mode) {
        throw ContractError("solver: RegConfig.hierarchy does not match the solver mode");
    }
    const double required_norm = mode == Hierarchy::Weak ? 1.0 : kSqrt2;
    if (cfg.op_norm < required_norm * (1.0 - 1e-12)) {
        throw StepSizeError("solver: cfg.op_norm " + std::to_string(cfg.op_norm) +
                            " underestimates |H| = " + std::to_string(required_norm) +
                            " of this splitting");
    }

    const Matrix& X = data.features();
    const Vector& y = data.responses();
    const Eigen::Index L = X.rows();
    const Eigen::Index n = X.cols();
    check_state_dims(init_params, init_dual, n, mode);

    const double tau = cfg.tau;
    const double sigma = cfg.sigma;
    const double lam = reg.lambda;

    Vector vp = init_params.v_plus;
    Vector vm = init_params.v_minus;
    Matrix theta = init_params.theta;
    Vector sp = init_dual.s_plus;
    Vector sm = init_dual.s_minus;
    Matrix lam1 = init_dual.lambda_mat_1;
    Matrix lam2 = mode == Hierarchy::Strong ? *init_dual.lambda_mat_2 : Matrix();
    Matrix& lam_epi = mode == Hierarchy::Weak ? lam1 : lam2;

    // Preallocated iteration workspace.
    Vector v_diff(n), b(L), xb(n), quad(L);
    Vector vp_next(n), vm_next(n), ext_p(n), ext_m(n);
    Matrix pred(L, n), xs(L, n), grad_theta(n, n), theta_step(n, n), theta_next(n, n),
        ext_theta(n, n);
    Vector row_buf(n), scratch(2 * n);

    SolveReport report;
    report.trace.reserve(static_cast<std::size_t>(
        std::min<std::int64_t>(cfg.max_iters / cfg.trace_stride + 2, 1 << 22)));

    double objective_prev = std::numeric_limits<double>::quiet_NaN();
    double change = 0.0;
    int streak = 0;
    double elapsed = 0.0;
    Termination termination = Termination::MaxIters;
    std::int64_t k = 0;

    using clock = std::chrono::steady_clock;
    for (;; ++k) {
        auto t0 = clock::now();
        v_diff = vp - vm;
        pred.noalias() = X * theta;
        quad = pred.cwiseProduct(X).rowwise().sum();
        b = y - quad;
        b.noalias() -= X * v_diff;
        const double objective = objective_value(b, v_diff, theta, reg);
        elapsed += std::chrono::duration<double>(clock::now() - t0).count();

        if (!std::isfinite(objective)) {
            throw DivergenceError("solver: non-finite objective at iteration " +
                                  std::to_string(k), k);
        }

        bool stop = false;
        if (k >= 1) {
            const double rel_obj =
                std::abs(objective - objective_prev) / std::max(1.0, std::abs(objective));
            const double w_norm = std::sqrt(vp.squaredNorm() + vm.squaredNorm() +
                                            theta.squaredNorm());
            const double rel_change = change / std::max(1.0, w_norm);
            if (rel_obj <= cfg.tol_objective && rel_change <= cfg.tol_iterate) {
                if (++streak >= kStopStreak) {
                    stop = true;
                    termination = Termination::Converged;
                }
            } else {
                streak = 0;
            }
        }
        if (!stop && k >= cfg.max_iters) {
            stop = true;
            termination = Termination::MaxIters;
        }

        if (stop || k % cfg.trace_stride == 0) {
            const double dist_sym = 0.5 * (theta - theta.transpose()).norm();
            report.trace.push_back({k, objective, change, dist_sym, elapsed});
        }
        if (stop) break;
        objective_prev = objective;

        t0 = clock::now();
        xb.noalias() = X.transpose() * b;
        xs = X;
        xs.array().colwise() *= b.array();
        grad_theta.noalias() = X.transpose() * xs;  // sum_l b_l x_l x_l^T

        vp_next = (vp + tau * (xb - sp)).array() - tau * lam;
        vp_next = vp_next.cwiseMax(0.0);
        vm_next = (vm - tau * (xb + sm)).array() - tau * lam;
        vm_next = vm_next.cwiseMax(0.0);

        if (mode == Hierarchy::Weak) {
            theta_step = theta + tau * grad_theta - tau * lam1;
            const double gamma = 0.5 * tau * lam;
            theta_next = theta_step.unaryExpr([gamma](double v) {
                const double mag = std::abs(v) - gamma;
                return mag > 0.0 ? (v > 0.0 ? mag : -mag) : 0.0;
            });
        } else {
            theta_step = theta + tau * grad_theta - tau * (lam1 + lam2);
            theta_next = 0.5 * (theta_step + theta_step.transpose());
        }

        ext_p = 2.0 * vp_next - vp;
        ext_m = 2.0 * vm_next - vm;
        ext_theta = 2.0 * theta_next - theta;

        if (mode == Hierarchy::Strong) {
            // prox of the conjugate of lambda/2 |.|_1: clamp to [-lambda/2, lambda/2]
            const double bound = 0.5 * lam;
            lam1 = (lam1 + sigma * ext_theta)
                       .unaryExpr([bound](double v) { return std::clamp(v, -bound, bound); });
        }

        for (Eigen::Index i = 0; i < n; ++i) {
            const double ap = sp[i] + sigma * ext_p[i];
            const double am = sm[i] + sigma * ext_m[i];
            row_buf = lam_epi.row(i).transpose() + sigma * ext_theta.row(i).transpose();
            double pp = ap / sigma;
            double pm = am / sigma;
            row_buf /= sigma;
            if (reg.norm_r == Norm::Linf) {
                detail::project_epi_linf_inplace(pp, pm, row_buf.data(), n, scratch.data());
            } else {
                detail::project_epi_l1_inplace(pp, pm, row_buf.data(), n, scratch.data());
            }
            sp[i] = ap - sigma * pp;
            sm[i] = am - sigma * pm;
            lam_epi.row(i) = (lam_epi.row(i) + sigma * ext_theta.row(i)) -
                             sigma * row_buf.transpose();
        }

        change = std::sqrt((vp_next - vp).squaredNorm() + (vm_next - vm).squaredNorm() +
                           (theta_next - theta).squaredNorm());
        if (!std::isfinite(change)) {
            throw DivergenceError("solver: non-finite iterate at iteration " +
                                  std::to_string(k + 1), k + 1);
        }
        vp.swap(vp_next);
        vm.swap(vm_next);
        theta.swap(theta_next);
        elapsed += std::chrono::duration<double>(clock::now() - t0).count();
    }

    report.final_params = ModelParams{std::move(vp), std::move(vm), std::move(theta)};
    DualState dual{std::move(sp), std::move(sm), Matrix(), std::nullopt};
    if (mode == Hierarchy::Strong) {
        dual.lambda_mat_1 = std::move(lam1);
        dual.lambda_mat_2 = std::move(lam2);
    } else {
        dual.lambda_mat_1 = std::move(lam1);
    }
    report.final_dual = std::move(dual);
    report.termination = termination;
    report.iterations = k;
    return report;
}

}  // namespace

SplittingSpec SplittingSpec::weak(Norm r) { return SplittingSpec{Hierarchy::Weak, r, 1.0}; }

SplittingSpec SplittingSpec::strong(Norm r) {
    return SplittingSpec{Hierarchy::Strong, r, kSqrt2};
}

void SplittingSpec::validate() const {
    const double expected = mode == Hierarchy::Weak ? 1.0 : kSqrt2;
    if (std::abs(op_norm - expected) > 1e-12) {
        throw ContractError("SplittingSpec.op_norm: expected " + std::to_string(expected) +
                            " for this mode, got " + std::to_string(op_norm));
    }
}

double step_tau_for_sigma(double beta, double sigma, double op_norm) {
    return 1.0 / (1.01 * (0.5 * beta + sigma * op_norm * op_norm));
}

std::pair<double, double> default_steps(double beta, const SplittingSpec& spec) {
    spec.validate();
    if (beta < 0.0 || !std::isfinite(beta)) {
        throw ContractError("default_steps: beta must be finite and >= 0");
    }
    const double h2 = spec.op_norm * spec.op_norm;
    const double sigma = 0.99 / h2;
    const double tau = std::min(step_tau_for_sigma(beta, sigma, spec.op_norm), sigma);
    return {tau, sigma};
}

Vector extrapolate(const Vector& current, const Vector& previous) {
    if (current.size() != previous.size()) {
        throw DimensionError("extrapolate: vector sizes differ (" +
                             std::to_string(current.size()) + " vs " +
                             std::to_string(previous.size()) + ")");
    }
    return 2.0 * current - previous;
}

Matrix extrapolate(const Matrix& current, const Matrix& previous) {
    if (current.rows() != previous.rows() || current.cols() != previous.cols()) {
        throw DimensionError("extrapolate: matrix shapes differ");
    }
    return 2.0 * current - previous;
}

SolveReport solve_weak(const Dataset& data, const RegConfig& reg, const SolverConfig& cfg) {
    return run_primal_dual(Hierarchy::Weak, data, reg, cfg,
                           ModelParams::zero(data.n_features()),
                           DualState::zero(data.n_features(), Hierarchy::Weak));
}

SolveReport solve_weak(const Dataset& data, const RegConfig& reg, const SolverConfig& cfg,
                       const ModelParams& init_params, const DualState& init_dual) {
    return run_primal_dual(Hierarchy::Weak, data, reg, cfg, init_params, init_dual);
}

SolveReport solve_strong(const Dataset& data, const RegConfig& reg, const SolverConfig& cfg) {
    return run_primal_dual(Hierarchy::Strong, data, reg, cfg,
                           ModelParams::zero(data.n_features()),
                           DualState::zero(data.n_features(), Hierarchy::Strong));
}

SolveReport solve_strong(const Dataset& data, const RegConfig& reg, const SolverConfig& cfg,
                         const ModelParams& init_params, const DualState& init_dual) {
    return run_primal_dual(Hierarchy::Strong, data, reg, cfg, init_params, init_dual);
}

}  // namespace hiernet

#include "hiernet/objective.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace hiernet {

namespace detail {

void check_dims(const ModelParams& params, const Dataset& data, const char* where) {
    const Eigen::Index n = data.n_features();
    if (params.v_plus.size() != n) {
        throw DimensionError(std::string(where) + ": v_plus length " +
                             std::to_string(params.v_plus.size()) +
                             " does not match feature count " + std::to_string(n));
    }
    if (params.v_minus.size() != n) {
        throw DimensionError(std::string(where) + ": v_minus length " +
                             std::to_string(params.v_minus.size()) +
                             " does not match feature count " + std::to_string(n));
    }
    if (params.theta.rows() != n || params.theta.cols() != n) {
        throw DimensionError(std::string(where) + ": theta is " +
                             std::to_string(params.theta.rows()) + "x" +
                             std::to_string(params.theta.cols()) + ", expected " +
                             std::to_string(n) + "x" + std::to_string(n));
    }
}

bool symmetric_within(const Matrix& theta, double rel_tol) {
    const double drift = (theta - theta.transpose()).norm();
    return drift <= rel_tol * std::max(1.0, theta.norm());
}

double objective_core(const Vector& b, const ModelParams& params, const RegConfig& reg) {
    const double loss = 0.5 * b.squaredNorm();
    const Vector v = params.main_effects();
    double max_sum = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        max_sum += std::max(std::abs(v[i]), row_norm(params.theta.row(i), reg.norm_r));
    }
    return loss + 0.5 * reg.lambda * params.theta.lpNorm<1>() + reg.lambda * max_sum;
}

}  // namespace detail

Vector residuals(const ModelParams& params, const Dataset& data) {
    detail::check_dims(params, data, "residuals");
    const Matrix& X = data.features();
    // quadratic predictions via (X*Theta) . X summed over rows, l ascending
    Vector quad = (X * params.theta).cwiseProduct(X).rowwise().sum();
    return data.responses() - X * params.main_effects() - quad;
}

double row_norm(const Eigen::Ref<const Eigen::RowVectorXd>& row, Norm r) {
    return r == Norm::L1 ? row.lpNorm<1>() : row.lpNorm<Eigen::Infinity>();
}

double evaluate_objective(const ModelParams& params, const Dataset& data,
                          const RegConfig& reg) {
    reg.validate();
    detail::check_dims(params, data, "evaluate_objective");
    if (reg.hierarchy == Hierarchy::Strong &&
        !detail::symmetric_within(params.theta, 1e-9)) {
        return std::numeric_limits<double>::infinity();
    }
    return detail::objective_core(residuals(params, data), params, reg);
}

double evaluate_objective_epi(const ModelParams& params, const Dataset& data,
                              const RegConfig& reg) {
    reg.validate();
    detail::check_dims(params, data, "evaluate_objective_epi");
    if (reg.hierarchy == Hierarchy::Strong &&
        !detail::symmetric_within(params.theta, 1e-9)) {
        return std::numeric_limits<double>::infinity();
    }
    for (Eigen::Index i = 0; i < params.v_plus.size(); ++i) {
        const double budget = params.v_plus[i] + params.v_minus[i];
        if (row_norm(params.theta.row(i), reg.norm_r) > budget + 1e-9) {
            return std::numeric_limits<double>::infinity();
        }
    }
    const Vector b = residuals(params, data);
    return 0.5 * b.squaredNorm() + 0.5 * reg.lambda * params.theta.lpNorm<1>() +
           reg.lambda * (params.v_plus.sum() + params.v_minus.sum());
}

Gradients gradient_f(const ModelParams& params, const Dataset& data,
                     const RegConfig& reg) {
    reg.validate();
    detail::check_dims(params, data, "gradient_f");
    const Matrix& X = data.features();
    const Vector b = residuals(params, data);
    const Vector xb = X.transpose() * b;
    Gradients g;
    g.v_plus = -xb + Vector::Constant(xb.size(), reg.lambda);
    g.v_minus = xb + Vector::Constant(xb.size(), reg.lambda);
    g.theta = -(X.transpose() * b.asDiagonal() * X);
    return g;
}

double estimate_beta(const Dataset& data) {
    const Matrix& X = data.features();
    // Gram of the linearized design Phi = [X, -X, (x_l x_l^T)_l]:
    // Phi Phi^T = 2 X X^T + (X X^T) o (X X^T), same top eigenvalue as Phi^T Phi.
    const Matrix K = X * X.transpose();
    const Matrix G = 2.0 * K + K.cwiseProduct(K);

    const Eigen::Index L = G.rows();
    std::mt19937_64 rng(12345);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vector v(L);
    for (Eigen::Index i = 0; i < L; ++i) v[i] = gauss(rng);
    v.normalize();

    double eig = 0.0;
    for (int it = 0; it < 1000; ++it) {
        Vector gv = G * v;
        const double norm = gv.norm();
        if (norm == 0.0) return 0.0;
        v = gv / norm;
        const double next = v.dot(G * v);
        if (std::abs(next - eig) <= 1e-8 * std::max(std::abs(next), 1e-300)) {
            return next;
        }
        eig = next;
    }
    return eig;
}

}  // namespace hiernet

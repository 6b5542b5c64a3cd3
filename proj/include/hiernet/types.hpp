#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hiernet {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Which row norm the per-row coupling constraint uses.
enum class Norm { L1, Linf };

/// Hierarchy mode: Weak leaves the interaction matrix free,
/// Strong restricts it to the symmetric matrices S.
enum class Hierarchy { Weak, Strong };

enum class SplitRole { Train, Validation, Test };

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Inconsistent shapes between inputs; message names the offending field.
struct DimensionError : Error {
    using Error::Error;
};

/// A caller contract was violated (e.g. negative entries where u >= 0 is required).
struct ContractError : Error {
    using Error::Error;
};

/// Step sizes fail the convergence condition 1/tau - sigma*|H|^2 >= beta/2.
struct StepSizeError : Error {
    using Error::Error;
};

/// The iteration produced a non-finite value.
struct DivergenceError : Error {
    DivergenceError(const std::string& what, std::int64_t iter)
        : Error(what), iteration(iter) {}
    std::int64_t iteration;
};

/// Regression data: row l of features() is the sample x_l, responses()[l] is y_l.
class Dataset {
  public:
    Dataset(Matrix features, Vector responses, SplitRole role = SplitRole::Train);

    const Matrix& features() const { return features_; }
    const Vector& responses() const { return responses_; }
    SplitRole role() const { return role_; }

    Eigen::Index n_samples() const { return features_.rows(); }
    Eigen::Index n_features() const { return features_.cols(); }

  private:
    Matrix features_;
    Vector responses_;
    SplitRole role_;
};

/// Primal variable of the epigraph formulation: split main effects and interactions.
struct ModelParams {
    Vector v_plus;
    Vector v_minus;
    Matrix theta;

    static ModelParams zero(Eigen::Index n);

    Eigen::Index n_features() const { return v_plus.size(); }

    /// v = v+ - v-
    Vector main_effects() const { return v_plus - v_minus; }
};

struct RegConfig {
    double lambda = 0.0;
    Norm norm_r = Norm::L1;
    Hierarchy hierarchy = Hierarchy::Weak;

    void validate() const;
};

/// Dual variables. lambda_mat_1 is Lambda in weak mode and Lambda_1 in strong
/// mode; lambda_mat_2 is present exactly when the state belongs to a strong run.
struct DualState {
    Vector s_plus;
    Vector s_minus;
    Matrix lambda_mat_1;
    std::optional<Matrix> lambda_mat_2;

    static DualState zero(Eigen::Index n, Hierarchy mode);

    Hierarchy hierarchy() const {
        return lambda_mat_2.has_value() ? Hierarchy::Strong : Hierarchy::Weak;
    }
};

struct SolverConfig {
    double tau = 0.0;
    double sigma = 0.0;
    double beta = 0.0;       // Lipschitz constant of grad f
    double op_norm = 1.0;    // |H| of the splitting in use
    std::int64_t max_iters = 10000;
    double tol_objective = 1e-8;
    double tol_iterate = 1e-8;
    std::uint64_t seed = 0;
    std::int64_t trace_stride = 1;

    SolverConfig() = default;
    SolverConfig(double tau, double sigma, double beta, double op_norm,
                 std::int64_t max_iters, double tol_objective, double tol_iterate,
                 std::uint64_t seed, std::int64_t trace_stride = 1);

    /// Throws StepSizeError unless 1/tau - sigma*|H|^2 >= beta/2 (tau, sigma > 0).
    void validate() const;
};

enum class Termination { Converged, MaxIters };

struct SolveReport {
    struct Record {
        std::int64_t iter;
        double objective;
        double iterate_change;     // |w[k] - w[k-1]|_2, 0 at iter 0
        double dist_to_symmetry;   // |Theta - Theta^T|_F / 2
        double elapsed_seconds;    // cumulative update time, excludes trace bookkeeping
    };

    std::vector<Record> trace;
    ModelParams final_params;
    DualState final_dual;
    Termination termination = Termination::MaxIters;
    std::int64_t iterations = 0;  // update steps performed
};

}  // namespace hiernet

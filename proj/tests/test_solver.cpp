#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hiernet/evaluation.hpp"
#include "hiernet/objective.hpp"
#include "hiernet/solver.hpp"
#include "oracle_helpers.hpp"

#include <cmath>
#include <random>

using namespace hiernet;
using namespace hiernet::testing;

namespace {

Dataset random_instance(std::mt19937_64& rng, Eigen::Index L, Eigen::Index n,
                        double noise = 0.1) {
    const Matrix X = random_matrix(rng, L, n, -1.0, 1.0);
    Vector v = random_vector(rng, n, -1.0, 1.0);
    Matrix theta = random_matrix(rng, n, n, -0.5, 0.5);
    theta = 0.5 * (theta + theta.transpose());
    Vector y = X * v + (X * theta).cwiseProduct(X).rowwise().sum();
    y += noise * random_vector(rng, L, -1.0, 1.0);
    return Dataset(X, y);
}

SolverConfig make_config(const Dataset& data, const SplittingSpec& spec,
                         std::int64_t max_iters, double tol) {
    const double beta = estimate_beta(data);
    const auto [tau, sigma] = default_steps(beta, spec);
    return SolverConfig(tau, sigma, beta, spec.op_norm, max_iters, tol, tol, 0);
}

SolveReport run(const Dataset& data, const RegConfig& reg, std::int64_t max_iters,
                double tol) {
    const SplittingSpec spec = reg.hierarchy == Hierarchy::Weak
                                   ? SplittingSpec::weak(reg.norm_r)
                                   : SplittingSpec::strong(reg.norm_r);
    const SolverConfig cfg = make_config(data, spec, max_iters, tol);
    return reg.hierarchy == Hierarchy::Weak ? solve_weak(data, reg, cfg)
                                            : solve_strong(data, reg, cfg);
}

}  // namespace

TEST_CASE("default_steps matches the pinned arithmetic") {
    const auto [tau, sigma] = default_steps(0.0, SplittingSpec::weak(Norm::L1));
    CHECK(tau == doctest::Approx(0.99).epsilon(1e-15));
    CHECK(sigma == doctest::Approx(0.99).epsilon(1e-15));

    // Given sigma = 1 and |H| = 1: 1/tau >= 1 + 1, margin 1.01
    CHECK(step_tau_for_sigma(2.0, 1.0, 1.0) == doctest::Approx(0.5 / 1.01).epsilon(1e-15));

    const auto [tau2, sigma2] = default_steps(7.3, SplittingSpec::strong(Norm::Linf));
    CHECK(1.0 / tau2 - sigma2 * 2.0 >= 1.01 * 7.3 / 2.0 - 1e-12);
}

TEST_CASE("default_steps output validates in SolverConfig") {
    std::mt19937_64 rng(101);
    const Dataset data = random_instance(rng, 15, 4);
    const double beta = estimate_beta(data);
    for (const SplittingSpec& spec :
         {SplittingSpec::weak(Norm::L1), SplittingSpec::strong(Norm::L1)}) {
        const auto [tau, sigma] = default_steps(beta, spec);
        CHECK_NOTHROW(SolverConfig(tau, sigma, beta, spec.op_norm, 100, 1e-8, 1e-8, 0));
    }
}

TEST_CASE("SolverConfig rejects violated step sizes") {
    CHECK_THROWS_AS(SolverConfig(1.0, 1.0, 10.0, 1.0, 100, 1e-8, 1e-8, 0), StepSizeError);
    CHECK_THROWS_AS(SolverConfig(-0.1, 1.0, 0.0, 1.0, 100, 1e-8, 1e-8, 0), StepSizeError);
}

TEST_CASE("SplittingSpec enforces the mode-matched operator norm") {
    CHECK(SplittingSpec::weak(Norm::L1).op_norm == 1.0);
    CHECK(SplittingSpec::strong(Norm::L1).op_norm == doctest::Approx(std::sqrt(2.0)));
    SplittingSpec bad{Hierarchy::Strong, Norm::L1, 1.0};
    CHECK_THROWS_AS(bad.validate(), ContractError);
}

TEST_CASE("extrapolate basics") {
    Vector x(2);
    x << 1.0, -2.0;
    CHECK(extrapolate(x, x) == x);

    Vector one = Vector::Constant(1, 1.0);
    Vector zero = Vector::Zero(1);
    CHECK(extrapolate(one, zero)[0] == 2.0);

    std::mt19937_64 rng(5);
    const Vector a = random_vector(rng, 6, -2.0, 2.0);
    const Vector b = random_vector(rng, 6, -2.0, 2.0);
    CHECK(((extrapolate(a, b) - (2.0 * a - b)).norm()) == 0.0);

    CHECK_THROWS_AS(extrapolate(Vector::Zero(2), Vector::Zero(3)), DimensionError);
    CHECK_THROWS_AS(extrapolate(Matrix::Zero(2, 2), Matrix::Zero(2, 3)), DimensionError);
}

TEST_CASE("solve_weak with lambda 0 reproduces the exactly determined fit") {
    Matrix X(2, 1);
    X << 1.0, 2.0;
    Vector y(2);
    y << 3.0, 10.0;  // v + theta = 3, 2v + 4 theta = 10 -> v = 1, theta = 2
    const Dataset data(X, y);
    const RegConfig reg{0.0, Norm::L1, Hierarchy::Weak};
    const SolveReport report = run(data, reg, 200000, 1e-13);
    CHECK(report.final_params.main_effects()[0] == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(report.final_params.theta(0, 0) == doctest::Approx(2.0).epsilon(1e-5));
    CHECK(report.trace.back().objective < 1e-9);
}

TEST_CASE("zero responses with positive lambda give the zero model") {
    std::mt19937_64 rng(7);
    const Matrix X = random_matrix(rng, 10, 3, -1.0, 1.0);
    const Dataset data(X, Vector::Zero(10));
    for (Hierarchy mode : {Hierarchy::Weak, Hierarchy::Strong}) {
        const RegConfig reg{2.0, Norm::L1, mode};
        const SolveReport report = run(data, reg, 50000, 1e-12);
        CHECK(report.final_params.v_plus.norm() <= 1e-8);
        CHECK(report.final_params.v_minus.norm() <= 1e-8);
        CHECK(report.final_params.theta.norm() <= 1e-8);
        CHECK(report.trace.back().objective <= 1e-12);
    }
}

TEST_CASE("solve_strong keeps every iterate symmetric") {
    std::mt19937_64 rng(11);
    const Dataset data = random_instance(rng, 24, 3, 0.0);
    const RegConfig reg{0.0, Norm::L1, Hierarchy::Strong};
    const SolveReport report = run(data, reg, 100000, 1e-13);
    for (const auto& rec : report.trace) {
        CHECK(rec.dist_to_symmetry <= 1e-10);
    }
    const Matrix& theta = report.final_params.theta;
    CHECK((theta - theta.transpose()).norm() == 0.0);
    // overdetermined noiseless symmetric truth: residual approaches zero
    CHECK(report.trace.back().objective < 1e-6);
}

TEST_CASE("feasibility at convergence for both solvers and norms") {
    std::mt19937_64 rng(13);
    const Dataset data = random_instance(rng, 30, 4);
    for (Hierarchy mode : {Hierarchy::Weak, Hierarchy::Strong}) {
        for (Norm r : {Norm::L1, Norm::Linf}) {
            const RegConfig reg{0.7, r, mode};
            const SolveReport report = run(data, reg, 100000, 1e-12);
            const ModelParams& p = report.final_params;
            CHECK(p.v_plus.minCoeff() >= -1e-12);
            CHECK(p.v_minus.minCoeff() >= -1e-12);
            for (Eigen::Index i = 0; i < p.v_plus.size(); ++i) {
                CHECK(row_norm(p.theta.row(i), r) <=
                      p.v_plus[i] + p.v_minus[i] + 1e-6);
            }
        }
    }
}

TEST_CASE("objective and epigraph objective agree at the solution") {
    std::mt19937_64 rng(17);
    const Dataset data = random_instance(rng, 40, 5);
    for (Hierarchy mode : {Hierarchy::Weak, Hierarchy::Strong}) {
        const RegConfig reg{1.0, mode == Hierarchy::Weak ? Norm::Linf : Norm::L1, mode};
        const SolveReport report = run(data, reg, 300000, 0.0);
        const double plain = evaluate_objective(report.final_params, data, reg);
        const double epi = evaluate_objective_epi(report.final_params, data, reg);
        CHECK(std::isfinite(epi));
        CHECK(std::abs(plain - epi) / std::abs(plain) <= 1e-6);
    }
}

TEST_CASE("identical configs produce bit-identical traces") {
    std::mt19937_64 rng(19);
    const Dataset data = random_instance(rng, 20, 4);
    const RegConfig reg{0.5, Norm::L1, Hierarchy::Strong};
    const SolveReport a = run(data, reg, 2000, 0.0);
    const SolveReport b = run(data, reg, 2000, 0.0);
    REQUIRE(a.trace.size() == b.trace.size());
    for (std::size_t i = 0; i < a.trace.size(); ++i) {
        CHECK(a.trace[i].iter == b.trace[i].iter);
        CHECK(a.trace[i].objective == b.trace[i].objective);
        CHECK(a.trace[i].iterate_change == b.trace[i].iterate_change);
        CHECK(a.trace[i].dist_to_symmetry == b.trace[i].dist_to_symmetry);
    }
    CHECK((a.final_params.theta - b.final_params.theta).norm() == 0.0);
}

TEST_CASE("trace records are strictly increasing with nondecreasing elapsed time") {
    std::mt19937_64 rng(23);
    const Dataset data = random_instance(rng, 20, 4);
    const RegConfig reg{0.5, Norm::Linf, Hierarchy::Weak};
    const SolveReport report = run(data, reg, 3000, 0.0);
    for (std::size_t i = 1; i < report.trace.size(); ++i) {
        CHECK(report.trace[i].iter > report.trace[i - 1].iter);
        CHECK(report.trace[i].elapsed_seconds >= report.trace[i - 1].elapsed_seconds);
    }
    CHECK(report.termination == Termination::MaxIters);
    CHECK(report.iterations == 3000);
}

TEST_CASE("restarting from the reported state leaves the objective anchored") {
    std::mt19937_64 rng(29);
    const Dataset data = random_instance(rng, 30, 4);
    const RegConfig reg{0.8, Norm::L1, Hierarchy::Strong};
    const SplittingSpec spec = SplittingSpec::strong(Norm::L1);
    SolverConfig deep = make_config(data, spec, 400000, 1e-13);
    const SolveReport first = solve_strong(data, reg, deep);
    REQUIRE(first.termination == Termination::Converged);

    SolverConfig hundred = deep;
    hundred.max_iters = 100;
    hundred.tol_objective = 1e-9;
    hundred.tol_iterate = 0.0;
    const SolveReport resumed =
        solve_strong(data, reg, hundred, first.final_params, first.final_dual);
    const double before = resumed.trace.front().objective;
    const double after = resumed.trace.back().objective;
    CHECK(std::abs(after - before) / std::max(1.0, std::abs(after)) <= 1e-9);
}

TEST_CASE("smoothed objective trend is nonincreasing") {
    std::mt19937_64 rng(31);
    const Dataset data = random_instance(rng, 40, 8, 0.3);
    for (Hierarchy mode : {Hierarchy::Weak, Hierarchy::Strong}) {
        const RegConfig reg{1.0, Norm::L1, mode};
        const SolveReport report = run(data, reg, 20000, 0.0);
        const std::size_t n = report.trace.size();
        REQUIRE(n == 20001);
        std::vector<double> ma(n);
        double acc = 0.0;
        const std::size_t window = 100;
        for (std::size_t i = 0; i < n; ++i) {
            acc += report.trace[i].objective;
            if (i >= window) acc -= report.trace[i - window].objective;
            ma[i] = acc / static_cast<double>(std::min(i + 1, window));
        }
        const auto start = static_cast<std::size_t>(n / 100);  // first 1%
        for (std::size_t i = std::max(start, window) + 1; i < n; ++i) {
            CHECK(ma[i] <= ma[i - 1] + 1e-9 * std::max(1.0, std::abs(ma[i - 1])));
        }
    }
}

TEST_CASE("long-run self-consistency on a small instance") {
    std::mt19937_64 rng(37);
    const Dataset data = random_instance(rng, 40, 6, 0.2);
    const RegConfig reg{1.2, Norm::L1, Hierarchy::Strong};
    const SolveReport report = run(data, reg, 200000, 0.0);
    const double reference = report.trace.back().objective;
    bool reached = false;
    for (const auto& rec : report.trace) {
        if (rec.iter <= 50000 &&
            std::abs(rec.objective - reference) <= 1e-6 * std::abs(reference)) {
            reached = true;
            break;
        }
    }
    CHECK(reached);
}

TEST_CASE("solver rejects mismatched configuration") {
    std::mt19937_64 rng(41);
    const Dataset data = random_instance(rng, 10, 3);
    const RegConfig weak_reg{0.5, Norm::L1, Hierarchy::Weak};
    const RegConfig strong_reg{0.5, Norm::L1, Hierarchy::Strong};
    const SolverConfig cfg = make_config(data, SplittingSpec::strong(Norm::L1), 100, 1e-8);

    CHECK_THROWS_AS(solve_strong(data, weak_reg, cfg), ContractError);
    // op_norm 1 underestimates |H| = sqrt(2) of the strong splitting
    const SolverConfig weak_cfg = make_config(data, SplittingSpec::weak(Norm::L1), 100, 1e-8);
    CHECK_THROWS_AS(solve_strong(data, strong_reg, weak_cfg), StepSizeError);

    DualState bad_dual = DualState::zero(3, Hierarchy::Weak);
    CHECK_THROWS_AS(solve_strong(data, strong_reg, cfg, ModelParams::zero(3), bad_dual),
                    ContractError);
}

TEST_CASE("a wrong user-supplied Lipschitz constant surfaces as divergence") {
    std::mt19937_64 rng(43);
    Matrix X = 20.0 * random_matrix(rng, 12, 4, -1.0, 1.0);
    Vector y = random_vector(rng, 12, -50.0, 50.0);
    const Dataset data(X, y);
    const RegConfig reg{0.1, Norm::L1, Hierarchy::Weak};
    // beta = 0 claims a flat loss; the validated steps are then far too large.
    SolverConfig cfg(0.99, 0.99, 0.0, 1.0, 2000, 0.0, 0.0, 0);
    CHECK_THROWS_AS(solve_weak(data, reg, cfg), DivergenceError);
}

#include "hiernet/prox.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace hiernet {

namespace {

double soft(double x, double gamma) {
    const double mag = std::abs(x) - gamma;
    return mag > 0.0 ? (x > 0.0 ? mag : -mag) : 0.0;
}

void check_gamma(double gamma) {
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
        throw ContractError("prox_l1: gamma must be finite and >= 0");
    }
}

// Derivative of the reduced one-dimensional problem behind P_{E_inf}:
//   psi'(t) = (t - s) - 2 sum_i max(nu_i - t, 0)
double linf_level_slope(double t, double s, const double* nu, Eigen::Index m) {
    double pull = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
        if (nu[i] > t) pull += nu[i] - t;
    }
    return (t - s) - 2.0 * pull;
}

}  // namespace

Vector project_orthant(const Vector& x) {
    return x.cwiseMax(0.0);
}

Matrix project_symmetric(const Matrix& theta) {
    if (theta.rows() != theta.cols()) {
        throw DimensionError("project_symmetric: matrix is " + std::to_string(theta.rows()) +
                             "x" + std::to_string(theta.cols()) + ", expected square");
    }
    return 0.5 * (theta + theta.transpose());
}

Vector prox_l1(const Vector& x, double gamma) {
    check_gamma(gamma);
    return x.unaryExpr([gamma](double v) { return soft(v, gamma); });
}

Matrix prox_l1(const Matrix& x, double gamma) {
    check_gamma(gamma);
    return x.unaryExpr([gamma](double v) { return soft(v, gamma); });
}

namespace detail {

void project_epi_linf_inplace(double& wp, double& wm, double* u, Eigen::Index m,
                              double* scratch) {
    const double s = wp + wm;
    double max_abs = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
        scratch[i] = std::abs(u[i]);
        max_abs = std::max(max_abs, scratch[i]);
    }
    if (max_abs <= s) return;  // already in the set

    std::sort(scratch, scratch + m);  // nu ascending

    // Scan candidate buckets from nbar = m+1 ("no active component") down to 1,
    // accepting the one whose closed-form level lands in its own bucket.
    constexpr double inf = std::numeric_limits<double>::infinity();
    double t = inf;
    double suffix = 0.0;
    for (Eigen::Index nbar = m + 1; nbar >= 1; --nbar) {
        const double active = static_cast<double>(m - nbar + 1);
        if (nbar <= m) suffix += scratch[nbar - 1];
        const double cand = (s + 2.0 * suffix) / (1.0 + 2.0 * active);
        const double lo = nbar >= 2 ? scratch[nbar - 2] : -inf;
        const double hi = nbar <= m ? scratch[nbar - 1] : inf;
        if (lo < cand && cand <= hi) {
            t = cand;
            break;
        }
    }
    if (!std::isfinite(t)) {
        // Rounding pushed the level out of every bucket; bisect the monotone
        // slope of the reduced problem instead.
        double lo = -(s < 0.0 ? -s : s) - 2.0 * suffix - 1.0;
        double hi = max_abs;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (linf_level_slope(mid, s, scratch, m) < 0.0 ? lo : hi) = mid;
        }
        t = 0.5 * (lo + hi);
    }
    if (kClampLevelToZero && t < 0.0) t = 0.0;

    const double shift = 0.5 * (t - s);
    wp += shift;
    wm += shift;
    for (Eigen::Index i = 0; i < m; ++i) {
        u[i] = std::clamp(u[i], -t, t);
    }
}

// Core of P_{E_1^+}; u must already be nonnegative.
void project_epi_l1_pos_inplace(double& wp, double& wm, double* u, Eigen::Index m,
                                double* scratch) {
    const double s = wp + wm;
    double sum = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) sum += u[i];
    if (sum <= s) return;

    std::copy(u, u + m, scratch);
    std::sort(scratch, scratch + m, std::greater<double>());  // mu descending

    // Largest support size whose self-consistent threshold keeps mu_n active.
    double alpha = -0.5 * s;  // empty support: p = 0, level 0
    double prefix = 0.0;
    for (Eigen::Index n = 1; n <= m; ++n) {
        prefix += scratch[n - 1];
        const double cand = (prefix - s) / (static_cast<double>(n) + 2.0);
        if (scratch[n - 1] - cand > 0.0) alpha = cand;
    }

    wp += alpha;
    wm += alpha;
    for (Eigen::Index i = 0; i < m; ++i) {
        u[i] = std::max(u[i] - alpha, 0.0);
    }
}

void project_epi_l1_inplace(double& wp, double& wm, double* u, Eigen::Index m,
                            double* scratch) {
    // Componentwise |.| in, componentwise sign restored out.
    for (Eigen::Index i = 0; i < m; ++i) {
        if (u[i] < 0.0) {
            u[i] = -u[i];
            scratch[m + i] = -1.0;
        } else {
            scratch[m + i] = 1.0;
        }
    }
    project_epi_l1_pos_inplace(wp, wm, u, m, scratch);
    for (Eigen::Index i = 0; i < m; ++i) {
        u[i] *= scratch[m + i];
    }
}

}  // namespace detail

EpiPoint project_epi_linf(const EpiPoint& point) {
    EpiPoint out = point;
    Vector scratch(point.u.size());
    detail::project_epi_linf_inplace(out.omega_plus, out.omega_minus, out.u.data(),
                                     out.u.size(), scratch.data());
    return out;
}

EpiPoint project_epi_l1_pos(const EpiPoint& point) {
    for (Eigen::Index i = 0; i < point.u.size(); ++i) {
        if (point.u[i] < 0.0) {
            throw ContractError("project_epi_l1_pos: u[" + std::to_string(i) +
                                "] = " + std::to_string(point.u[i]) + " violates u >= 0");
        }
    }
    EpiPoint out = point;
    Vector scratch(point.u.size());
    detail::project_epi_l1_pos_inplace(out.omega_plus, out.omega_minus, out.u.data(),
                                       out.u.size(), scratch.data());
    return out;
}

EpiPoint project_epi_l1(const EpiPoint& point) {
    EpiPoint out = point;
    Vector scratch(2 * point.u.size());
    detail::project_epi_l1_inplace(out.omega_plus, out.omega_minus, out.u.data(),
                                   out.u.size(), scratch.data());
    return out;
}

}  // namespace hiernet

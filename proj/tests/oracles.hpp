#pragma once

// Independent reference computations for the test suites. Nothing here calls
// into the solver or estimator code it is used to check.

#include "qdep/types.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace qdep::oracle {

inline double check(double tau, double u) { return u < 0.0 ? (tau - 1.0) * u : tau * u; }

/// Minimum check loss over every basic solution: each (d+1)-subset of rows with
/// a nonsingular design block defines a hyperplane through those points.
/// Returns the objective for each level in `taus`.
inline std::vector<double> vertex_enumeration(const Vector& y, const Matrix& z, const std::vector<double>& taus) {
    const Eigen::Index n = y.size();
    const Eigen::Index p = z.cols() + 1;
    Matrix x(n, p);
    x.col(0).setOnes();
    x.rightCols(z.cols()) = z;

    std::vector<double> best(taus.size(), std::numeric_limits<double>::infinity());
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(p));
    Matrix a(p, p);
    Vector b(p);
    std::function<void(Eigen::Index, Eigen::Index)> rec = [&](Eigen::Index start, Eigen::Index depth) {
        if (depth == p) {
            for (Eigen::Index r = 0; r < p; ++r) {
                a.row(r) = x.row(idx[static_cast<std::size_t>(r)]);
                b[r] = y[idx[static_cast<std::size_t>(r)]];
            }
            Eigen::FullPivLU<Matrix> lu(a);
            if (!lu.isInvertible()) return;
            const Vector beta = lu.solve(b);
            const Vector resid = y - x * beta;
            for (std::size_t t = 0; t < taus.size(); ++t) {
                double loss = 0.0;
                for (Eigen::Index i = 0; i < n; ++i) loss += check(taus[t], resid[i]);
                best[t] = std::min(best[t], loss);
            }
            return;
        }
        for (Eigen::Index i = start; i < n; ++i) {
            idx[static_cast<std::size_t>(depth)] = i;
            rec(i + 1, depth + 1);
        }
    };
    rec(0, 0);
    return best;
}

/// Lower endpoint of the check-loss minimizer by scanning the order statistics.
inline double scan_quantile(std::vector<double> v, double tau) {
    std::sort(v.begin(), v.end());
    double best_q = v.front();
    double best_loss = std::numeric_limits<double>::infinity();
    for (double q : v) {
        double loss = 0.0;
        for (double u : v) loss += check(tau, u - q);
        if (loss < best_loss - 1e-12) {
            best_loss = loss;
            best_q = q;
        }
    }
    return best_q;
}

/// Cross-quantilogram with no controlling variables, written out term by term:
/// quantiles by sorting, psi values materialised, sums in plain loops.
inline double cross_quantilogram_no_controls(const std::vector<double>& y, const std::vector<double>& x,
                                             double tau1, double tau2, int k) {
    const auto T = y.size();
    const double qy = scan_quantile(y, tau1);
    const double qx = scan_quantile(std::vector<double>(x.begin(), x.end() - k), tau2);
    const auto psi = [](double tau, double u) { return u < 0.0 ? 1.0 - tau : -tau; };
    double num = 0.0;
    double sy = 0.0;
    double sx = 0.0;
    for (std::size_t t = static_cast<std::size_t>(k); t < T; ++t) {
        const double a = psi(tau1, y[t] - qy);
        const double b = psi(tau2, x[t - static_cast<std::size_t>(k)] - qx);
        num += a * b;
        sy += a * a;
        sx += b * b;
    }
    return num / (std::sqrt(sy) * std::sqrt(sx));
}

/// Same ratio on a resample: draw s pairs y[rows[s]] with x[rows[s] - k] and is
/// skipped when rows[s] < k. With refit the quantiles come from the drawn values,
/// otherwise from the original series.
inline double resampled_cross_quantilogram_no_controls(const std::vector<double>& y,
                                                       const std::vector<double>& x,
                                                       const std::vector<long>& rows, double tau1,
                                                       double tau2, int k, bool refit) {
    std::vector<double> ys;
    std::vector<double> xs;
    std::vector<double> y_all;
    for (long r : rows) {
        y_all.push_back(y[static_cast<std::size_t>(r)]);
        if (r >= k) {
            ys.push_back(y[static_cast<std::size_t>(r)]);
            xs.push_back(x[static_cast<std::size_t>(r - k)]);
        }
    }
    const double qy = refit ? scan_quantile(y_all, tau1) : scan_quantile(y, tau1);
    const double qx = refit ? scan_quantile(xs, tau2) : scan_quantile(std::vector<double>(x.begin(), x.end() - k), tau2);
    const auto psi = [](double tau, double u) { return u < 0.0 ? 1.0 - tau : -tau; };
    double num = 0.0;
    double sy = 0.0;
    double sx = 0.0;
    for (std::size_t m = 0; m < ys.size(); ++m) {
        const double a = psi(tau1, ys[m] - qy);
        const double b = psi(tau2, xs[m] - qx);
        num += a * b;
        sy += a * a;
        sx += b * b;
    }
    return num / (std::sqrt(sy) * std::sqrt(sx));
}

}  // namespace qdep::oracle

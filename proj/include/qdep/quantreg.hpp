#pragma once

#include "qdep/types.hpp"

#include <span>
#include <vector>

namespace qdep {

/// Check loss rho_tau(u) = u * (tau - 1{u < 0}).
[[nodiscard]] double check_loss(double tau, double u);

/// Lower endpoint of the check-loss minimizer interval: the ceil(tau*T)-th
/// order statistic.
[[nodiscard]] double sample_quantile(std::span<const double> values, double tau);
[[nodiscard]] double sample_quantile(const Vector& values, double tau);

/// Same as sample_quantile, but on data that is already sorted ascending.
[[nodiscard]] double sorted_quantile(std::span<const double> sorted, double tau);

struct QuantileFit {
    double tau = 0.5;
    Vector coefficients;  // intercept first, then one per design column
    Vector fitted;        // q_t for every row of the design
    double objective = 0.0;
    int iterations = 0;
};

/// Linear quantile regression solved exactly on its LP vertices.
///
/// The fit walks from vertex to vertex of the polyhedral check-loss surface:
/// a vertex is a set of d+1 observations interpolated exactly, each step picks
/// the most negative edge derivative and performs an exact line search along
/// that edge (a weighted-median step over the residual breakpoints). Exactly
/// duplicated rows are merged into weighted observations first, which keeps
/// bootstrap samples non-degenerate. Ties that survive merging (equal responses
/// on distinct design rows) are broken by running the descent on responses
/// nudged by ~1e-9 of their range and polishing the final vertex on the
/// original data. The optimal basis of the last fit is kept
/// as the warm start of the next one, so sweeping a grid of levels on the same
/// data costs a handful of pivots per level.
///
/// Not thread-safe (warm-start state); use one instance per worker.
class QuantileRegression {
public:
    QuantileRegression(const Vector& response, const DesignMatrix& design);

    /// Throws std::invalid_argument on tau outside (0,1).
    [[nodiscard]] QuantileFit fit(double tau);

    /// Fitted values only; skips building the coefficient/objective record.
    void fitted_values(double tau, Vector& out);

    [[nodiscard]] Eigen::Index rows() const { return n_rows_; }
    [[nodiscard]] Eigen::Index parameters() const { return n_params_; }

private:
    Vector solve_coefficients(double tau, int& iterations);
    template <int P>
    Vector descend(double tau, int& iterations);

    Eigen::Index n_rows_ = 0;
    Eigen::Index n_params_ = 0;

    // Original observations (with intercept column) for fitted values.
    Matrix full_x_;
    Vector full_y_;

    // Unique rows and their multiplicities.
    Matrix xt_;  // p x n_unique, one observation per column
    Vector y_;
    Vector y_nudged_;  // y_ plus tiny distinct offsets, see the constructor
    Vector w_;

    // d == 0: sorted responses.
    std::vector<double> sorted_;

    std::vector<Eigen::Index> basis_;
};

/// One-shot convenience over QuantileRegression.
/// Requires T >= d + 2. Throws DimensionMismatch when the design row count
/// differs from the response length and DegenerateDesign when [1, Z] is rank
/// deficient (pivot tolerance 1e-10).
[[nodiscard]] QuantileFit fit_quantile_regression(const Vector& response,
                                                  const DesignMatrix& design,
                                                  double tau);

}  // namespace qdep

#pragma once

#include "qdep/types.hpp"

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

namespace qdep {

/// Quantile-hit function: 1 - tau below zero, -tau at or above zero.
[[nodiscard]] double psi(double tau, double u);

/// Cross-quantilogram estimates indexed by (tau1 index, tau2 index, lag).
struct CQGramTable {
    static constexpr double kSentinel = std::numeric_limits<double>::quiet_NaN();

    LevelGrid grid;
    std::vector<int> lags;     // 1..p for tables built by cqgram_table
    std::vector<double> rho;   // row-major over (i, j, lag position)

    [[nodiscard]] int p() const { return lags.empty() ? 0 : lags.back(); }
    [[nodiscard]] std::size_t n1() const { return grid.taus1.size(); }
    [[nodiscard]] std::size_t n2() const { return grid.taus2.size(); }
    [[nodiscard]] std::size_t n_lags() const { return lags.size(); }

    [[nodiscard]] std::size_t index(std::size_t i, std::size_t j, std::size_t lag_pos) const {
        return (i * n2() + j) * n_lags() + lag_pos;
    }
    /// Entry at lag position lag_pos (0-based into lags).
    [[nodiscard]] double at(std::size_t i, std::size_t j, std::size_t lag_pos) const {
        return rho[index(i, j, lag_pos)];
    }
    /// Sentinel cells read as 0, the convention used by the test statistics.
    [[nodiscard]] double value_or_zero(std::size_t i, std::size_t j, std::size_t lag_pos) const {
        const double v = at(i, j, lag_pos);
        return std::isnan(v) ? 0.0 : v;
    }
    [[nodiscard]] std::size_t degenerate_count() const;
    [[nodiscard]] bool same_shape(const CQGramTable& other) const {
        return grid == other.grid && lags == other.lags;
    }
};

/// Sample cross-quantilogram of Y_t on X_{t-k}. The Y quantile model is fit on
/// all T rows, the X model on rows 1..T-k; sums run over t = k+1..T.
/// Requires T > k + max(dim Z^Y, dim Z^X) + 2. Throws DegenerateDenominator if
/// either sum of squared hits vanishes.
[[nodiscard]] double cross_quantilogram(const ObservedSeries& series, double tau1, double tau2, int k);

/// Full grid x lags 1..p. Each quantile model is fit once per (tau, lag) and
/// shared by every cell that needs it; entries are bit-identical to
/// cross_quantilogram. Degenerate cells hold CQGramTable::kSentinel.
[[nodiscard]] CQGramTable cqgram_table(const ObservedSeries& series, const LevelGrid& grid, int p);

/// Table over lags 1..p for a resampled period. Draw s stands for original row
/// rows[s]; its lag-k pair is (Y at rows[s], X at rows[s] - k), so pairs keep their
/// original spacing even across block boundaries. Draws with rows[s] < k have no
/// lag-k partner and are dropped from that lag. Both quantile models are refit on
/// the drawn rows.
[[nodiscard]] CQGramTable cqgram_table_resampled(const ObservedSeries& series,
                                                 const std::vector<Eigen::Index>& rows,
                                                 const LevelGrid& grid, int p);

/// Quantile hits of one period from fits on its own rows: y[i][t] for taus1[i],
/// x[k-1][j][t] for taus2[j] from the X model fit on rows 0..T-k-1.
struct PeriodHits {
    LevelGrid grid;
    int p = 0;
    std::vector<std::vector<bool>> y;
    std::vector<std::vector<std::vector<bool>>> x;
};

[[nodiscard]] PeriodHits period_hits(const ObservedSeries& series, const LevelGrid& grid, int p);

/// Resampled table that keeps the original-sample hits instead of refitting.
/// Pairs are formed as in the refitting overload.
[[nodiscard]] CQGramTable cqgram_table_resampled(const PeriodHits& hits,
                                                 const std::vector<Eigen::Index>& rows);

/// Same as cqgram_table, for an arbitrary increasing set of lags.
[[nodiscard]] CQGramTable cqgram_table_at(const ObservedSeries& series, const LevelGrid& grid,
                                          const std::vector<int>& lags);

}  // namespace qdep

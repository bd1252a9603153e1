#pragma once

#include "qdep/cqgram.hpp"
#include "qdep/types.hpp"

#include <string>
#include <vector>

namespace qdep {

/// Cross-quantilogram heatmap at one lag: rows follow taus1 (target Y levels),
/// columns follow taus2 (source X levels). Entries are bit-identical to the
/// matching cqgram_table cells; sentinel cells stay NaN.
[[nodiscard]] Matrix heatmap_matrix(const ObservedSeries& series, const LevelGrid& grid, int k);

/// Matrices for several lags from one shared set of quantile fits.
[[nodiscard]] std::vector<Matrix> heatmap_matrices(const ObservedSeries& series, const LevelGrid& grid,
                                                   const std::vector<int>& lags);

inline const std::vector<int> kDefaultHeatmapLags{1, 5, 22};

struct HeatmapFile {
    LevelGrid grid;
    Matrix values;
};

/// CSV with a corner cell, the taus2 header row and one taus1-labelled row per
/// target level; values printed with 17 significant digits.
void write_heatmap_csv(const std::string& path, const Matrix& values, const LevelGrid& grid);
[[nodiscard]] HeatmapFile read_heatmap_csv(const std::string& path);

/// Diverging red (positive) / blue (negative) rendering, symmetric about 0.
void write_heatmap_svg(const std::string& path, const Matrix& values, const LevelGrid& grid,
                       const std::string& title);

}  // namespace qdep

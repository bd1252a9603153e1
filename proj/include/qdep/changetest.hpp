#pragma once

#include "qdep/cqgram.hpp"
#include "qdep/sbootstrap.hpp"
#include "qdep/types.hpp"

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <vector>

namespace qdep {

struct ChangeTestResult {
    double d_hat = 0.0;
    std::vector<double> d_boot;  // one centered statistic per replicate
    double p_value = 1.0;
    std::size_t replicates = 0;
    LevelGrid grid;
    int p = 0;
    std::size_t degenerate_cell_count = 0;
    std::uint64_t seed = 0;
    double block_length_b = 0.0;
    double block_length_a = 0.0;
    BootstrapScheme scheme = BootstrapScheme::Stationary;
    bool refit_quantiles = true;
};

/// sup over the grid of sum over lags of (rho_b - rho_a)^2. Sentinel cells
/// count as 0. Throws DimensionMismatch when the tables differ in shape.
[[nodiscard]] double d_statistic(const CQGramTable& table_b, const CQGramTable& table_a);

/// Bootstrap analogue of d_statistic on the deviations of each period's
/// bootstrap table from its own base table.
[[nodiscard]] double centered_boot_statistic(const CQGramTable& boot_b, const CQGramTable& base_b,
                                             const CQGramTable& boot_a, const CQGramTable& base_a);

/// Fraction of bootstrap statistics strictly above d_hat.
[[nodiscard]] double exceedance_p_value(double d_hat, const std::vector<double>& d_boot);

/// Two-period test of equal cross-quantilograms. Each replicate resamples both
/// periods independently (stream tags 0 and 1), refits every quantile model on
/// the resampled rows (unless cfg.refit_quantiles is off) and records the
/// centered statistic. Lag pairs keep their original spacing, see
/// cqgram_table_resampled. Reject at level alpha when p_value < alpha.
[[nodiscard]] ChangeTestResult run_change_test(const ObservedSeries& period_b,
                                               const ObservedSeries& period_a, const LevelGrid& grid,
                                               int p, const BootstrapConfig& cfg);

/// {d_hat, p_value, L, p, taus, d_boot, degenerate_cell_count, seed, block_length, scheme,
///  quantiles}
[[nodiscard]] nlohmann::ordered_json to_json(const ChangeTestResult& result);

[[nodiscard]] const char* to_string(BootstrapScheme scheme);

}  // namespace qdep

#pragma once

#include "qdep/rng.hpp"
#include "qdep/types.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace qdep {

enum class BootstrapScheme {
    Stationary,   // geometric block lengths, circular wraparound
    MovingBlock,  // fixed block length, starts restricted so blocks never wrap
};

struct BootstrapConfig {
    std::size_t replicates = 800;
    /// Mean block length (stationary) or block length (moving block).
    /// Empty means default_block_length(T) for each period.
    std::optional<double> expected_block_length;
    std::uint64_t seed = 1;
    BootstrapScheme scheme = BootstrapScheme::Stationary;
    /// false reuses the original-sample quantile hits in every replicate
    /// instead of refitting both quantile models on the resample.
    bool refit_quantiles = true;
    /// Worker threads for the replicate loop; 0 = hardware concurrency.
    unsigned jobs = 0;

    void validate() const;
    [[nodiscard]] double block_length_for(std::size_t T) const;
};

/// max(2, ceil(T^(1/3)))
[[nodiscard]] double default_block_length(std::size_t T);

/// One geometric block length with the given mean (>= 1).
[[nodiscard]] std::size_t draw_block_length(double mean, Engine& rng);

/// Stationary bootstrap index draw: blocks start uniformly in [0, T), have
/// geometric length with mean expected_block_length and wrap modulo T.
/// Returns exactly T zero-based row indices.
[[nodiscard]] std::vector<Eigen::Index> resample_indices(std::size_t T, double expected_block_length,
                                                         Engine& rng);

/// Moving-block draw: blocks of fixed length starting in [0, T - length].
[[nodiscard]] std::vector<Eigen::Index> moving_block_indices(std::size_t T, std::size_t block_length,
                                                             Engine& rng);

/// Row indices of one resample of a length-T period, drawn with cfg's scheme. The
/// draw is a pure function of (cfg.seed, replicate_id, stream_tag); periods
/// resampled within one replicate use different stream tags.
[[nodiscard]] std::vector<Eigen::Index> resample_rows(std::size_t T, const BootstrapConfig& cfg,
                                                      std::uint64_t replicate_id,
                                                      std::uint64_t stream_tag = 0);

/// The rows of resample_rows as a series (y, zy, x, zx travel together).
[[nodiscard]] ObservedSeries resample_series(const ObservedSeries& series, const BootstrapConfig& cfg,
                                             std::uint64_t replicate_id, std::uint64_t stream_tag = 0);

}  // namespace qdep

#include "qdep/sbootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qdep {

void BootstrapConfig::validate() const {
    if (replicates < 1) throw std::invalid_argument("bootstrap: need at least one replicate");
    if (expected_block_length && !(*expected_block_length >= 1.0)) {
        throw std::invalid_argument("bootstrap: expected block length must be >= 1");
    }
}

double BootstrapConfig::block_length_for(std::size_t T) const {
    return expected_block_length ? *expected_block_length : default_block_length(T);
}

double default_block_length(std::size_t T) {
    return std::max(2.0, std::ceil(std::cbrt(static_cast<double>(T)) - 1e-9));
}

std::size_t draw_block_length(double mean, Engine& rng) {
    if (!(mean >= 1.0)) throw std::invalid_argument("bootstrap: mean block length must be >= 1");
    if (mean == 1.0) return 1;
    std::geometric_distribution<std::size_t> failures(1.0 / mean);
    return 1 + failures(rng);
}

std::vector<Eigen::Index> resample_indices(std::size_t T, double expected_block_length, Engine& rng) {
    if (T == 0) throw std::invalid_argument("bootstrap: empty series");
    std::vector<Eigen::Index> out;
    out.reserve(T);
    std::uniform_int_distribution<std::size_t> start(0, T - 1);
    while (out.size() < T) {
        const std::size_t s = start(rng);
        const std::size_t len = std::min(draw_block_length(expected_block_length, rng), T - out.size());
        for (std::size_t j = 0; j < len; ++j) out.push_back(static_cast<Eigen::Index>((s + j) % T));
    }
    return out;
}

std::vector<Eigen::Index> moving_block_indices(std::size_t T, std::size_t block_length, Engine& rng) {
    if (T == 0) throw std::invalid_argument("bootstrap: empty series");
    const std::size_t b = std::clamp<std::size_t>(block_length, 1, T);
    std::vector<Eigen::Index> out;
    out.reserve(T);
    std::uniform_int_distribution<std::size_t> start(0, T - b);
    while (out.size() < T) {
        const std::size_t s = start(rng);
        const std::size_t len = std::min(b, T - out.size());
        for (std::size_t j = 0; j < len; ++j) out.push_back(static_cast<Eigen::Index>(s + j));
    }
    return out;
}

std::vector<Eigen::Index> resample_rows(std::size_t T, const BootstrapConfig& cfg, std::uint64_t replicate_id,
                                        std::uint64_t stream_tag) {
    cfg.validate();
    Engine rng = make_engine(cfg.seed, {stream::kBootstrap, replicate_id, stream_tag});
    const double mean = cfg.block_length_for(T);
    return cfg.scheme == BootstrapScheme::Stationary
               ? resample_indices(T, mean, rng)
               : moving_block_indices(T, static_cast<std::size_t>(std::lround(mean)), rng);
}

ObservedSeries resample_series(const ObservedSeries& series, const BootstrapConfig& cfg,
                               std::uint64_t replicate_id, std::uint64_t stream_tag) {
    series.validate();
    return series.select_rows(
        resample_rows(static_cast<std::size_t>(series.length()), cfg, replicate_id, stream_tag));
}

}  // namespace qdep

#include "oracles.hpp"
#include "qdep/cqgram.hpp"
#include "qdep/dgpsim.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

using namespace qdep;

namespace {

ObservedSeries noise_series(std::uint64_t seed, Eigen::Index n, Eigen::Index dy = 0, Eigen::Index dx = 0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    ObservedSeries s(Vector(n), Matrix(n, dy), Vector(n), Matrix(n, dx));
    for (Eigen::Index t = 0; t < n; ++t) {
        s.y[t] = normal(rng);
        s.x[t] = normal(rng);
        for (Eigen::Index c = 0; c < dy; ++c) s.zy(t, c) = normal(rng);
        for (Eigen::Index c = 0; c < dx; ++c) s.zx(t, c) = normal(rng);
    }
    return s;
}

/// X = 1..8 and Y_t = X_{t-1}; Y_1 is placed above every other value so the
/// median hits of Y_t and X_{t-1} coincide term by term.
ObservedSeries shifted_copy() {
    Vector x(8);
    x << 1, 2, 3, 4, 5, 6, 7, 8;
    Vector y(8);
    y << 9, 1, 2, 3, 4, 5, 6, 7;
    return ObservedSeries::plain(y, x);
}

}  // namespace

TEST(Psi, BranchValues) {
    EXPECT_DOUBLE_EQ(psi(0.5, -0.1), 0.5);
    EXPECT_DOUBLE_EQ(psi(0.5, 0.0), -0.5);
    EXPECT_DOUBLE_EQ(psi(0.05, 1.0), -0.05);
    EXPECT_THROW((void)psi(0.0, 1.0), std::invalid_argument);
}

TEST(CrossQuantilogram, ShiftedCopyIsPerfectlyDependent) {
    EXPECT_DOUBLE_EQ(cross_quantilogram(shifted_copy(), 0.5, 0.5, 1), 1.0);
    const auto table = cqgram_table(shifted_copy(), LevelGrid::square({0.5}), 1);
    ASSERT_EQ(table.rho.size(), 1u);
    EXPECT_DOUBLE_EQ(table.rho[0], 1.0);
}

TEST(CrossQuantilogram, IndependentSeriesNearZero) {
    const auto s = noise_series(31, 10000);
    for (double t1 : {0.05, 0.5, 0.95}) {
        for (double t2 : {0.1, 0.5, 0.9}) {
            for (int k : {1, 3, 5}) {
                EXPECT_LT(std::abs(cross_quantilogram(s, t1, t2, k)), 0.05);
            }
        }
    }
}

TEST(CrossQuantilogram, MatchesTermByTermEvaluation) {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> len(8, 30);
    std::uniform_real_distribution<double> level(0.02, 0.98);
    for (int rep = 0; rep < 20; ++rep) {
        const auto s = noise_series(100 + static_cast<std::uint64_t>(rep), len(rng));
        const std::vector<double> y(s.y.data(), s.y.data() + s.y.size());
        const std::vector<double> x(s.x.data(), s.x.data() + s.x.size());
        for (int k = 1; k <= 3; ++k) {
            const double t1 = level(rng);
            const double t2 = level(rng);
            EXPECT_NEAR(cross_quantilogram(s, t1, t2, k), oracle::cross_quantilogram_no_controls(y, x, t1, t2, k),
                        1e-12);
        }
    }
}

TEST(CrossQuantilogram, BoundedOnFuzzedInputs) {
    std::mt19937_64 rng(8);
    std::uniform_int_distribution<int> len(10, 60);
    std::uniform_real_distribution<double> level(0.01, 0.99);
    std::uniform_int_distribution<int> coin(0, 3);
    for (int rep = 0; rep < 300; ++rep) {
        const int n = len(rng);
        auto s = noise_series(5000 + static_cast<std::uint64_t>(rep), n, coin(rng) % 2, coin(rng) % 2);
        if (coin(rng) == 0) s.y = s.y.array().round();  // heavy ties
        const double r = cross_quantilogram(s, level(rng), level(rng), 1 + coin(rng));
        EXPECT_GE(r, -1.0);
        EXPECT_LE(r, 1.0);
    }
}

TEST(CrossQuantilogram, RejectsInfeasibleLag) {
    const auto s = noise_series(1, 6, 1, 1);
    EXPECT_THROW((void)cross_quantilogram(s, 0.5, 0.5, 3), std::invalid_argument);
    EXPECT_THROW((void)cross_quantilogram(s, 0.5, 0.5, 0), std::invalid_argument);
    auto bad = s;
    bad.x.conservativeResize(5);
    EXPECT_THROW((void)cross_quantilogram(bad, 0.5, 0.5, 1), DimensionMismatch);
}

TEST(CQGramTable, ShapeContract) {
    const auto table = cqgram_table(noise_series(2, 200), LevelGrid::standard(), 5);
    EXPECT_EQ(table.n1(), 19u);
    EXPECT_EQ(table.n2(), 19u);
    EXPECT_EQ(table.n_lags(), 5u);
    EXPECT_EQ(table.rho.size(), 19u * 19u * 5u);
    EXPECT_EQ(table.degenerate_count(), 0u);
}

TEST(CQGramTable, CellsMatchDirectEvaluationBitExactly) {
    for (auto [dy, dx] : {std::pair{0, 0}, std::pair{2, 1}, std::pair{1, 1}}) {
        const auto s = noise_series(77, 150, dy, dx);
        const LevelGrid grid({0.05, 0.3, 0.5, 0.9}, {0.1, 0.5, 0.95});
        const auto table = cqgram_table(s, grid, 3);
        for (std::size_t i = 0; i < grid.taus1.size(); ++i) {
            for (std::size_t j = 0; j < grid.taus2.size(); ++j) {
                for (int k = 1; k <= 3; ++k) {
                    EXPECT_EQ(table.at(i, j, static_cast<std::size_t>(k - 1)),
                              cross_quantilogram(s, grid.taus1[i], grid.taus2[j], k))
                        << dy << dx << " " << i << j << k;
                }
            }
        }
    }
}

TEST(CQGramTable, CellsDoNotDependOnOtherLevels) {
    const auto s = noise_series(12, 300, 1, 1);
    const auto full = cqgram_table(s, LevelGrid::standard(), 2);
    const LevelGrid sub({0.1, 0.55, 0.95}, {0.05, 0.75});
    const auto part = cqgram_table(s, sub, 2);
    auto pos = [](const std::vector<double>& v, double t) {
        return static_cast<std::size_t>(std::find(v.begin(), v.end(), t) - v.begin());
    };
    for (std::size_t i = 0; i < sub.taus1.size(); ++i) {
        for (std::size_t j = 0; j < sub.taus2.size(); ++j) {
            for (std::size_t l = 0; l < 2; ++l) {
                EXPECT_EQ(part.at(i, j, l),
                          full.at(pos(full.grid.taus1, sub.taus1[i]), pos(full.grid.taus2, sub.taus2[j]), l));
            }
        }
    }
}

TEST(CQGramTable, MonotoneTransformOfTargetLeavesTableUnchanged) {
    auto s = noise_series(44, 250);
    const auto base = cqgram_table(s, LevelGrid::standard(), 5);
    s.y = s.y.array().exp();
    EXPECT_EQ(cqgram_table(s, LevelGrid::standard(), 5).rho, base.rho);
    s.y = s.y.array().cube() * 3.0 - 7.0;
    EXPECT_EQ(cqgram_table(s, LevelGrid::standard(), 5).rho, base.rho);
}

TEST(CQGramTable, LagsMustIncrease) {
    const auto s = noise_series(5, 100);
    EXPECT_THROW((void)cqgram_table_at(s, LevelGrid::standard(), {3, 1}), std::invalid_argument);
    EXPECT_THROW((void)cqgram_table(s, LevelGrid::standard(), 0), std::invalid_argument);
}

TEST(ResampledTable, IdentityRowsReproduceTheTable) {
    for (auto [dy, dx] : {std::pair{0, 0}, std::pair{2, 1}}) {
        const auto s = noise_series(61, 140, dy, dx);
        const LevelGrid grid({0.1, 0.5, 0.85}, {0.2, 0.5});
        std::vector<Eigen::Index> rows(140);
        for (Eigen::Index t = 0; t < 140; ++t) rows[static_cast<std::size_t>(t)] = t;
        const auto base = cqgram_table(s, grid, 3);
        EXPECT_EQ(cqgram_table_resampled(s, rows, grid, 3).rho, base.rho);
        EXPECT_EQ(cqgram_table_resampled(period_hits(s, grid, 3), rows).rho, base.rho);
    }
}

TEST(ResampledTable, PairsKeepTheirOriginalSpacing) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> level(0.05, 0.95);
    for (int rep = 0; rep < 10; ++rep) {
        const Eigen::Index T = 40;
        const auto s = noise_series(300 + static_cast<std::uint64_t>(rep), T);
        const std::vector<double> y(s.y.data(), s.y.data() + T);
        const std::vector<double> x(s.x.data(), s.x.data() + T);
        // short blocks so many draws sit right after a block boundary
        std::vector<Eigen::Index> rows;
        std::vector<long> rows_l;
        std::uniform_int_distribution<Eigen::Index> start(0, T - 1);
        while (rows.size() < static_cast<std::size_t>(T)) {
            const auto b = start(rng);
            for (Eigen::Index j = 0; j < 3 && rows.size() < static_cast<std::size_t>(T); ++j) {
                rows.push_back((b + j) % T);
                rows_l.push_back(static_cast<long>((b + j) % T));
            }
        }
        std::vector<double> taus{level(rng), level(rng)};
        std::sort(taus.begin(), taus.end());
        const LevelGrid grid = LevelGrid::square(taus);
        const auto refit = cqgram_table_resampled(s, rows, grid, 3);
        const auto fixed = cqgram_table_resampled(period_hits(s, grid, 3), rows);
        for (std::size_t i = 0; i < 2; ++i) {
            for (std::size_t j = 0; j < 2; ++j) {
                for (int k = 1; k <= 3; ++k) {
                    const auto l = static_cast<std::size_t>(k - 1);
                    const double t1 = grid.taus1[i];
                    const double t2 = grid.taus2[j];
                    EXPECT_NEAR(refit.at(i, j, l),
                                oracle::resampled_cross_quantilogram_no_controls(y, x, rows_l, t1, t2, k, true),
                                1e-12);
                    EXPECT_NEAR(fixed.at(i, j, l),
                                oracle::resampled_cross_quantilogram_no_controls(y, x, rows_l, t1, t2, k, false),
                                1e-12);
                }
            }
        }
    }
}

TEST(ResampledTable, RejectsRowsOutsideThePeriod) {
    const auto s = noise_series(9, 30);
    const auto grid = LevelGrid::square({0.5});
    EXPECT_THROW((void)cqgram_table_resampled(s, {0, 30}, grid, 1), std::out_of_range);
    EXPECT_THROW((void)cqgram_table_resampled(period_hits(s, grid, 1), {-1, 2}), std::out_of_range);
}

TEST(LevelGrid, StandardGrid) {
    const auto g = LevelGrid::standard();
    ASSERT_EQ(g.taus1.size(), 19u);
    EXPECT_EQ(g.taus1.front(), 0.05);
    EXPECT_EQ(g.taus1[2], 0.15);
    EXPECT_EQ(g.taus1.back(), 0.95);
    EXPECT_THROW(LevelGrid({0.5, 0.4}, {0.5}), std::invalid_argument);
    EXPECT_THROW(LevelGrid({}, {0.5}), std::invalid_argument);
    EXPECT_THROW(LevelGrid({1.0}, {0.5}), std::invalid_argument);
}

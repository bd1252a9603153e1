#include "qdep/changetest.hpp"
#include "qdep/dgpsim.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace qdep;

namespace {

CQGramTable small_table(std::vector<double> rho) {
    CQGramTable t;
    t.grid = LevelGrid({0.25, 0.75}, {0.5});
    t.lags = {1, 2};
    t.rho = std::move(rho);
    return t;
}

ObservedSeries p1_period(double a0, double a1, std::size_t T, std::uint64_t seed) {
    Engine rng(seed);
    return simulate_period(DGPSpec::p1(a0, a1, T), rng);
}

BootstrapConfig quick_config(std::size_t L, unsigned jobs = 1) {
    BootstrapConfig cfg;
    cfg.replicates = L;
    cfg.seed = 77;
    cfg.jobs = jobs;
    return cfg;
}

const LevelGrid kSmallGrid = LevelGrid::square({0.2, 0.5, 0.8});

}  // namespace

TEST(DStatistic, IdenticalTablesGiveZero) {
    const auto t = small_table({0.1, -0.2, 0.3, 0.05});
    EXPECT_EQ(d_statistic(t, t), 0.0);
}

TEST(DStatistic, SupOfLagSums) {
    const auto b = small_table({0.4, 0.0, 0.0, 0.0});
    const auto a = small_table({0.0, 0.0, 0.0, 0.0});
    EXPECT_DOUBLE_EQ(d_statistic(b, a), 0.16);
    // Cell 0 sums to 0.16 + 0.09, cell 1 to 0.16: the larger wins.
    const auto c = small_table({0.4, 0.3, -0.4, 0.0});
    EXPECT_DOUBLE_EQ(d_statistic(c, a), 0.25);
}

TEST(DStatistic, SentinelCountsAsZero) {
    const auto b = small_table({CQGramTable::kSentinel, 0.0, 0.0, 0.0});
    const auto a = small_table({0.3, 0.0, 0.0, 0.0});
    EXPECT_DOUBLE_EQ(d_statistic(b, a), 0.09);
}

TEST(DStatistic, ShapeMismatch) {
    auto b = small_table({0.0, 0.0, 0.0, 0.0});
    auto a = b;
    a.lags = {1, 3};
    EXPECT_THROW((void)d_statistic(b, a), DimensionMismatch);
}

TEST(CenteredStatistic, Examples) {
    const auto base_b = small_table({0.1, 0.1, 0.1, 0.1});
    const auto base_a = small_table({-0.2, 0.0, 0.0, 0.0});
    // Both periods moved by the same amount.
    const auto boot_b = small_table({0.3, 0.1, 0.1, 0.1});
    const auto boot_a = small_table({0.0, 0.0, 0.0, 0.0});
    EXPECT_NEAR(centered_boot_statistic(boot_b, base_b, boot_a, base_a), 0.0, 1e-15);
    EXPECT_NEAR(centered_boot_statistic(boot_b, base_b, base_a, base_a), 0.04, 1e-15);
    const auto moved_b = small_table({0.1, 0.1, 0.4, 0.1});
    EXPECT_NEAR(centered_boot_statistic(moved_b, base_b, base_a, base_a), 0.09, 1e-15);
}

TEST(PValue, StrictExceedance) {
    EXPECT_DOUBLE_EQ(exceedance_p_value(1.0, {0.5, 1.0, 1.5, 2.0}), 0.5);
    EXPECT_DOUBLE_EQ(exceedance_p_value(0.0, {0.0, 0.0}), 0.0);
    EXPECT_DOUBLE_EQ(exceedance_p_value(-1.0, {0.0, 0.0}), 1.0);
    EXPECT_THROW((void)exceedance_p_value(0.0, {}), std::invalid_argument);
}

TEST(ChangeTest, PValueGranularityAndRange) {
    const auto b = p1_period(-0.5, 0.4, 150, 1);
    const auto a = p1_period(-0.5, 0.4, 150, 2);
    const auto r = run_change_test(b, a, kSmallGrid, 2, quick_config(4));
    ASSERT_EQ(r.d_boot.size(), 4u);
    EXPECT_DOUBLE_EQ(r.p_value * 4.0, std::round(r.p_value * 4.0));
    EXPECT_GE(r.p_value, 0.0);
    EXPECT_LE(r.p_value, 1.0);
    EXPECT_GE(r.d_hat, 0.0);
    EXPECT_EQ(r.block_length_b, default_block_length(150));
}

TEST(ChangeTest, SwappingPeriodsKeepsDHat) {
    const auto b = p1_period(-0.5, 0.4, 150, 3);
    const auto a = p1_period(0.5, -0.4, 150, 4);
    const auto r1 = run_change_test(b, a, kSmallGrid, 2, quick_config(3));
    const auto r2 = run_change_test(a, b, kSmallGrid, 2, quick_config(3));
    EXPECT_EQ(r1.d_hat, r2.d_hat);
}

TEST(ChangeTest, DeterministicAcrossThreadCounts) {
    const auto b = p1_period(-0.5, 0.4, 120, 5);
    const auto a = p1_period(-0.5, 0.0, 120, 6);
    const auto r1 = run_change_test(b, a, kSmallGrid, 2, quick_config(12, 1));
    const auto r2 = run_change_test(b, a, kSmallGrid, 2, quick_config(12, 4));
    EXPECT_EQ(r1.d_boot, r2.d_boot);
    EXPECT_EQ(r1.p_value, r2.p_value);
}

TEST(ChangeTest, MonotoneTransformLeavesDHat) {
    auto b = p1_period(-0.5, 0.4, 150, 7);
    auto a = p1_period(0.5, 0.0, 150, 8);
    const auto r1 = run_change_test(b, a, kSmallGrid, 3, quick_config(1));
    for (auto* s : {&b, &a}) {
        s->y = s->y.array().exp().matrix();
        s->x = s->x.array().cube().matrix();
    }
    const auto r2 = run_change_test(b, a, kSmallGrid, 3, quick_config(1));
    EXPECT_EQ(r1.d_hat, r2.d_hat);
}

TEST(ChangeTest, RejectsBadInput) {
    const auto b = p1_period(0.0, 0.0, 50, 9);
    auto cfg = quick_config(0);
    EXPECT_THROW((void)run_change_test(b, b, kSmallGrid, 2, cfg), std::invalid_argument);
    EXPECT_THROW((void)run_change_test(b, b, kSmallGrid, 0, quick_config(2)), std::invalid_argument);
}

TEST(ChangeTest, JsonLayout) {
    const auto b = p1_period(0.2, 0.1, 80, 10);
    const auto a = p1_period(0.2, 0.3, 90, 11);
    const auto r = run_change_test(b, a, kSmallGrid, 2, quick_config(5));
    const auto j = to_json(r);
    std::vector<std::string> keys;
    for (const auto& [k, v] : j.items()) keys.push_back(k);
    const std::vector<std::string> expected{"d_hat", "p_value", "L", "p", "taus", "d_boot",
                                            "degenerate_cell_count", "seed", "block_length", "scheme",
                                            "quantiles"};
    EXPECT_EQ(keys, expected);
    EXPECT_EQ(j["L"], 5);
    EXPECT_EQ(j["d_boot"].size(), 5u);
    EXPECT_EQ(j["taus"]["tau1"].size(), 3u);
    EXPECT_EQ(j["scheme"], "stationary");
    EXPECT_EQ(j["quantiles"], "refit");
    EXPECT_EQ(j["block_length"]["period_b"], default_block_length(80));
}

TEST(ChangeTest, FixedQuantilesShareDHatAndStayDeterministic) {
    const auto b = p1_period(-0.5, 0.4, 120, 12);
    const auto a = p1_period(-0.5, 0.0, 120, 13);
    auto cfg = quick_config(20, 1);
    const auto refit = run_change_test(b, a, kSmallGrid, 2, cfg);
    cfg.refit_quantiles = false;
    const auto fixed = run_change_test(b, a, kSmallGrid, 2, cfg);
    EXPECT_EQ(fixed.d_hat, refit.d_hat);
    EXPECT_NE(fixed.d_boot, refit.d_boot);
    cfg.jobs = 3;
    EXPECT_EQ(run_change_test(b, a, kSmallGrid, 2, cfg).d_boot, fixed.d_boot);
    EXPECT_EQ(to_json(fixed)["quantiles"], "fixed");
}

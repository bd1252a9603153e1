#include "qdep/changetest.hpp"

#include "qdep/parallel.hpp"

#include <algorithm>
#include <optional>
#include <string>

namespace qdep {

namespace {

void require_same_shape(const CQGramTable& a, const CQGramTable& b) {
    if (!a.same_shape(b)) throw DimensionMismatch("change test: tables differ in grid or lags");
}

/// sup_{i,j} sum_l cell(i, j, l)^2
template <class Cell>
double sup_sum_squares(const CQGramTable& shape, Cell&& cell) {
    double best = 0.0;
    for (std::size_t i = 0; i < shape.n1(); ++i) {
        for (std::size_t j = 0; j < shape.n2(); ++j) {
            double sum = 0.0;
            for (std::size_t l = 0; l < shape.n_lags(); ++l) {
                const double diff = cell(i, j, l);
                sum += diff * diff;
            }
            best = std::max(best, sum);
        }
    }
    return best;
}

CQGramTable table_or_sentinels(const ObservedSeries& series, const std::vector<Eigen::Index>& rows,
                               const LevelGrid& grid, int p) {
    try {
        return cqgram_table_resampled(series, rows, grid, p);
    } catch (const DegenerateDesign&) {
        // A resample can collapse onto too few distinct control rows; the
        // whole table then carries no information and is marked degenerate.
        CQGramTable table;
        table.grid = grid;
        for (int k = 1; k <= p; ++k) table.lags.push_back(k);
        table.rho.assign(grid.taus1.size() * grid.taus2.size() * static_cast<std::size_t>(p),
                         CQGramTable::kSentinel);
        return table;
    }
}

}  // namespace

double d_statistic(const CQGramTable& table_b, const CQGramTable& table_a) {
    require_same_shape(table_b, table_a);
    return sup_sum_squares(table_b, [&](std::size_t i, std::size_t j, std::size_t l) {
        return table_b.value_or_zero(i, j, l) - table_a.value_or_zero(i, j, l);
    });
}

double centered_boot_statistic(const CQGramTable& boot_b, const CQGramTable& base_b,
                               const CQGramTable& boot_a, const CQGramTable& base_a) {
    require_same_shape(boot_b, base_b);
    require_same_shape(boot_b, boot_a);
    require_same_shape(boot_b, base_a);
    return sup_sum_squares(boot_b, [&](std::size_t i, std::size_t j, std::size_t l) {
        return (boot_b.value_or_zero(i, j, l) - base_b.value_or_zero(i, j, l)) -
               (boot_a.value_or_zero(i, j, l) - base_a.value_or_zero(i, j, l));
    });
}

double exceedance_p_value(double d_hat, const std::vector<double>& d_boot) {
    if (d_boot.empty()) throw std::invalid_argument("change test: no bootstrap statistics");
    const auto exceed = std::count_if(d_boot.begin(), d_boot.end(), [&](double d) { return d_hat < d; });
    return static_cast<double>(exceed) / static_cast<double>(d_boot.size());
}

ChangeTestResult run_change_test(const ObservedSeries& period_b, const ObservedSeries& period_a,
                                 const LevelGrid& grid, int p, const BootstrapConfig& cfg) {
    cfg.validate();
    grid.validate();
    period_b.validate();
    period_a.validate();

    const CQGramTable base_b = cqgram_table(period_b, grid, p);
    const CQGramTable base_a = cqgram_table(period_a, grid, p);

    ChangeTestResult out;
    out.d_hat = d_statistic(base_b, base_a);
    out.replicates = cfg.replicates;
    out.grid = grid;
    out.p = p;
    out.seed = cfg.seed;
    out.block_length_b = cfg.block_length_for(static_cast<std::size_t>(period_b.length()));
    out.block_length_a = cfg.block_length_for(static_cast<std::size_t>(period_a.length()));
    out.scheme = cfg.scheme;

    out.refit_quantiles = cfg.refit_quantiles;
    out.d_boot.assign(cfg.replicates, 0.0);

    std::optional<PeriodHits> hits_b;
    std::optional<PeriodHits> hits_a;
    if (!cfg.refit_quantiles) {
        hits_b = period_hits(period_b, grid, p);
        hits_a = period_hits(period_a, grid, p);
    }
    std::vector<std::size_t> degenerate(cfg.replicates, 0);
    parallel_for(cfg.replicates, cfg.jobs, [&](std::size_t rep) {
        const auto rows_b = resample_rows(static_cast<std::size_t>(period_b.length()), cfg, rep, 0);
        const auto rows_a = resample_rows(static_cast<std::size_t>(period_a.length()), cfg, rep, 1);
        const auto boot_b = hits_b ? cqgram_table_resampled(*hits_b, rows_b) : table_or_sentinels(period_b, rows_b, grid, p);
        const auto boot_a = hits_a ? cqgram_table_resampled(*hits_a, rows_a) : table_or_sentinels(period_a, rows_a, grid, p);
        out.d_boot[rep] = centered_boot_statistic(boot_b, base_b, boot_a, base_a);
        degenerate[rep] = boot_b.degenerate_count() + boot_a.degenerate_count();
    });

    out.degenerate_cell_count = base_b.degenerate_count() + base_a.degenerate_count();
    for (auto c : degenerate) out.degenerate_cell_count += c;
    out.p_value = exceedance_p_value(out.d_hat, out.d_boot);
    return out;
}

const char* to_string(BootstrapScheme scheme) {
    return scheme == BootstrapScheme::Stationary ? "stationary" : "moving-block";
}

nlohmann::ordered_json to_json(const ChangeTestResult& result) {
    nlohmann::ordered_json j;
    j["d_hat"] = result.d_hat;
    j["p_value"] = result.p_value;
    j["L"] = result.replicates;
    j["p"] = result.p;
    j["taus"] = {{"tau1", result.grid.taus1}, {"tau2", result.grid.taus2}};
    j["d_boot"] = result.d_boot;
    j["degenerate_cell_count"] = result.degenerate_cell_count;
    j["seed"] = result.seed;
    j["block_length"] = {{"period_b", result.block_length_b}, {"period_a", result.block_length_a}};
    j["scheme"] = to_string(result.scheme);
    j["quantiles"] = result.refit_quantiles ? "refit" : "fixed";
    return j;
}

}  // namespace qdep

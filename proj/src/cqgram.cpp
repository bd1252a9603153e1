#include "qdep/cqgram.hpp"

#include "qdep/quantreg.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <string>

namespace qdep {

double psi(double tau, double u) {
    require_level(tau);
    return u < 0.0 ? 1.0 - tau : -tau;
}

std::size_t CQGramTable::degenerate_count() const {
    return static_cast<std::size_t>(std::count_if(rho.begin(), rho.end(), [](double v) { return std::isnan(v); }));
}

namespace {

/// Packed indicator sequence: bit t set iff residual_t < 0.
class HitBits {
public:
    HitBits() = default;
    explicit HitBits(std::size_t n) : n_(n), words_((n + 63) / 64, 0) {}

    void set(std::size_t t) { words_[t / 64] |= std::uint64_t{1} << (t % 64); }
    [[nodiscard]] bool test(std::size_t t) const { return (words_[t / 64] >> (t % 64)) & 1U; }
    [[nodiscard]] std::size_t size() const { return n_; }

    /// Bits [offset, offset + len) re-based at zero.
    [[nodiscard]] HitBits slice(std::size_t offset, std::size_t len) const {
        HitBits out(len);
        const std::size_t shift = offset % 64;
        const std::size_t base = offset / 64;
        for (std::size_t w = 0; w < out.words_.size(); ++w) {
            std::uint64_t lo = base + w < words_.size() ? words_[base + w] : 0;
            std::uint64_t hi = base + w + 1 < words_.size() ? words_[base + w + 1] : 0;
            out.words_[w] = shift == 0 ? lo : (lo >> shift) | (hi << (64 - shift));
        }
        out.mask_tail();
        return out;
    }

    [[nodiscard]] std::size_t count() const {
        std::size_t c = 0;
        for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
        return c;
    }

    [[nodiscard]] std::size_t count_and(const HitBits& other) const {
        std::size_t c = 0;
        for (std::size_t w = 0; w < words_.size(); ++w) {
            c += static_cast<std::size_t>(std::popcount(words_[w] & other.words_[w]));
        }
        return c;
    }

private:
    void mask_tail() {
        if (n_ % 64 != 0 && !words_.empty()) words_.back() &= (std::uint64_t{1} << (n_ % 64)) - 1;
    }

    std::size_t n_ = 0;
    std::vector<std::uint64_t> words_;
};

HitBits hits_below(const Vector& response, const Vector& fitted) {
    HitBits bits(static_cast<std::size_t>(response.size()));
    for (Eigen::Index t = 0; t < response.size(); ++t) {
        if (response[t] - fitted[t] < 0.0) bits.set(static_cast<std::size_t>(t));
    }
    return bits;
}

/// Ratio from hit counts over n aligned terms: a Y hits, b X hits, c joint.
double ratio_from_counts(double tau1, double tau2, std::size_t n, std::size_t a, std::size_t b,
                         std::size_t c) {
    const auto nd = static_cast<double>(n);
    const auto ad = static_cast<double>(a);
    const auto bd = static_cast<double>(b);
    const auto cd = static_cast<double>(c);
    const double num = cd - tau2 * ad - tau1 * bd + nd * tau1 * tau2;
    const double den_y = ad * (1.0 - 2.0 * tau1) + nd * tau1 * tau1;
    const double den_x = bd * (1.0 - 2.0 * tau2) + nd * tau2 * tau2;
    if (!(den_y > 0.0) || !(den_x > 0.0)) return CQGramTable::kSentinel;
    return std::clamp(num / (std::sqrt(den_y) * std::sqrt(den_x)), -1.0, 1.0);
}

void check_lag_feasible(const ObservedSeries& series, int k) {
    if (k < 1) throw std::invalid_argument("cross-quantilogram: lag must be >= 1");
    const auto d = std::max(series.zy.cols(), series.zx.cols());
    if (series.length() <= k + d + 2) {
        throw std::invalid_argument("cross-quantilogram: series of length " +
                                    std::to_string(series.length()) + " too short for lag " +
                                    std::to_string(k) + " with " + std::to_string(d) +
                                    " controlling variables");
    }
}

HitBits x_hits(const ObservedSeries& series, int k, double tau, QuantileRegression& solver,
               Vector& work) {
    const auto m = series.length() - k;
    solver.fitted_values(tau, work);
    return hits_below(series.x.head(m), work);
}

QuantileRegression x_solver(const ObservedSeries& series, int k) {
    const auto m = series.length() - k;
    return QuantileRegression(series.x.head(m), series.zx.topRows(m));
}

}  // namespace

double cross_quantilogram(const ObservedSeries& series, double tau1, double tau2, int k) {
    series.validate();
    require_level(tau1, "tau1");
    require_level(tau2, "tau2");
    check_lag_feasible(series, k);
    const auto T = static_cast<std::size_t>(series.length());
    const auto n = T - static_cast<std::size_t>(k);

    Vector work;
    QuantileRegression ysolver(series.y, series.zy);
    ysolver.fitted_values(tau1, work);
    const HitBits yh = hits_below(series.y, work).slice(static_cast<std::size_t>(k), n);

    QuantileRegression xsolver = x_solver(series, k);
    const HitBits xh = x_hits(series, k, tau2, xsolver, work);

    const double r = ratio_from_counts(tau1, tau2, n, yh.count(), xh.count(), yh.count_and(xh));
    if (std::isnan(r)) throw DegenerateDenominator("cross-quantilogram: zero denominator");
    return r;
}

CQGramTable cqgram_table_at(const ObservedSeries& series, const LevelGrid& grid,
                            const std::vector<int>& lags) {
    series.validate();
    grid.validate();
    if (lags.empty()) throw std::invalid_argument("cqgram table: no lags requested");
    for (std::size_t l = 0; l < lags.size(); ++l) {
        check_lag_feasible(series, lags[l]);
        if (l > 0 && lags[l] <= lags[l - 1]) {
            throw std::invalid_argument("cqgram table: lags must be strictly increasing");
        }
    }

    CQGramTable table;
    table.grid = grid;
    table.lags = lags;
    const std::size_t n1 = grid.taus1.size();
    const std::size_t n2 = grid.taus2.size();
    const std::size_t nl = lags.size();
    table.rho.assign(n1 * n2 * nl, CQGramTable::kSentinel);
    const auto T = static_cast<std::size_t>(series.length());

    Vector work;
    std::vector<HitBits> yfull;
    yfull.reserve(n1);
    {
        QuantileRegression ysolver(series.y, series.zy);
        for (double tau1 : grid.taus1) {
            ysolver.fitted_values(tau1, work);
            yfull.push_back(hits_below(series.y, work));
        }
    }

    std::vector<HitBits> yslice(n1);
    std::vector<std::size_t> ycount(n1);
    std::vector<HitBits> xh(n2);
    std::vector<std::size_t> xcount(n2);
    for (std::size_t l = 0; l < nl; ++l) {
        const int k = lags[l];
        const std::size_t n = T - static_cast<std::size_t>(k);
        for (std::size_t i = 0; i < n1; ++i) {
            yslice[i] = yfull[i].slice(static_cast<std::size_t>(k), n);
            ycount[i] = yslice[i].count();
        }
        QuantileRegression xsolver = x_solver(series, k);
        for (std::size_t j = 0; j < n2; ++j) {
            xh[j] = x_hits(series, k, grid.taus2[j], xsolver, work);
            xcount[j] = xh[j].count();
        }
        for (std::size_t i = 0; i < n1; ++i) {
            for (std::size_t j = 0; j < n2; ++j) {
                table.rho[table.index(i, j, l)] =
                    ratio_from_counts(grid.taus1[i], grid.taus2[j], n, ycount[i], xcount[j],
                                      yslice[i].count_and(xh[j]));
            }
        }
    }
    return table;
}

namespace {

CQGramTable empty_table(const LevelGrid& grid, int p) {
    if (p < 1) throw std::invalid_argument("cqgram table: max lag must be >= 1");
    CQGramTable table;
    table.grid = grid;
    for (int k = 1; k <= p; ++k) table.lags.push_back(k);
    table.rho.assign(grid.taus1.size() * grid.taus2.size() * static_cast<std::size_t>(p),
                     CQGramTable::kSentinel);
    return table;
}

void check_rows(const std::vector<Eigen::Index>& rows, Eigen::Index T) {
    if (rows.empty()) throw std::invalid_argument("cqgram table: empty resample");
    for (auto r : rows) {
        if (r < 0 || r >= T) throw std::out_of_range("cqgram table: resample row out of range");
    }
}

/// Positions s with a lag-k partner, and the partner rows rows[s] - k.
void lag_pairs(const std::vector<Eigen::Index>& rows, int k, std::vector<std::size_t>& keep,
               std::vector<Eigen::Index>& partner) {
    keep.clear();
    partner.clear();
    for (std::size_t s = 0; s < rows.size(); ++s) {
        if (rows[s] >= k) {
            keep.push_back(s);
            partner.push_back(rows[s] - k);
        }
    }
}

void fill_lag(CQGramTable& table, std::size_t l, std::size_t n, const std::vector<HitBits>& yh,
              const std::vector<HitBits>& xh) {
    std::vector<std::size_t> xcount(xh.size());
    for (std::size_t j = 0; j < xh.size(); ++j) xcount[j] = xh[j].count();
    for (std::size_t i = 0; i < yh.size(); ++i) {
        const std::size_t ycount = yh[i].count();
        for (std::size_t j = 0; j < xh.size(); ++j) {
            table.rho[table.index(i, j, l)] = ratio_from_counts(
                table.grid.taus1[i], table.grid.taus2[j], n, ycount, xcount[j], yh[i].count_and(xh[j]));
        }
    }
}

}  // namespace

CQGramTable cqgram_table_resampled(const ObservedSeries& series, const std::vector<Eigen::Index>& rows,
                                   const LevelGrid& grid, int p) {
    series.validate();
    grid.validate();
    CQGramTable table = empty_table(grid, p);
    check_rows(rows, series.length());
    const std::size_t n1 = grid.taus1.size();
    const std::size_t n2 = grid.taus2.size();

    const ObservedSeries drawn = series.select_rows(rows);
    Vector work;
    std::vector<Vector> yfit;
    yfit.reserve(n1);
    {
        QuantileRegression ysolver(drawn.y, drawn.zy);
        for (double tau1 : grid.taus1) {
            ysolver.fitted_values(tau1, work);
            yfit.push_back(work);
        }
    }

    const auto d = std::max(series.zy.cols(), series.zx.cols());
    std::vector<HitBits> yh(n1);
    std::vector<HitBits> xh(n2);
    std::vector<std::size_t> keep;
    std::vector<Eigen::Index> partner;
    for (int k = 1; k <= p; ++k) {
        lag_pairs(rows, k, keep, partner);
        const std::size_t n = keep.size();
        if (static_cast<Eigen::Index>(n) <= d + 2) continue;

        for (std::size_t i = 0; i < n1; ++i) {
            yh[i] = HitBits(n);
            for (std::size_t m = 0; m < n; ++m) {
                const auto s = static_cast<Eigen::Index>(keep[m]);
                if (drawn.y[s] - yfit[i][s] < 0.0) yh[i].set(m);
            }
        }
        const ObservedSeries lagged = series.select_rows(partner);
        QuantileRegression xsolver(lagged.x, lagged.zx);
        for (std::size_t j = 0; j < n2; ++j) {
            xsolver.fitted_values(grid.taus2[j], work);
            xh[j] = hits_below(lagged.x, work);
        }
        fill_lag(table, static_cast<std::size_t>(k - 1), n, yh, xh);
    }
    return table;
}

PeriodHits period_hits(const ObservedSeries& series, const LevelGrid& grid, int p) {
    series.validate();
    grid.validate();
    if (p < 1) throw std::invalid_argument("cqgram table: max lag must be >= 1");
    for (int k = 1; k <= p; ++k) check_lag_feasible(series, k);

    PeriodHits out;
    out.grid = grid;
    out.p = p;
    const auto T = series.length();
    Vector work;
    QuantileRegression ysolver(series.y, series.zy);
    for (double tau1 : grid.taus1) {
        ysolver.fitted_values(tau1, work);
        auto& h = out.y.emplace_back(static_cast<std::size_t>(T));
        for (Eigen::Index t = 0; t < T; ++t) h[static_cast<std::size_t>(t)] = series.y[t] - work[t] < 0.0;
    }
    for (int k = 1; k <= p; ++k) {
        const auto m = T - k;
        QuantileRegression xsolver = x_solver(series, k);
        auto& per_lag = out.x.emplace_back();
        for (double tau2 : grid.taus2) {
            xsolver.fitted_values(tau2, work);
            auto& h = per_lag.emplace_back(static_cast<std::size_t>(m));
            for (Eigen::Index t = 0; t < m; ++t) h[static_cast<std::size_t>(t)] = series.x[t] - work[t] < 0.0;
        }
    }
    return out;
}

CQGramTable cqgram_table_resampled(const PeriodHits& hits, const std::vector<Eigen::Index>& rows) {
    CQGramTable table = empty_table(hits.grid, hits.p);
    check_rows(rows, static_cast<Eigen::Index>(hits.y.empty() ? 0 : hits.y.front().size()));
    std::vector<HitBits> yh(hits.y.size());
    std::vector<HitBits> xh(hits.grid.taus2.size());
    std::vector<std::size_t> keep;
    std::vector<Eigen::Index> partner;
    for (int k = 1; k <= hits.p; ++k) {
        lag_pairs(rows, k, keep, partner);
        const std::size_t n = keep.size();
        if (n == 0) continue;
        for (std::size_t i = 0; i < yh.size(); ++i) {
            yh[i] = HitBits(n);
            for (std::size_t m = 0; m < n; ++m) {
                if (hits.y[i][static_cast<std::size_t>(rows[keep[m]])]) yh[i].set(m);
            }
        }
        const auto& xk = hits.x[static_cast<std::size_t>(k - 1)];
        for (std::size_t j = 0; j < xh.size(); ++j) {
            xh[j] = HitBits(n);
            for (std::size_t m = 0; m < n; ++m) {
                if (xk[j][static_cast<std::size_t>(partner[m])]) xh[j].set(m);
            }
        }
        fill_lag(table, static_cast<std::size_t>(k - 1), n, yh, xh);
    }
    return table;
}

CQGramTable cqgram_table(const ObservedSeries& series, const LevelGrid& grid, int p) {
    if (p < 1) throw std::invalid_argument("cqgram table: max lag must be >= 1");
    std::vector<int> lags(static_cast<std::size_t>(p));
    for (int k = 1; k <= p; ++k) lags[static_cast<std::size_t>(k - 1)] = k;
    return cqgram_table_at(series, grid, lags);
}

}  // namespace qdep

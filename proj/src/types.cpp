#include "qdep/types.hpp"

#include <cmath>
#include <utility>

namespace qdep {

ObservedSeries::ObservedSeries(Vector y_, DesignMatrix zy_, Vector x_, DesignMatrix zx_)
    : y(std::move(y_)), zy(std::move(zy_)), x(std::move(x_)), zx(std::move(zx_)) {}

ObservedSeries ObservedSeries::plain(Vector y_, Vector x_) {
    const auto n = y_.size();
    const auto m = x_.size();
    return ObservedSeries(std::move(y_), DesignMatrix(n, 0), std::move(x_), DesignMatrix(m, 0));
}

void ObservedSeries::validate() const {
    const auto n = y.size();
    if (x.size() != n || zy.rows() != n || zx.rows() != n) {
        throw DimensionMismatch("observed series: components disagree on length (y " +
                                std::to_string(n) + ", x " + std::to_string(x.size()) + ", zy " +
                                std::to_string(zy.rows()) + ", zx " + std::to_string(zx.rows()) + ")");
    }
    if (!y.allFinite() || !x.allFinite() || !zy.allFinite() || !zx.allFinite()) {
        throw std::invalid_argument("observed series: non-finite value");
    }
}

ObservedSeries ObservedSeries::select_rows(const std::vector<Eigen::Index>& rows) const {
    ObservedSeries out;
    const auto n = static_cast<Eigen::Index>(rows.size());
    out.y.resize(n);
    out.x.resize(n);
    out.zy.resize(n, zy.cols());
    out.zx.resize(n, zx.cols());
    for (Eigen::Index t = 0; t < n; ++t) {
        const auto src = rows[static_cast<std::size_t>(t)];
        out.y[t] = y[src];
        out.x[t] = x[src];
        out.zy.row(t) = zy.row(src);
        out.zx.row(t) = zx.row(src);
    }
    return out;
}

LevelGrid::LevelGrid(std::vector<double> t1, std::vector<double> t2)
    : taus1(std::move(t1)), taus2(std::move(t2)) {
    validate();
}

LevelGrid LevelGrid::square(std::vector<double> taus) {
    auto copy = taus;
    return LevelGrid(std::move(taus), std::move(copy));
}

std::vector<double> LevelGrid::arithmetic(double start, double stop, double step) {
    if (!(step > 0.0) || stop < start) {
        throw std::invalid_argument("level grid: need step > 0 and stop >= start");
    }
    std::vector<double> out;
    const auto count = static_cast<long>(std::floor((stop - start) / step + 1e-9)) + 1;
    for (long i = 0; i < count; ++i) {
        // Round to 12 decimals so 0.05 + 2 * 0.05 is stored as 0.15.
        out.push_back(std::round((start + static_cast<double>(i) * step) * 1e12) / 1e12);
    }
    return out;
}

LevelGrid LevelGrid::standard() { return square(arithmetic(0.05, 0.95, 0.05)); }

void LevelGrid::validate() const {
    for (const auto* taus : {&taus1, &taus2}) {
        if (taus->empty()) throw std::invalid_argument("level grid: empty axis");
        for (std::size_t i = 0; i < taus->size(); ++i) {
            require_level((*taus)[i], "grid level");
            if (i > 0 && !((*taus)[i] > (*taus)[i - 1])) {
                throw std::invalid_argument("level grid: levels must be strictly increasing");
            }
        }
    }
}

}  // namespace qdep

#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace qdep {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// T x d matrix of controlling variables. The intercept is never stored here;
/// every fit prepends it implicitly. d == 0 means "no controlling variable".
using DesignMatrix = Eigen::MatrixXd;

/// Raised when array shapes disagree (response length vs design rows, grids).
class DimensionMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when the design (with intercept) is rank deficient.
class DegenerateDesign : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised for a zero denominator in the cross-quantilogram ratio.
class DegenerateDenominator : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void require_level(double tau, const char* what = "tau");

/// One observation period: target Y with its controls Z^Y, source X with Z^X.
struct ObservedSeries {
    Vector y;
    DesignMatrix zy;
    Vector x;
    DesignMatrix zx;

    ObservedSeries() = default;
    ObservedSeries(Vector y_, DesignMatrix zy_, Vector x_, DesignMatrix zx_);

    /// Series without controlling variables.
    static ObservedSeries plain(Vector y_, Vector x_);

    [[nodiscard]] Eigen::Index length() const { return y.size(); }

    /// Throws DimensionMismatch / std::invalid_argument when the invariants fail.
    void validate() const;

    [[nodiscard]] ObservedSeries select_rows(const std::vector<Eigen::Index>& rows) const;
};

/// Quantile-level grid; the product taus1 x taus2 is the sup domain of the tests.
struct LevelGrid {
    std::vector<double> taus1;
    std::vector<double> taus2;

    LevelGrid() = default;
    LevelGrid(std::vector<double> t1, std::vector<double> t2);

    /// Same levels on both axes.
    static LevelGrid square(std::vector<double> taus);

    /// {start, start + step, ..., stop}, inclusive of stop up to rounding.
    static std::vector<double> arithmetic(double start, double stop, double step);

    /// {0.05, 0.10, ..., 0.95}
    static LevelGrid standard();

    void validate() const;

    [[nodiscard]] bool operator==(const LevelGrid&) const = default;
};

}  // namespace qdep

#include "qdep/quantreg.hpp"

#include "qdep/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>

namespace qdep {

void require_level(double tau, const char* what) {
    if (!(tau > 0.0 && tau < 1.0)) {
        throw std::invalid_argument(std::string(what) + " must lie in (0,1), got " +
                                    std::to_string(tau));
    }
}

double check_loss(double tau, double u) {
    require_level(tau);
    if (!std::isfinite(u)) throw std::invalid_argument("check_loss: non-finite argument");
    return u < 0.0 ? u * (tau - 1.0) : u * tau;
}

namespace {

std::size_t order_statistic_rank(std::size_t n, double tau) {
    // ceil(tau * n) with a small guard so that 0.15 * 20 lands on 3, not 4.
    const double scaled = tau * static_cast<double>(n);
    auto k = static_cast<std::size_t>(std::ceil(scaled - 1e-9));
    return std::clamp<std::size_t>(k, 1, n);
}

inline double rho(double tau, double u) { return u < 0.0 ? u * (tau - 1.0) : u * tau; }

}  // namespace

double sorted_quantile(std::span<const double> sorted, double tau) {
    require_level(tau);
    if (sorted.empty()) throw std::invalid_argument("sample_quantile: empty sequence");
    return sorted[order_statistic_rank(sorted.size(), tau) - 1];
}

double sample_quantile(std::span<const double> values, double tau) {
    require_level(tau);
    if (values.empty()) throw std::invalid_argument("sample_quantile: empty sequence");
    std::vector<double> work(values.begin(), values.end());
    const auto k = order_statistic_rank(work.size(), tau) - 1;
    std::nth_element(work.begin(), work.begin() + static_cast<std::ptrdiff_t>(k), work.end());
    return work[k];
}

double sample_quantile(const Vector& values, double tau) {
    return sample_quantile(std::span<const double>(values.data(), static_cast<std::size_t>(values.size())),
                           tau);
}

QuantileRegression::QuantileRegression(const Vector& response, const DesignMatrix& design) {
    const Eigen::Index n = response.size();
    const Eigen::Index d = design.cols();
    if (design.rows() != n) {
        throw DimensionMismatch("quantile regression: design has " + std::to_string(design.rows()) +
                                " rows but response has " + std::to_string(n));
    }
    if (n < d + 2) {
        throw std::invalid_argument("quantile regression: need at least d + 2 = " +
                                    std::to_string(d + 2) + " observations, got " + std::to_string(n));
    }
    if (!response.allFinite() || !design.allFinite()) {
        throw std::invalid_argument("quantile regression: non-finite input");
    }
    n_rows_ = n;
    n_params_ = d + 1;
    full_y_ = response;
    full_x_.resize(n, n_params_);
    full_x_.col(0).setOnes();
    if (d > 0) full_x_.rightCols(d) = design;

    if (d == 0) {
        sorted_.assign(response.data(), response.data() + n);
        std::sort(sorted_.begin(), sorted_.end());
        return;
    }

    Eigen::ColPivHouseholderQR<Matrix> rank_qr(full_x_);
    rank_qr.setThreshold(1e-10);
    if (rank_qr.rank() < n_params_) {
        throw DegenerateDesign("quantile regression: design with intercept has rank " +
                               std::to_string(rank_qr.rank()) + " < " + std::to_string(n_params_));
    }

    // Merge identical rows into weighted observations.
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    auto row_less = [&](Eigen::Index a, Eigen::Index b) {
        if (full_y_[a] != full_y_[b]) return full_y_[a] < full_y_[b];
        for (Eigen::Index c = 1; c < n_params_; ++c) {
            if (full_x_(a, c) != full_x_(b, c)) return full_x_(a, c) < full_x_(b, c);
        }
        return a < b;
    };
    auto row_equal = [&](Eigen::Index a, Eigen::Index b) {
        return full_y_[a] == full_y_[b] && full_x_.row(a) == full_x_.row(b);
    };
    std::sort(order.begin(), order.end(), row_less);

    std::vector<Eigen::Index> uniq;
    std::vector<double> weight;
    for (auto idx : order) {
        if (!uniq.empty() && row_equal(uniq.back(), idx)) {
            weight.back() += 1.0;
        } else {
            uniq.push_back(idx);
            weight.push_back(1.0);
        }
    }
    const auto m = static_cast<Eigen::Index>(uniq.size());
    xt_.resize(n_params_, m);
    y_.resize(m);
    w_.resize(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        xt_.col(i) = full_x_.row(uniq[static_cast<std::size_t>(i)]).transpose();
        y_[i] = full_y_[uniq[static_cast<std::size_t>(i)]];
        w_[i] = weight[static_cast<std::size_t>(i)];
    }

    // Tied responses put many rows on one hyperplane, and at such degenerate
    // vertices the basis edges can all look uphill while a descent direction
    // exists. The descent therefore runs on responses nudged by distinct
    // amounts far below the data resolution; the final basis is then polished
    // on the original responses.
    const double spread = 1.0 + y_.cwiseAbs().maxCoeff();
    y_nudged_.resize(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const auto bits = mix64(static_cast<std::uint64_t>(i)) >> 11;
        y_nudged_[i] = y_[i] + spread * 1e-9 * (static_cast<double>(bits) * 0x1.0p-53 + 0.5);
    }

    // Starting vertex: the best-conditioned p unique rows.
    Eigen::ColPivHouseholderQR<Matrix> basis_qr(xt_);
    const auto& perm = basis_qr.colsPermutation().indices();
    basis_.assign(perm.data(), perm.data() + n_params_);
}

namespace {

struct Breakpoint {
    double t;
    Eigen::Index row;
    double weight;
};

inline bool before(const Breakpoint& a, const Breakpoint& b) {
    return a.t < b.t || (a.t == b.t && a.row < b.row);
}

/// Row at which the cumulative weight of the ordered breakpoints first reaches
/// `target`, or -1 if the total falls short. Expected linear time.
Eigen::Index weighted_crossing(std::vector<Breakpoint>& pts, double target) {
    std::size_t lo = 0;
    std::size_t hi = pts.size();
    while (lo < hi) {
        const std::size_t mid = lo + (hi - lo) / 2;
        std::nth_element(pts.begin() + static_cast<std::ptrdiff_t>(lo),
                         pts.begin() + static_cast<std::ptrdiff_t>(mid),
                         pts.begin() + static_cast<std::ptrdiff_t>(hi), before);
        double left = 0.0;
        for (std::size_t i = lo; i < mid; ++i) left += pts[i].weight;
        if (left >= target) {
            hi = mid;
        } else if (left + pts[mid].weight >= target) {
            return pts[mid].row;
        } else {
            target -= left + pts[mid].weight;
            lo = mid + 1;
        }
    }
    return -1;
}

/// Vertex descent on the weighted check loss. P is the parameter count when
/// known at compile time (Eigen::Dynamic otherwise); `basis` holds the starting
/// vertex on entry and the optimal one on exit.
template <int P>
Vector vertex_descent(const Matrix& xt_all, const Vector& y, const Vector& w, double tau,
                      std::vector<Eigen::Index>& basis, int& iterations) {
    using Square = Eigen::Matrix<double, P, P>;
    using Column = Eigen::Matrix<double, P, 1>;
    const Eigen::Index m = xt_all.cols();
    const Eigen::Index p = xt_all.rows();
    const double* xt = xt_all.data();

    std::vector<char> in_basis(static_cast<std::size_t>(m), 0);
    std::vector<double> r(static_cast<std::size_t>(m));
    Square xh(p, p);
    Column yh(p);
    Square binv(p, p);
    Column beta(p);
    Column v(p);
    Column s(p);
    Column dir(p);
    std::vector<Eigen::Index> zero_rows;
    std::vector<Breakpoint> breaks;
    breaks.reserve(static_cast<std::size_t>(m));

    auto load_basis = [&] {
        for (Eigen::Index j = 0; j < p; ++j) {
            xh.row(j) = xt_all.col(basis[static_cast<std::size_t>(j)]).transpose();
            yh[j] = y[basis[static_cast<std::size_t>(j)]];
        }
    };
    auto dot_row = [&](Eigen::Index i, const double* u) {
        const double* xi = xt + i * p;
        double acc = 0.0;
        if constexpr (P != Eigen::Dynamic) {
            for (int c = 0; c < P; ++c) acc += xi[c] * u[c];
        } else {
            for (Eigen::Index c = 0; c < p; ++c) acc += xi[c] * u[c];
        }
        return acc;
    };

    const Eigen::Index max_iter = 100 + 50 * m;
    iterations = 0;
    for (;; ++iterations) {
        if (iterations > max_iter) {
            throw std::runtime_error("quantile regression: iteration limit exceeded");
        }
        load_basis();
        Eigen::FullPivLU<Square> lu(xh);
        if (!lu.isInvertible()) {
            throw DegenerateDesign("quantile regression: singular basis encountered");
        }
        beta = lu.solve(yh);
        binv = lu.inverse();

        for (auto b : basis) in_basis[static_cast<std::size_t>(b)] = 1;

        v.setZero();
        std::array<double, P == Eigen::Dynamic ? 1 : P> vacc{};
        zero_rows.clear();
        for (Eigen::Index i = 0; i < m; ++i) {
            const auto iu = static_cast<std::size_t>(i);
            if (in_basis[iu]) {
                r[iu] = 0.0;
                continue;
            }
            const double ri = y[i] - dot_row(i, beta.data());
            if (std::abs(ri) <= 1e-12 * (1.0 + std::abs(y[i]))) {
                r[iu] = 0.0;
                zero_rows.push_back(i);
                continue;
            }
            r[iu] = ri;
            const double scale = w[i] * (tau - (ri < 0.0 ? 1.0 : 0.0));
            const double* xi = xt + i * p;
            if constexpr (P != Eigen::Dynamic) {
                for (int c = 0; c < P; ++c) vacc[c] += scale * xi[c];
            } else {
                for (Eigen::Index c = 0; c < p; ++c) v[c] += scale * xi[c];
            }
        }
        if constexpr (P != Eigen::Dynamic) {
            for (int c = 0; c < P; ++c) v[c] = vacc[c];
        }
        s.noalias() = binv.transpose() * v;

        // Most negative edge derivative over the 2p edges leaving this vertex.
        double best = 0.0;
        Eigen::Index best_j = -1;
        double best_sign = 0.0;
        for (Eigen::Index j = 0; j < p; ++j) {
            const double wh = w[basis[static_cast<std::size_t>(j)]];
            for (double sign : {1.0, -1.0}) {
                double g = -sign * s[j] + wh * (sign > 0 ? 1.0 - tau : tau);
                for (auto i : zero_rows) {
                    const double ci = sign * dot_row(i, binv.col(j).data());
                    g += w[i] * rho(tau, -ci);
                }
                const double scale = 1.0 + std::abs(s[j]) + wh;
                if (g < -1e-11 * scale && g < best) {
                    best = g;
                    best_j = j;
                    best_sign = sign;
                }
            }
        }
        for (auto b : basis) in_basis[static_cast<std::size_t>(b)] = 0;
        if (best_j < 0) break;

        // Exact line search: the loss along the edge is convex piecewise
        // linear with a kink where each residual crosses zero.
        dir = best_sign * binv.col(best_j);
        breaks.clear();
        for (Eigen::Index i = 0; i < m; ++i) {
            const double ri = r[static_cast<std::size_t>(i)];
            if (ri == 0.0) continue;
            const double ci = dot_row(i, dir.data());
            const double t = ri / ci;
            if (t > 0.0 && std::isfinite(t)) breaks.push_back({t, i, w[i] * std::abs(ci)});
        }
        const Eigen::Index entering = weighted_crossing(breaks, -best);
        if (entering < 0) {
            throw std::runtime_error("quantile regression: unbounded descent direction");
        }
        basis[static_cast<std::size_t>(best_j)] = entering;
    }

    // Canonical row order so the coefficients depend only on the optimal
    // vertex, not on the pivot history that reached it.
    std::sort(basis.begin(), basis.end());
    load_basis();
    return Vector(Eigen::FullPivLU<Square>(xh).solve(yh));
}

}  // namespace

template <int P>
Vector QuantileRegression::descend(double tau, int& iterations) {
    int polish = 0;
    (void)vertex_descent<P>(xt_, y_nudged_, w_, tau, basis_, iterations);
    Vector beta = vertex_descent<P>(xt_, y_, w_, tau, basis_, polish);
    iterations += polish;
    return beta;
}

Vector QuantileRegression::solve_coefficients(double tau, int& iterations) {
    switch (n_params_) {
        case 2: return descend<2>(tau, iterations);
        case 3: return descend<3>(tau, iterations);
        case 4: return descend<4>(tau, iterations);
        default: return descend<Eigen::Dynamic>(tau, iterations);
    }
}

QuantileFit QuantileRegression::fit(double tau) {
    require_level(tau);
    QuantileFit out;
    out.tau = tau;
    if (n_params_ == 1) {
        const double q = sorted_quantile(sorted_, tau);
        out.coefficients = Vector::Constant(1, q);
        out.fitted = Vector::Constant(n_rows_, q);
    } else {
        out.coefficients = solve_coefficients(tau, out.iterations);
        out.fitted = full_x_ * out.coefficients;
    }
    double loss = 0.0;
    for (Eigen::Index t = 0; t < n_rows_; ++t) loss += rho(tau, full_y_[t] - out.fitted[t]);
    out.objective = loss;
    return out;
}

void QuantileRegression::fitted_values(double tau, Vector& out) {
    require_level(tau);
    if (n_params_ == 1) {
        out.setConstant(n_rows_, sorted_quantile(sorted_, tau));
        return;
    }
    int iterations = 0;
    const Vector beta = solve_coefficients(tau, iterations);
    out.noalias() = full_x_ * beta;
}

QuantileFit fit_quantile_regression(const Vector& response, const DesignMatrix& design, double tau) {
    require_level(tau);
    QuantileRegression solver(response, design);
    return solver.fit(tau);
}

}  // namespace qdep

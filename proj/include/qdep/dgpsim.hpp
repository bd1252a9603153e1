#pragma once

#include "qdep/changetest.hpp"
#include "qdep/rng.hpp"
#include "qdep/types.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace qdep {

enum class Model { P1, P2 };

/// Which lagged values serve as controlling variables.
enum class ControlScheme {
    None,  // Z^Y = Z^X = none
    Exp2,  // Z^Y = (Y_{t-1}, X_{t-1}), Z^X = X_{t-1}
    Exp3,  // Z^Y = Y_{t-1},            Z^X = X_{t-1}
};

/// Bivariate autoregressive data-generating process.
///
/// P1:  Y_t = 0.15 + alpha0 Y_{t-1} + alpha1 X_{t-1} + e1_t
///      X_t = 0.05 + alpha0 X_{t-1} + e2_t
/// P2:  Y_t = beta0 + beta1 Y_{t-1} + U_t
///      X_t = gamma0 + gamma1 X_{t-1} + V_t,  with (U, V) following P1.
struct DGPSpec {
    Model model = Model::P1;
    double alpha0 = 0.0;
    double alpha1 = 0.0;
    double beta0 = 0.0;
    double beta1 = 0.0;
    double gamma0 = 0.0;
    double gamma1 = 0.0;
    std::size_t burn_in = 5000;
    std::size_t length = 500;
    ControlScheme controls = ControlScheme::None;

    static DGPSpec p1(double alpha0, double alpha1, std::size_t length = 500,
                      ControlScheme controls = ControlScheme::None);
    /// Arguments in the order (beta0, beta1, gamma0, gamma1, alpha0, alpha1).
    static DGPSpec p2(double beta0, double beta1, double gamma0, double gamma1, double alpha0,
                      double alpha1, std::size_t length = 500,
                      ControlScheme controls = ControlScheme::Exp3);

    /// (alpha0, alpha1) for P1, (beta0, beta1, gamma0, gamma1, alpha0, alpha1) for P2.
    [[nodiscard]] std::vector<double> parameters() const;

    /// Throws std::invalid_argument on non-stationary coefficients.
    void validate() const;
};

struct SeriesPair {
    Vector y;
    Vector x;
};

[[nodiscard]] SeriesPair generate_p1(const DGPSpec& spec, Engine& rng);
[[nodiscard]] SeriesPair generate_p2(const DGPSpec& spec, Engine& rng);
[[nodiscard]] SeriesPair generate(const DGPSpec& spec, Engine& rng);

/// Builds the observed series for a control scheme. Lagged schemes drop the
/// first row, so the result has length T - 1.
[[nodiscard]] ObservedSeries attach_controls(const Vector& y, const Vector& x, ControlScheme scheme);

/// Generates one period of `spec.length` usable rows (one extra draw is made
/// for lagged control schemes) and attaches its controls.
[[nodiscard]] ObservedSeries simulate_period(const DGPSpec& spec, Engine& rng);

struct PowerOptions {
    std::size_t trials = 1000;
    LevelGrid grid = LevelGrid::standard();
    int p = 5;
    BootstrapConfig bootstrap;  // bootstrap.seed is replaced per trial
    double nominal_level = 0.05;
    std::uint64_t seed = 1;
    unsigned jobs = 0;
    /// Called after each finished trial with (done, total); may run on any worker.
    std::function<void(std::size_t, std::size_t)> progress;
};

struct PowerEstimate {
    std::size_t trials = 0;
    std::size_t rejections = 0;
    double power = 0.0;
    double nominal_level = 0.05;
    std::optional<double> approx_difference;
    std::vector<double> p_values;  // per trial, in trial order
};

/// Rejection frequency of the change test over independent trials. Trial t
/// draws its periods and bootstrap seed from substreams keyed by t.
[[nodiscard]] PowerEstimate estimate_power(const DGPSpec& spec_b, const DGPSpec& spec_a,
                                           const PowerOptions& opts);

enum class DifferenceAveraging {
    TablesThenSup,   // average the cross-quantilogram tables, then take the sup-sum
    SupThenAverage,  // sup-sum per repetition, then average
};

struct DifferenceOptions {
    std::size_t big_T = 100000;
    std::size_t reps = 20;
    LevelGrid grid = LevelGrid::standard();
    int p = 5;
    bool use_controls = true;
    DifferenceAveraging averaging = DifferenceAveraging::TablesThenSup;
    std::uint64_t seed = 1;
    unsigned jobs = 0;
};

/// Monte Carlo approximation of the population sup-sum difference between the
/// two processes' cross-quantilograms.
[[nodiscard]] double approx_difference(const DGPSpec& spec_b, const DGPSpec& spec_a,
                                       const DifferenceOptions& opts);

[[nodiscard]] Model parse_model(const std::string& name);
[[nodiscard]] ControlScheme parse_control_scheme(const std::string& name);
[[nodiscard]] const char* to_string(Model model);
[[nodiscard]] const char* to_string(ControlScheme scheme);

}  // namespace qdep

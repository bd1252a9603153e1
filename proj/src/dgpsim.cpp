#include "qdep/dgpsim.hpp"

#include "qdep/cqgram.hpp"
#include "qdep/parallel.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>

namespace qdep {

DGPSpec DGPSpec::p1(double alpha0, double alpha1, std::size_t length, ControlScheme controls) {
    DGPSpec s;
    s.model = Model::P1;
    s.alpha0 = alpha0;
    s.alpha1 = alpha1;
    s.length = length;
    s.controls = controls;
    return s;
}

DGPSpec DGPSpec::p2(double beta0, double beta1, double gamma0, double gamma1, double alpha0,
                    double alpha1, std::size_t length, ControlScheme controls) {
    DGPSpec s;
    s.model = Model::P2;
    s.beta0 = beta0;
    s.beta1 = beta1;
    s.gamma0 = gamma0;
    s.gamma1 = gamma1;
    s.alpha0 = alpha0;
    s.alpha1 = alpha1;
    s.length = length;
    s.controls = controls;
    return s;
}

std::vector<double> DGPSpec::parameters() const {
    if (model == Model::P1) return {alpha0, alpha1};
    return {beta0, beta1, gamma0, gamma1, alpha0, alpha1};
}

void DGPSpec::validate() const {
    if (!(std::abs(alpha0) < 1.0)) throw std::invalid_argument("DGP: |alpha0| must be < 1");
    if (model == Model::P2 && !(std::abs(beta1) < 1.0 && std::abs(gamma1) < 1.0)) {
        throw std::invalid_argument("DGP: |beta1| and |gamma1| must be < 1");
    }
    if (length < 1) throw std::invalid_argument("DGP: length must be positive");
}

namespace {

/// Runs the recursion for burn_in + length steps from zero and keeps the tail.
template <class Step>
SeriesPair run_recursion(const DGPSpec& spec, Step&& step) {
    SeriesPair out{Vector(static_cast<Eigen::Index>(spec.length)),
                   Vector(static_cast<Eigen::Index>(spec.length))};
    const std::size_t total = spec.burn_in + spec.length;
    for (std::size_t t = 0; t < total; ++t) {
        const auto [y, x] = step();
        if (t >= spec.burn_in) {
            const auto i = static_cast<Eigen::Index>(t - spec.burn_in);
            out.y[i] = y;
            out.x[i] = x;
        }
    }
    return out;
}

}  // namespace

SeriesPair generate_p1(const DGPSpec& spec, Engine& rng) {
    spec.validate();
    std::normal_distribution<double> noise(0.0, 1.0);
    double y = 0.0;
    double x = 0.0;
    return run_recursion(spec, [&] {
        const double e1 = noise(rng);
        const double e2 = noise(rng);
        const double y_next = 0.15 + spec.alpha0 * y + spec.alpha1 * x + e1;
        const double x_next = 0.05 + spec.alpha0 * x + e2;
        y = y_next;
        x = x_next;
        return std::pair{y, x};
    });
}

SeriesPair generate_p2(const DGPSpec& spec, Engine& rng) {
    spec.validate();
    std::normal_distribution<double> noise(0.0, 1.0);
    double u = 0.0;
    double v = 0.0;
    double y = 0.0;
    double x = 0.0;
    return run_recursion(spec, [&] {
        const double e1 = noise(rng);
        const double e2 = noise(rng);
        const double u_next = 0.15 + spec.alpha0 * u + spec.alpha1 * v + e1;
        const double v_next = 0.05 + spec.alpha0 * v + e2;
        u = u_next;
        v = v_next;
        y = spec.beta0 + spec.beta1 * y + u;
        x = spec.gamma0 + spec.gamma1 * x + v;
        return std::pair{y, x};
    });
}

SeriesPair generate(const DGPSpec& spec, Engine& rng) {
    return spec.model == Model::P1 ? generate_p1(spec, rng) : generate_p2(spec, rng);
}

ObservedSeries attach_controls(const Vector& y, const Vector& x, ControlScheme scheme) {
    if (y.size() != x.size()) throw DimensionMismatch("attach_controls: y and x differ in length");
    const Eigen::Index T = y.size();
    switch (scheme) {
        case ControlScheme::None:
            return ObservedSeries::plain(y, x);
        case ControlScheme::Exp2:
        case ControlScheme::Exp3: {
            if (T < 2) throw std::invalid_argument("attach_controls: need at least two observations");
            const Eigen::Index n = T - 1;
            DesignMatrix zy(n, scheme == ControlScheme::Exp2 ? 2 : 1);
            zy.col(0) = y.head(n);
            if (scheme == ControlScheme::Exp2) zy.col(1) = x.head(n);
            DesignMatrix zx = x.head(n);
            return ObservedSeries(y.tail(n), std::move(zy), x.tail(n), std::move(zx));
        }
    }
    throw std::invalid_argument("attach_controls: unknown control scheme");
}

ObservedSeries simulate_period(const DGPSpec& spec, Engine& rng) {
    DGPSpec draw = spec;
    if (spec.controls != ControlScheme::None) draw.length += 1;
    const auto pair = generate(draw, rng);
    return attach_controls(pair.y, pair.x, spec.controls);
}

PowerEstimate estimate_power(const DGPSpec& spec_b, const DGPSpec& spec_a, const PowerOptions& opts) {
    if (opts.trials < 1) throw std::invalid_argument("power: need at least one trial");
    spec_b.validate();
    spec_a.validate();
    PowerEstimate out;
    out.trials = opts.trials;
    out.nominal_level = opts.nominal_level;
    out.p_values.assign(opts.trials, 1.0);

    std::atomic<std::size_t> done{0};
    parallel_for(opts.trials, opts.jobs, [&](std::size_t trial) {
        Engine rng_b = make_engine(opts.seed, {stream::kTrial, trial, 0});
        Engine rng_a = make_engine(opts.seed, {stream::kTrial, trial, 1});
        const auto period_b = simulate_period(spec_b, rng_b);
        const auto period_a = simulate_period(spec_a, rng_a);
        BootstrapConfig cfg = opts.bootstrap;
        cfg.seed = substream_seed(opts.seed, {stream::kTrial, trial, 2});
        cfg.jobs = 1;
        out.p_values[trial] = run_change_test(period_b, period_a, opts.grid, opts.p, cfg).p_value;
        if (opts.progress) opts.progress(++done, opts.trials);
    });

    for (double pv : out.p_values) {
        if (pv < opts.nominal_level) ++out.rejections;
    }
    out.power = static_cast<double>(out.rejections) / static_cast<double>(out.trials);
    return out;
}

double approx_difference(const DGPSpec& spec_b, const DGPSpec& spec_a, const DifferenceOptions& opts) {
    if (opts.reps < 1) throw std::invalid_argument("difference: need at least one repetition");
    spec_b.validate();
    spec_a.validate();
    auto period = [&](const DGPSpec& spec, std::size_t rep, std::uint64_t side) {
        DGPSpec big = spec;
        big.length = opts.big_T;
        if (!opts.use_controls) big.controls = ControlScheme::None;
        Engine rng = make_engine(opts.seed, {stream::kDifference, rep, side});
        return simulate_period(big, rng);
    };

    std::vector<CQGramTable> tables_b(opts.reps);
    std::vector<CQGramTable> tables_a(opts.reps);
    parallel_for(opts.reps, opts.jobs, [&](std::size_t rep) {
        tables_b[rep] = cqgram_table(period(spec_b, rep, 0), opts.grid, opts.p);
        tables_a[rep] = cqgram_table(period(spec_a, rep, 1), opts.grid, opts.p);
    });

    if (opts.averaging == DifferenceAveraging::SupThenAverage) {
        double total = 0.0;
        for (std::size_t r = 0; r < opts.reps; ++r) total += d_statistic(tables_b[r], tables_a[r]);
        return total / static_cast<double>(opts.reps);
    }
    auto average = [&](const std::vector<CQGramTable>& tables) {
        CQGramTable mean = tables.front();
        for (std::size_t c = 0; c < mean.rho.size(); ++c) {
            double sum = 0.0;
            for (const auto& t : tables) sum += std::isnan(t.rho[c]) ? 0.0 : t.rho[c];
            mean.rho[c] = sum / static_cast<double>(tables.size());
        }
        return mean;
    };
    return d_statistic(average(tables_b), average(tables_a));
}

Model parse_model(const std::string& name) {
    if (name == "P1" || name == "p1") return Model::P1;
    if (name == "P2" || name == "p2") return Model::P2;
    throw std::invalid_argument("unknown model '" + name + "' (expected P1 or P2)");
}

ControlScheme parse_control_scheme(const std::string& name) {
    if (name == "none" || name == "NONE") return ControlScheme::None;
    if (name == "exp2" || name == "EXP2") return ControlScheme::Exp2;
    if (name == "exp3" || name == "EXP3") return ControlScheme::Exp3;
    throw std::invalid_argument("unknown control scheme '" + name + "' (expected none, exp2, exp3)");
}

const char* to_string(Model model) { return model == Model::P1 ? "P1" : "P2"; }

const char* to_string(ControlScheme scheme) {
    switch (scheme) {
        case ControlScheme::None: return "none";
        case ControlScheme::Exp2: return "exp2";
        case ControlScheme::Exp3: return "exp3";
    }
    return "?";
}

}  // namespace qdep

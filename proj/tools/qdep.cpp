// qdep: change test, cross-quantilogram tables, heatmaps and simulation studies.

#include "qdep/changetest.hpp"
#include "qdep/cqgram.hpp"
#include "qdep/dgpsim.hpp"
#include "qdep/heatmap.hpp"
#include "qdep/ingest.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>

using namespace qdep;
namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------- inputs

struct SeriesRef {
    std::string path;
    std::string column;  // empty: first non-date column
};

SeriesRef parse_series_ref(const std::string& text) {
    // Windows drive letters are not a concern here; the last colon splits.
    const auto colon = text.rfind(':');
    if (colon == std::string::npos) return {text, ""};
    return {text.substr(0, colon), text.substr(colon + 1)};
}

std::string first_value_column(const std::string& path, const std::string& date_col) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open '" + path + "'");
    std::string header;
    std::getline(in, header);
    if (!header.empty() && header.back() == '\r') header.pop_back();
    std::stringstream ss(header);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        if (cell != date_col) return cell;
    }
    throw std::invalid_argument(path + ": no value column besides '" + date_col + "'");
}

DatedSeries load_series(const std::string& spec, const std::string& date_col, bool diff) {
    auto ref = parse_series_ref(spec);
    if (ref.column.empty()) ref.column = first_value_column(ref.path, date_col);
    auto load = load_csv(ref.path, date_col, ref.column);
    if (load.dropped_rows > 0) {
        std::cerr << ref.path << ": dropped " << load.dropped_rows << " rows with missing "
                  << ref.column << "\n";
    }
    return diff ? difference(load.series) : load.series;
}

struct ControlArg {
    std::string source;  // "target", "source" or path[:column]
    int lag = 1;
};

ControlArg parse_control(const std::string& text) {
    ControlArg c;
    const auto at = text.rfind('@');
    c.source = text.substr(0, at);
    if (at != std::string::npos) c.lag = std::stoi(text.substr(at + 1));
    if (c.lag < 0) throw std::invalid_argument("control lag must be >= 0: " + text);
    return c;
}

std::vector<double> parse_taus(const std::string& text) {
    if (text.find(':') != std::string::npos) {
        double a = 0;
        double b = 0;
        double s = 0;
        char tail = 0;
        if (std::sscanf(text.c_str(), "%lf:%lf:%lf%c", &a, &b, &s, &tail) != 3) {
            throw std::invalid_argument("bad level range '" + text + "' (expected start:stop:step)");
        }
        return LevelGrid::arithmetic(a, b, s);
    }
    std::vector<double> out;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(std::stod(cell));
    return out;
}

struct DataOptions {
    std::string target;
    std::string source;
    std::string breakpoint;
    std::string target_b, source_b, target_a, source_a;
    std::string date_col = "date";
    bool diff_target = false;
    bool diff_source = false;
    std::vector<std::string> control_y;
    std::vector<std::string> control_x;
    std::string taus = "0.05:0.95:0.05";

    void add_to(CLI::App* cmd) {
        cmd->add_option("--target", target, "Target series Y as path[:column]");
        cmd->add_option("--source", source, "Source series X as path[:column]");
        cmd->add_option("--breakpoint", breakpoint, "Split date YYYY-MM-DD (excluded from both periods)");
        cmd->add_option("--target-b", target_b, "Target series, period before");
        cmd->add_option("--source-b", source_b, "Source series, period before");
        cmd->add_option("--target-a", target_a, "Target series, period after");
        cmd->add_option("--source-a", source_a, "Source series, period after");
        cmd->add_option("--date-col", date_col, "Date column name")->capture_default_str();
        cmd->add_flag("--diff-target", diff_target, "First-difference the target series");
        cmd->add_flag("--diff-source", diff_source, "First-difference the source series");
        cmd->add_option("--control-y", control_y,
                        "Control for the Y model: target|source|path[:column], optional @lag (default 1)");
        cmd->add_option("--control-x", control_x, "Control for the X model, same syntax as --control-y");
        cmd->add_option("--taus", taus, "Levels as start:stop:step or a comma list")->capture_default_str();
    }

    [[nodiscard]] LevelGrid grid() const { return LevelGrid::square(parse_taus(taus)); }

    [[nodiscard]] bool split_mode() const { return !target.empty() || !source.empty(); }

    /// Externals and control specs; `externals` is filled in order of first use.
    std::vector<ControlSpec> controls(std::vector<DatedSeries>& externals) const {
        std::map<std::string, std::size_t> seen;
        std::vector<ControlSpec> out;
        auto add = [&](const std::string& text, ControlSpec::Role role) {
            const auto arg = parse_control(text);
            ControlSpec c;
            c.lag = arg.lag;
            c.role = role;
            if (arg.source == "target") {
                c.origin = ControlSpec::Origin::Target;
            } else if (arg.source == "source") {
                c.origin = ControlSpec::Origin::Source;
            } else {
                c.origin = ControlSpec::Origin::External;
                auto it = seen.find(arg.source);
                if (it == seen.end()) {
                    it = seen.emplace(arg.source, externals.size()).first;
                    externals.push_back(load_series(arg.source, date_col, false));
                }
                c.external_index = it->second;
            }
            out.push_back(c);
        };
        for (const auto& t : control_y) add(t, ControlSpec::Role::Y);
        for (const auto& t : control_x) add(t, ControlSpec::Role::X);
        return out;
    }

    [[nodiscard]] SplitPeriods periods() const {
        std::vector<DatedSeries> externals;
        const auto specs = controls(externals);
        if (split_mode()) {
            if (target.empty() || source.empty() || breakpoint.empty()) {
                throw std::invalid_argument("--target, --source and --breakpoint go together");
            }
            return align_and_split(load_series(target, date_col, diff_target),
                                   load_series(source, date_col, diff_source), externals, specs,
                                   parse_date(breakpoint));
        }
        if (target_b.empty() || source_b.empty() || target_a.empty() || source_a.empty()) {
            throw std::invalid_argument(
                "give either --target/--source/--breakpoint or all of --target-b/--source-b/--target-a/--source-a");
        }
        SplitPeriods out;
        out.before = align_whole(load_series(target_b, date_col, diff_target),
                                 load_series(source_b, date_col, diff_source), externals, specs);
        out.after = align_whole(load_series(target_a, date_col, diff_target),
                                load_series(source_a, date_col, diff_source), externals, specs);
        return out;
    }
};

void write_output(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << text;
}

BootstrapScheme parse_scheme(const std::string& s) {
    if (s == "stationary") return BootstrapScheme::Stationary;
    if (s == "moving-block") return BootstrapScheme::MovingBlock;
    throw std::invalid_argument("unknown bootstrap scheme '" + s + "'");
}

bool parse_refit(const std::string& s) {
    if (s == "refit") return true;
    if (s == "fixed") return false;
    throw std::invalid_argument("unknown quantile mode '" + s + "' (expected refit or fixed)");
}

void describe(const char* label, const Period& p) {
    std::cerr << label << ": " << p.series.length() << " observations";
    if (!p.dates.empty()) std::cerr << ", " << format_date(p.dates.front()) << " to " << format_date(p.dates.back());
    std::cerr << "\n";
}

class Progress {
public:
    explicit Progress(const char* what) : what_(what) {}
    void operator()(std::size_t done, std::size_t total) {
        std::lock_guard lock(mu_);
        const auto now = std::chrono::steady_clock::now();
        if (done == total || now - last_ > std::chrono::seconds(2)) {
            std::cerr << "\r" << what_ << " " << done << "/" << total << std::flush;
            if (done == total) std::cerr << "\n";
            last_ = now;
        }
    }

private:
    const char* what_;
    std::mutex mu_;
    std::chrono::steady_clock::time_point last_{};
};

// ---------------------------------------------------------------- commands

struct TestArgs {
    DataOptions data;
    int p = 5;
    std::size_t replicates = 800;
    std::optional<double> block_length;
    std::string scheme = "stationary";
    std::string quantiles = "refit";
    std::uint64_t seed = 1;
    unsigned jobs = 0;
    std::string output;
};

int cmd_test(const TestArgs& a) {
    const auto periods = a.data.periods();
    describe("period before", periods.before);
    describe("period after", periods.after);
    BootstrapConfig cfg;
    cfg.replicates = a.replicates;
    cfg.expected_block_length = a.block_length;
    cfg.seed = a.seed;
    cfg.scheme = parse_scheme(a.scheme);
    cfg.refit_quantiles = parse_refit(a.quantiles);
    cfg.jobs = a.jobs;
    const auto result = run_change_test(periods.before.series, periods.after.series, a.data.grid(), a.p, cfg);
    std::cerr << "d_hat " << result.d_hat << ", p-value " << result.p_value << "\n";
    write_output(a.output, to_json(result).dump(2) + "\n");
    return 0;
}

struct TableArgs {
    DataOptions data;
    int p = 5;
    std::string output;
};

void append_table(std::ostringstream& out, const char* period, const CQGramTable& t) {
    char buf[64];
    for (std::size_t i = 0; i < t.n1(); ++i) {
        for (std::size_t j = 0; j < t.n2(); ++j) {
            for (std::size_t l = 0; l < t.n_lags(); ++l) {
                std::snprintf(buf, sizeof buf, "%.17g", t.at(i, j, l));
                out << period << ',' << t.lags[l] << ',' << t.grid.taus1[i] << ',' << t.grid.taus2[j] << ','
                    << buf << '\n';
            }
        }
    }
}

int cmd_table(const TableArgs& a) {
    const auto periods = a.data.periods();
    const auto grid = a.data.grid();
    std::ostringstream out;
    out << "period,lag,tau1,tau2,rho\n";
    append_table(out, "before", cqgram_table(periods.before.series, grid, a.p));
    append_table(out, "after", cqgram_table(periods.after.series, grid, a.p));
    write_output(a.output, out.str());
    return 0;
}

struct HeatmapArgs {
    DataOptions data;
    std::vector<int> lags = kDefaultHeatmapLags;
    std::string out_dir = ".";
    bool svg = false;
};

int cmd_heatmap(const HeatmapArgs& a) {
    const auto periods = a.data.periods();
    const auto grid = a.data.grid();
    fs::create_directories(a.out_dir);
    for (const auto& [name, period] : {std::pair{"before", &periods.before}, std::pair{"after", &periods.after}}) {
        const auto mats = heatmap_matrices(period->series, grid, a.lags);
        for (std::size_t l = 0; l < a.lags.size(); ++l) {
            const auto stem = fs::path(a.out_dir) / (std::string(name) + "_lag" + std::to_string(a.lags[l]));
            write_heatmap_csv(stem.string() + ".csv", mats[l], grid);
            if (a.svg) {
                write_heatmap_svg(stem.string() + ".svg", mats[l], grid,
                                  std::string(name) + " period, lag " + std::to_string(a.lags[l]));
            }
            std::cerr << "wrote " << stem.string() << ".csv\n";
        }
    }
    return 0;
}

// Experiment config (JSON):
// {
//   "model": "P1", "controls": "none", "sample_sizes": [500], "trials": 1000,
//   "replicates": 800, "p": 5, "taus": "0.05:0.95:0.05", "burn_in": 5000,
//   "nominal_level": 0.05, "seed": 1, "block_length": null, "quantiles": "refit",
//   "difference": {"enabled": true, "big_T": 100000, "reps": 20},
//   "rows": [{"b": [0.5, -0.4], "a": [0.5, 0.0]}, ...]
// }
struct Experiment {
    Model model = Model::P1;
    ControlScheme controls = ControlScheme::None;
    std::vector<std::size_t> sample_sizes{500};
    std::size_t trials = 1000;
    std::size_t replicates = 800;
    int p = 5;
    LevelGrid grid = LevelGrid::standard();
    std::size_t burn_in = 5000;
    double nominal_level = 0.05;
    std::uint64_t seed = 1;
    std::optional<double> block_length;
    bool refit_quantiles = true;
    bool difference = true;
    std::size_t big_T = 100000;
    std::size_t difference_reps = 20;
    std::vector<std::pair<std::vector<double>, std::vector<double>>> rows;
};

Experiment load_experiment(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config '" + path + "'");
    const auto j = nlohmann::json::parse(in);
    Experiment e;
    e.model = parse_model(j.at("model").get<std::string>());
    e.controls = parse_control_scheme(j.value("controls", std::string("none")));
    e.sample_sizes = j.value("sample_sizes", e.sample_sizes);
    e.trials = j.value("trials", e.trials);
    e.replicates = j.value("replicates", e.replicates);
    e.p = j.value("p", e.p);
    if (j.contains("taus")) e.grid = LevelGrid::square(parse_taus(j["taus"].get<std::string>()));
    e.burn_in = j.value("burn_in", e.burn_in);
    e.nominal_level = j.value("nominal_level", e.nominal_level);
    e.seed = j.value("seed", e.seed);
    if (j.contains("block_length") && !j["block_length"].is_null()) e.block_length = j["block_length"].get<double>();
    e.refit_quantiles = parse_refit(j.value("quantiles", std::string("refit")));
    if (j.contains("difference")) {
        const auto& d = j["difference"];
        e.difference = d.value("enabled", e.difference);
        e.big_T = d.value("big_T", e.big_T);
        e.difference_reps = d.value("reps", e.difference_reps);
    }
    const std::size_t width = e.model == Model::P1 ? 2 : 6;
    for (const auto& row : j.at("rows")) {
        auto b = row.at("b").get<std::vector<double>>();
        auto a = row.at("a").get<std::vector<double>>();
        if (b.size() != width || a.size() != width) {
            throw std::invalid_argument(path + ": parameter vectors for " + to_string(e.model) + " need " +
                                        std::to_string(width) + " entries");
        }
        e.rows.emplace_back(std::move(b), std::move(a));
    }
    if (e.rows.empty()) throw std::invalid_argument(path + ": no rows");
    return e;
}

DGPSpec spec_from(const Experiment& e, const std::vector<double>& v, std::size_t T) {
    DGPSpec s = e.model == Model::P1 ? DGPSpec::p1(v[0], v[1], T, e.controls)
                                     : DGPSpec::p2(v[0], v[1], v[2], v[3], v[4], v[5], T, e.controls);
    s.burn_in = e.burn_in;
    s.validate();
    return s;
}

std::string join_params(const std::vector<double>& v) {
    std::ostringstream out;
    for (std::size_t i = 0; i < v.size(); ++i) out << (i ? ";" : "") << v[i];
    return out.str();
}

struct SimulateArgs {
    std::string config;
    std::optional<std::size_t> trials;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> replicates;
    bool no_difference = false;
    unsigned jobs = 0;
    std::string output;
};

int cmd_simulate(const SimulateArgs& a) {
    auto e = load_experiment(a.config);
    if (a.trials) e.trials = *a.trials;
    if (a.seed) e.seed = *a.seed;
    if (a.replicates) e.replicates = *a.replicates;
    if (a.no_difference) e.difference = false;

    std::ostringstream out;
    out << "model,controls,params_b,params_a,T,difference,power,trials,rejections\n";
    for (std::size_t r = 0; r < e.rows.size(); ++r) {
        const auto& [pb, pa] = e.rows[r];
        std::string diff_cell;
        if (e.difference) {
            DifferenceOptions d;
            d.big_T = e.big_T;
            d.reps = e.difference_reps;
            d.grid = e.grid;
            d.p = e.p;
            d.seed = substream_seed(e.seed, {r});
            d.jobs = a.jobs;
            std::cerr << "row " << r + 1 << ": difference\n";
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.4f",
                          approx_difference(spec_from(e, pb, e.big_T), spec_from(e, pa, e.big_T), d));
            diff_cell = buf;
        }
        for (std::size_t T : e.sample_sizes) {
            PowerOptions opts;
            opts.trials = e.trials;
            opts.grid = e.grid;
            opts.p = e.p;
            opts.bootstrap.replicates = e.replicates;
            opts.bootstrap.expected_block_length = e.block_length;
            opts.bootstrap.refit_quantiles = e.refit_quantiles;
            opts.nominal_level = e.nominal_level;
            opts.seed = substream_seed(e.seed, {r, T});
            opts.jobs = a.jobs;
            Progress progress("trials");
            opts.progress = [&](std::size_t done, std::size_t total) { progress(done, total); };
            std::cerr << "row " << r + 1 << ", T = " << T << "\n";
            const auto est = estimate_power(spec_from(e, pb, T), spec_from(e, pa, T), opts);
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.3f", est.power);
            out << to_string(e.model) << ',' << to_string(e.controls) << ',' << join_params(pb) << ','
                << join_params(pa) << ',' << T << ',' << diff_cell << ',' << buf << ',' << est.trials << ','
                << est.rejections << '\n';
        }
    }
    write_output(a.output, out.str());
    return 0;
}

struct GenerateArgs {
    std::vector<double> params_b{-0.5, 0.4};
    std::vector<double> params_a{0.5, 0.0};
    std::string model = "P1";
    std::size_t length_b = 300;
    std::size_t length_a = 300;
    std::string start = "2020-01-01";
    std::uint64_t seed = 1;
    std::string output;
};

int cmd_generate(const GenerateArgs& a) {
    Experiment e;
    e.model = parse_model(a.model);
    const auto spec_b = spec_from(e, a.params_b, a.length_b);
    const auto spec_a = spec_from(e, a.params_a, a.length_a);
    Engine rng_b = make_engine(a.seed, {0});
    Engine rng_a = make_engine(a.seed, {1});
    const auto b = generate(spec_b, rng_b);
    const auto after = generate(spec_a, rng_a);

    // One row per calendar day; the day between the periods carries the
    // last value of the first period and is the breakpoint.
    std::ostringstream out;
    out << "date,target,source\n";
    auto day = std::chrono::sys_days(parse_date(a.start));
    char buf[96];
    auto emit = [&](double y, double x) {
        std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g\n", format_date(Date(day)).c_str(), y, x);
        out << buf;
        day += std::chrono::days(1);
    };
    for (Eigen::Index t = 0; t < b.y.size(); ++t) emit(b.y[t], b.x[t]);
    std::cerr << "breakpoint " << format_date(Date(day)) << "\n";
    emit(b.y[b.y.size() - 1], b.x[b.x.size() - 1]);
    for (Eigen::Index t = 0; t < after.y.size(); ++t) emit(after.y[t], after.x[t]);
    write_output(a.output, out.str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cross-quantilogram change test across two periods"};
    app.require_subcommand(1);

    TestArgs test;
    auto* t = app.add_subcommand("test", "Bootstrap test of equal cross-quantilograms before and after a breakpoint");
    test.data.add_to(t);
    t->add_option("--p", test.p, "Maximum lag")->capture_default_str();
    t->add_option("--replicates,-L", test.replicates, "Bootstrap replicates")->capture_default_str();
    t->add_option("--block-length", test.block_length, "Expected block length (default max(2, ceil(T^(1/3))))");
    t->add_option("--scheme", test.scheme, "stationary or moving-block")->capture_default_str();
    t->add_option("--quantiles", test.quantiles,
                  "refit: refit quantile models per replicate; fixed: reuse the original hits")
        ->capture_default_str();
    t->add_option("--seed", test.seed, "Master seed")->capture_default_str();
    t->add_option("--jobs", test.jobs, "Worker threads (0 = all cores)");
    t->add_option("--output,-o", test.output, "JSON output file (default stdout)");

    TableArgs table;
    auto* tb = app.add_subcommand("table", "Cross-quantilogram table of both periods as long CSV");
    table.data.add_to(tb);
    tb->add_option("--p", table.p, "Maximum lag")->capture_default_str();
    tb->add_option("--output,-o", table.output, "CSV output file (default stdout)");

    HeatmapArgs heat;
    auto* h = app.add_subcommand("heatmap", "Write one heatmap matrix per period and lag");
    heat.data.add_to(h);
    h->add_option("--lags", heat.lags, "Lags")->delimiter(',')->capture_default_str();
    h->add_option("--out-dir", heat.out_dir, "Output directory")->capture_default_str();
    h->add_flag("--svg", heat.svg, "Also render SVG heatmaps");

    SimulateArgs sim;
    auto* s = app.add_subcommand("simulate", "Power table for an experiment config");
    s->add_option("config", sim.config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    s->add_option("--trials", sim.trials, "Override the number of trials");
    s->add_option("--seed", sim.seed, "Override the master seed");
    s->add_option("--replicates,-L", sim.replicates, "Override bootstrap replicates");
    s->add_flag("--no-difference", sim.no_difference, "Skip the difference column");
    s->add_option("--jobs", sim.jobs, "Worker threads (0 = all cores)");
    s->add_option("--output,-o", sim.output, "CSV output file (default stdout)");

    GenerateArgs gen;
    auto* g = app.add_subcommand("generate", "Write a synthetic dated two-period dataset");
    g->add_option("--model", gen.model, "P1 or P2")->capture_default_str();
    g->add_option("--params-b", gen.params_b, "Parameters before the breakpoint")->delimiter(',');
    g->add_option("--params-a", gen.params_a, "Parameters after the breakpoint")->delimiter(',');
    g->add_option("--length-b", gen.length_b, "Rows before the breakpoint")->capture_default_str();
    g->add_option("--length-a", gen.length_a, "Rows after the breakpoint")->capture_default_str();
    g->add_option("--start", gen.start, "First date")->capture_default_str();
    g->add_option("--seed", gen.seed, "Seed")->capture_default_str();
    g->add_option("--output,-o", gen.output, "CSV output file (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (t->parsed()) return cmd_test(test);
        if (tb->parsed()) return cmd_table(table);
        if (h->parsed()) return cmd_heatmap(heat);
        if (s->parsed()) return cmd_simulate(sim);
        if (g->parsed()) return cmd_generate(gen);
    } catch (const std::exception& e) {
        std::cerr << "qdep: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

#include "qdep/ingest.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace qdep {

namespace {

std::string trim(std::string s) {
    auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    return s;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (char c : line) {
        if (c == '"') {
            quoted = !quoted;
            field.push_back(c);
        } else if (c == ',' && !quoted) {
            out.push_back(trim(field));
            field.clear();
        } else if (c != '\r') {
            field.push_back(c);
        }
    }
    out.push_back(trim(field));
    return out;
}

bool is_missing(const std::string& s) {
    return s.empty() || s == "NA" || s == "N/A" || s == "NaN" || s == "nan" || s == "null" || s == ".";
}

std::size_t column_index(const std::vector<std::string>& header, const std::string& name,
                         const std::string& path) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw std::invalid_argument(path + ": missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
}

}  // namespace

Date parse_date(const std::string& text) {
    int y = 0;
    unsigned m = 0;
    unsigned d = 0;
    char tail = 0;
    if (text.size() != 10 || text[4] != '-' || text[7] != '-' ||
        std::sscanf(text.c_str(), "%4d-%2u-%2u%c", &y, &m, &d, &tail) != 3) {
        throw std::invalid_argument("unparseable date '" + text + "' (expected YYYY-MM-DD)");
    }
    const Date date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!date.ok()) throw std::invalid_argument("invalid calendar date '" + text + "'");
    return date;
}

std::string format_date(Date date) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(date.year()),
                  static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
    return buf;
}

void DatedSeries::validate() const {
    if (dates.size() != values.size()) throw DimensionMismatch(name + ": dates and values differ in length");
    for (std::size_t i = 1; i < dates.size(); ++i) {
        if (!(dates[i - 1] < dates[i])) {
            throw std::invalid_argument(name + ": dates not strictly increasing at " + format_date(dates[i]));
        }
    }
    for (double v : values) {
        if (!std::isfinite(v)) throw std::invalid_argument(name + ": non-finite value");
    }
}

CsvLoad load_csv(const std::string& path, const std::string& date_column, const std::string& value_column) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument(path + ": empty file");
    const auto header = split_csv_line(line);
    const auto date_idx = column_index(header, date_column, path);
    const auto value_idx = column_index(header, value_column, path);

    std::vector<std::pair<Date, double>> rows;
    CsvLoad out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_csv_line(line);
        const auto field = [&](std::size_t idx) { return idx < fields.size() ? fields[idx] : std::string(); };
        const Date date = parse_date(field(date_idx));
        const std::string raw = field(value_idx);
        if (is_missing(raw)) {
            ++out.dropped_rows;
            continue;
        }
        double value = 0.0;
        const auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), value);
        if (ec != std::errc() || ptr != raw.data() + raw.size() || !std::isfinite(value)) {
            throw std::invalid_argument(path + ":" + std::to_string(line_no) + ": unparseable value '" + raw + "'");
        }
        rows.emplace_back(date, value);
    }
    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].first == rows[i - 1].first) {
            throw std::invalid_argument(path + ": duplicate date " + format_date(rows[i].first));
        }
    }
    out.series.name = value_column;
    for (const auto& [d, v] : rows) {
        out.series.dates.push_back(d);
        out.series.values.push_back(v);
    }
    return out;
}

DatedSeries difference(const DatedSeries& series) {
    series.validate();
    if (series.size() < 2) throw std::invalid_argument(series.name + ": need at least two values to difference");
    DatedSeries out;
    out.name = series.name;
    for (std::size_t i = 1; i < series.size(); ++i) {
        out.dates.push_back(series.dates[i]);
        out.values.push_back(series.values[i] - series.values[i - 1]);
    }
    return out;
}

AlignedFrame align(const std::vector<const DatedSeries*>& series) {
    AlignedFrame frame;
    if (series.empty()) return frame;
    for (const auto* s : series) s->validate();
    std::vector<Date> common = series.front()->dates;
    for (std::size_t s = 1; s < series.size(); ++s) {
        std::vector<Date> next;
        std::set_intersection(common.begin(), common.end(), series[s]->dates.begin(), series[s]->dates.end(),
                              std::back_inserter(next));
        common = std::move(next);
    }
    frame.dates = common;
    for (const auto* s : series) {
        std::vector<double> col;
        col.reserve(common.size());
        std::size_t pos = 0;
        for (const auto& d : common) {
            while (s->dates[pos] < d) ++pos;
            col.push_back(s->values[pos]);
        }
        frame.columns.push_back(std::move(col));
    }
    return frame;
}

Period build_period(const AlignedFrame& frame, std::size_t begin, std::size_t end,
                    const std::vector<ControlSpec>& controls) {
    int max_lag = 0;
    for (const auto& c : controls) {
        if (c.lag < 0) throw std::invalid_argument("control lag must be >= 0");
        if (c.origin == ControlSpec::Origin::External && 2 + c.external_index >= frame.columns.size()) {
            throw std::invalid_argument("control refers to a missing external series");
        }
        max_lag = std::max(max_lag, c.lag);
    }
    const auto lag0 = static_cast<std::size_t>(max_lag);
    if (end <= begin + lag0) throw std::invalid_argument("period too short for the requested control lags");
    const auto n = static_cast<Eigen::Index>(end - begin - lag0);

    auto column_of = [&](const ControlSpec& c) -> const std::vector<double>& {
        switch (c.origin) {
            case ControlSpec::Origin::Target: return frame.columns[0];
            case ControlSpec::Origin::Source: return frame.columns[1];
            case ControlSpec::Origin::External: break;
        }
        return frame.columns[2 + c.external_index];
    };
    const auto count_role = [&](ControlSpec::Role role) {
        return std::count_if(controls.begin(), controls.end(), [&](const auto& c) { return c.role == role; });
    };

    Period out;
    out.series.y.resize(n);
    out.series.x.resize(n);
    out.series.zy.resize(n, count_role(ControlSpec::Role::Y));
    out.series.zx.resize(n, count_role(ControlSpec::Role::X));
    for (Eigen::Index t = 0; t < n; ++t) {
        const std::size_t row = begin + lag0 + static_cast<std::size_t>(t);
        out.series.y[t] = frame.columns[0][row];
        out.series.x[t] = frame.columns[1][row];
        Eigen::Index cy = 0;
        Eigen::Index cx = 0;
        for (const auto& c : controls) {
            const double v = column_of(c)[row - static_cast<std::size_t>(c.lag)];
            if (c.role == ControlSpec::Role::Y) {
                out.series.zy(t, cy++) = v;
            } else {
                out.series.zx(t, cx++) = v;
            }
        }
        out.dates.push_back(frame.dates[row]);
    }
    return out;
}

namespace {

AlignedFrame align_all(const DatedSeries& target, const DatedSeries& source,
                       const std::vector<DatedSeries>& externals) {
    std::vector<const DatedSeries*> all{&target, &source};
    for (const auto& e : externals) all.push_back(&e);
    return align(all);
}

}  // namespace

SplitPeriods align_and_split(const DatedSeries& target, const DatedSeries& source,
                             const std::vector<DatedSeries>& externals,
                             const std::vector<ControlSpec>& controls, Date breakpoint) {
    const AlignedFrame frame = align_all(target, source, externals);
    const auto first_on_or_after = static_cast<std::size_t>(
        std::lower_bound(frame.dates.begin(), frame.dates.end(), breakpoint) - frame.dates.begin());
    const auto first_after = static_cast<std::size_t>(
        std::upper_bound(frame.dates.begin(), frame.dates.end(), breakpoint) - frame.dates.begin());
    if (first_on_or_after == 0) {
        throw std::invalid_argument("no common observations before the breakpoint " + format_date(breakpoint));
    }
    if (first_after == frame.dates.size()) {
        throw std::invalid_argument("no common observations after the breakpoint " + format_date(breakpoint));
    }
    return {build_period(frame, 0, first_on_or_after, controls),
            build_period(frame, first_after, frame.dates.size(), controls)};
}

Period align_whole(const DatedSeries& target, const DatedSeries& source,
                   const std::vector<DatedSeries>& externals, const std::vector<ControlSpec>& controls) {
    const AlignedFrame frame = align_all(target, source, externals);
    if (frame.dates.empty()) throw std::invalid_argument("series share no common dates");
    return build_period(frame, 0, frame.dates.size(), controls);
}

}  // namespace qdep

#pragma once

#include "qdep/types.hpp"

#include <chrono>
#include <cstddef>
#include <string>
#include <vector>

namespace qdep {

using Date = std::chrono::year_month_day;

/// Parses YYYY-MM-DD; throws std::invalid_argument on anything else.
[[nodiscard]] Date parse_date(const std::string& text);
[[nodiscard]] std::string format_date(Date date);

struct DatedSeries {
    std::string name;
    std::vector<Date> dates;  // strictly increasing
    std::vector<double> values;

    [[nodiscard]] std::size_t size() const { return dates.size(); }
    void validate() const;
};

struct CsvLoad {
    DatedSeries series;
    std::size_t dropped_rows = 0;  // rows with an empty/NA value
};

/// Reads one value column keyed by a date column from a CSV file with a header
/// row. Rows are sorted by date; duplicate dates, unparseable dates and missing
/// columns are errors.
[[nodiscard]] CsvLoad load_csv(const std::string& path, const std::string& date_column,
                               const std::string& value_column);

/// First differences, dated at the later observation.
[[nodiscard]] DatedSeries difference(const DatedSeries& series);

/// Inner join of several series on their common dates.
struct AlignedFrame {
    std::vector<Date> dates;
    std::vector<std::vector<double>> columns;  // one per input series, in input order
};
[[nodiscard]] AlignedFrame align(const std::vector<const DatedSeries*>& series);

/// A controlling variable: the target, the source or an external series,
/// lagged by `lag` rows of the aligned frame, used in the Y or the X model.
struct ControlSpec {
    enum class Origin { Target, Source, External };
    enum class Role { Y, X };
    Origin origin = Origin::External;
    std::size_t external_index = 0;
    int lag = 0;
    Role role = Role::Y;
};

struct Period {
    ObservedSeries series;
    std::vector<Date> dates;  // date of each row of `series`
};

/// Builds the observed series from rows [begin, end) of an aligned frame whose
/// columns are (target, source, externals...). Lags are taken inside the range
/// only, so the first max-lag rows are consumed.
[[nodiscard]] Period build_period(const AlignedFrame& frame, std::size_t begin, std::size_t end,
                                  const std::vector<ControlSpec>& controls);

struct SplitPeriods {
    Period before;  // dates strictly before the breakpoint
    Period after;   // dates strictly after the breakpoint
};

/// Inner-joins target, source and external controls, then splits at the
/// breakpoint; the breakpoint date belongs to neither period.
[[nodiscard]] SplitPeriods align_and_split(const DatedSeries& target, const DatedSeries& source,
                                           const std::vector<DatedSeries>& externals,
                                           const std::vector<ControlSpec>& controls, Date breakpoint);

/// Join without a split.
[[nodiscard]] Period align_whole(const DatedSeries& target, const DatedSeries& source,
                                 const std::vector<DatedSeries>& externals,
                                 const std::vector<ControlSpec>& controls);

}  // namespace qdep

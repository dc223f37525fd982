#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace fhn {

/// Equidistant observations of the voltage coordinate.
struct ObservedSeries {
  std::vector<double> values;
  double obs_step = 0.0;
  bool centered = false;
  std::string source;
};

/// Column by header name or zero-based index.
using ColumnSelector = std::variant<std::string, std::size_t>;

/// Reads one numeric column of a comma- or tab-delimited text file. A first
/// row containing non-numeric cells is taken as a header; lines starting with
/// '#' and blank lines are skipped. With `center`, the empirical mean is
/// subtracted.
///
/// Throws MissingFileError, NonNumericCellError (with line number) or EmptyColumnError.
ObservedSeries load_series(const std::filesystem::path& path, const ColumnSelector& column, double obs_step,
                           bool center);

/// Keeps every factor-th value starting at index 0; obs_step is scaled by factor.
ObservedSeries subsample(const ObservedSeries& series, std::size_t factor);

/// Keeps the first `count` values.
ObservedSeries truncate(const ObservedSeries& series, std::size_t count);

/// Subtracts the mean in place.
void center_values(std::vector<double>& values);

/// Splits one delimited line on ',' or '\t' (trimming surrounding blanks).
std::vector<std::string> split_fields(const std::string& line);

/// Parses a full-string double; returns false for anything else.
bool parse_double(const std::string& text, double& out);

}  // namespace fhn

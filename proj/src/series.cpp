#include "fhn/series.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <optional>

#include "fhn/errors.hpp"

namespace fhn {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::vector<std::string> split_fields(const std::string& line) {
  const char delim = line.find(',') != std::string::npos ? ',' : '\t';
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delim, start);
    out.push_back(trim(line.substr(start, pos == std::string::npos ? std::string::npos : pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

bool parse_double(const std::string& text, double& out) {
  if (text.empty()) return false;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

void center_values(std::vector<double>& values) {
  if (values.empty()) return;
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  for (double& v : values) v -= mean;
}

ObservedSeries load_series(const std::filesystem::path& path, const ColumnSelector& column, double obs_step,
                           bool center) {
  if (!(obs_step > 0.0)) throw ConfigError("load_series: obs_step must be positive");
  std::ifstream in(path);
  if (!in) throw MissingFileError("load_series: cannot open '" + path.string() + "'");

  ObservedSeries out;
  out.obs_step = obs_step;
  out.centered = center;
  std::optional<std::size_t> index;
  if (const auto* i = std::get_if<std::size_t>(&column)) index = *i;
  const std::string* name = std::get_if<std::string>(&column);

  std::string line;
  std::size_t line_no = 0;
  bool first_row = true;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto fields = split_fields(t);
    if (first_row) {
      first_row = false;
      double dummy = 0.0;
      const bool header = std::any_of(fields.begin(), fields.end(),
                                      [&](const std::string& f) { return !parse_double(f, dummy); });
      if (header) {
        if (name) {
          const auto it = std::find(fields.begin(), fields.end(), *name);
          if (it == fields.end()) throw EmptyColumnError("load_series: no column named '" + *name + "'");
          index = static_cast<std::size_t>(it - fields.begin());
        }
        continue;
      }
      if (name) throw EmptyColumnError("load_series: file has no header, cannot find column '" + *name + "'");
    }
    const std::size_t col = index.value_or(0);
    if (col >= fields.size()) {
      throw NonNumericCellError("load_series: line " + std::to_string(line_no) + " has no column " +
                                std::to_string(col));
    }
    double v = 0.0;
    if (!parse_double(fields[col], v) || !std::isfinite(v)) {
      throw NonNumericCellError("load_series: non-numeric cell '" + fields[col] + "' at line " +
                                std::to_string(line_no));
    }
    out.values.push_back(v);
  }
  if (out.values.empty()) throw EmptyColumnError("load_series: no numeric values in '" + path.string() + "'");
  if (center) center_values(out.values);
  out.source = path.string();
  return out;
}

ObservedSeries subsample(const ObservedSeries& series, std::size_t factor) {
  if (factor == 0) throw Error("subsample: factor must be at least 1");
  ObservedSeries out = series;
  out.values.clear();
  for (std::size_t i = 0; i < series.values.size(); i += factor) out.values.push_back(series.values[i]);
  out.obs_step = series.obs_step * static_cast<double>(factor);
  return out;
}

ObservedSeries truncate(const ObservedSeries& series, std::size_t count) {
  ObservedSeries out = series;
  if (count < out.values.size()) out.values.resize(count);
  return out;
}

}  // namespace fhn

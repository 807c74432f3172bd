#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "efgraph/error.hpp"
#include "efgraph/timeseries.hpp"

// Matrix file format
//
//   time,<label>:<TAG>,<label>:<TAG>,...
//   <t0>,<v>,<v>,...
//
// Comma separated, one header row, then one row per sample. The first
// column holds row times in seconds; the sampling interval is the spacing
// of the first two rows. TAG is EEG, FMRI or DERIVED. Numbers are written
// with 17 significant digits, which round-trips every double.

namespace efgraph {

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    fields.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return fields;
}

inline bool parse_double(std::string_view text, double& out) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return false;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

inline std::string format_double(double v) {
  char buffer[32];
  const int len = std::snprintf(buffer, sizeof buffer, "%.17g", v);
  return std::string(buffer, static_cast<std::size_t>(len));
}

inline std::ofstream open_for_writing(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error("cannot write '" + path.string() + "'");
  }
  return out;
}

}  // namespace detail

/// Parses a matrix file. Errors carry the file name and 1-based line number.
inline TimeSeriesMatrix read_matrix_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error("cannot open '" + path.string() + "'");
  }
  const std::string where = path.string() + ":";

  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  TimeSeriesMatrix ts;
  std::vector<double> times;
  std::vector<double> cells;

  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) {
      continue;
    }
    const auto fields = detail::split_commas(line);
    if (!have_header) {
      if (fields.size() < 2 || fields.front() != "time") {
        throw Error(where + std::to_string(line_no) + ": header must start with 'time' followed by label:TAG columns");
      }
      std::set<std::string, std::less<>> seen;
      for (std::size_t f = 1; f < fields.size(); ++f) {
        const auto colon = fields[f].rfind(':');
        if (colon == std::string_view::npos || colon == 0) {
          throw Error(where + std::to_string(line_no) + ": header field '" + std::string(fields[f]) +
                      "' is not label:TAG");
        }
        std::string label(fields[f].substr(0, colon));
        Modality tag;
        try {
          tag = parse_modality(fields[f].substr(colon + 1));
        } catch (const Error& e) {
          throw Error(where + std::to_string(line_no) + ": " + e.what());
        }
        if (!seen.insert(label).second) {
          throw Error(where + std::to_string(line_no) + ": duplicate label '" + label + "'");
        }
        ts.labels.push_back(std::move(label));
        ts.modalities.push_back(tag);
      }
      have_header = true;
      continue;
    }
    if (fields.size() != ts.labels.size() + 1) {
      throw Error(where + std::to_string(line_no) + ": expected " + std::to_string(ts.labels.size() + 1) +
                  " fields, found " + std::to_string(fields.size()));
    }
    for (std::size_t f = 0; f < fields.size(); ++f) {
      double v = 0.0;
      if (!detail::parse_double(fields[f], v) || !std::isfinite(v)) {
        throw Error(where + std::to_string(line_no) + ": field " + std::to_string(f + 1) + " ('" +
                    std::string(fields[f]) + "') is not a finite number");
      }
      if (f == 0) {
        if (!times.empty() && !(v > times.back())) {
          throw Error(where + std::to_string(line_no) + ": time column must be strictly increasing");
        }
        times.push_back(v);
      } else {
        cells.push_back(v);
      }
    }
  }
  if (!have_header) {
    throw Error(where + " file is empty");
  }
  if (times.size() < 2) {
    throw Error(where + " needs at least 2 data rows to define the sampling interval");
  }

  const auto rows = static_cast<Eigen::Index>(times.size());
  const auto cols = static_cast<Eigen::Index>(ts.labels.size());
  ts.values = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(cells.data(), rows, cols);
  ts.dt = times[1] - times[0];
  ts.validate();
  return ts;
}

/// Writes `ts` in matrix format. Row times are k * dt.
inline void write_matrix_file(const std::filesystem::path& path, const TimeSeriesMatrix& ts) {
  auto out = detail::open_for_writing(path);
  out << "time";
  for (std::size_t c = 0; c < ts.labels.size(); ++c) {
    out << ',' << ts.labels[c] << ':' << to_string(ts.modalities[c]);
  }
  out << '\n';
  for (Eigen::Index r = 0; r < ts.values.rows(); ++r) {
    out << detail::format_double(static_cast<double>(r) * ts.dt);
    for (Eigen::Index c = 0; c < ts.values.cols(); ++c) {
      out << ',' << detail::format_double(ts.values(r, c));
    }
    out << '\n';
  }
  if (!out) {
    throw Error("failed writing '" + path.string() + "'");
  }
}

/// One integer per line.
inline void write_labels_file(const std::filesystem::path& path, const std::vector<int>& labels) {
  auto out = detail::open_for_writing(path);
  for (int l : labels) {
    out << l << '\n';
  }
  if (!out) {
    throw Error("failed writing '" + path.string() + "'");
  }
}

inline std::vector<int> read_labels_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error("cannot open '" + path.string() + "'");
  }
  std::vector<int> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = detail::trim(line);
    if (text.empty()) continue;
    int v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
      throw Error(path.string() + ":" + std::to_string(line_no) + ": '" + std::string(text) + "' is not an integer");
    }
    labels.push_back(v);
  }
  return labels;
}

/// One non-empty name per line.
inline std::vector<std::string> read_names_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error("cannot open '" + path.string() + "'");
  }
  std::vector<std::string> names;
  std::string line;
  while (std::getline(in, line)) {
    const auto text = detail::trim(line);
    if (!text.empty()) {
      names.emplace_back(text);
    }
  }
  return names;
}

/// Plain CSV table with a header row; cells are preformatted strings.
inline void write_table(const std::filesystem::path& path, const std::vector<std::string>& header,
                        const std::vector<std::vector<std::string>>& rows) {
  auto out = detail::open_for_writing(path);
  for (std::size_t c = 0; c < header.size(); ++c) {
    out << (c ? "," : "") << header[c];
  }
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out << (c ? "," : "") << row[c];
    }
    out << '\n';
  }
  if (!out) {
    throw Error("failed writing '" + path.string() + "'");
  }
}

}  // namespace efgraph

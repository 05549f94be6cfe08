#pragma once

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "adpf/mcmc/chain_io.hpp"

namespace adpf {

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IsoDate {
  int year = 0, month = 0, day = 0;

  static IsoDate parse(const std::string& s) {
    IsoDate d;
    char dash1 = 0, dash2 = 0;
    std::istringstream in(s);
    if (s.size() != 10 || !(in >> d.year >> dash1 >> d.month >> dash2 >> d.day) || dash1 != '-' || dash2 != '-' ||
        d.month < 1 || d.month > 12 || d.day < 1 || d.day > 31)
      throw DataError("bad ISO date '" + s + "'");
    return d;
  }

  int month_index() const { return year * 12 + (month - 1); }

  IsoDate plus_months(int m) const {
    const int idx = month_index() + m;
    return {idx / 12, idx % 12 + 1, day};
  }

  std::string str() const {
    std::ostringstream o;
    o << std::setfill('0') << std::setw(4) << year << '-' << std::setw(2) << month << '-' << std::setw(2) << day;
    return o.str();
  }
};

/// Observation rows plus the dates when the file has them.
struct ObservationData {
  std::vector<std::string> columns;
  std::vector<Eigen::VectorXd> rows;
  std::vector<std::string> dates;
};

namespace detail {

inline double parse_value(const std::string& cell, std::size_t line) {
  if (cell.empty()) throw DataError("missing value on line " + std::to_string(line));
  std::size_t pos = 0;
  double v;
  try {
    v = std::stod(cell, &pos);
  } catch (const std::exception&) {
    throw DataError("non-numeric value '" + cell + "' on line " + std::to_string(line));
  }
  if (pos != cell.size() || !std::isfinite(v))
    throw DataError("missing or non-finite value '" + cell + "' on line " + std::to_string(line));
  return v;
}

inline bool is_auxiliary_column(const std::string& c) {
  return c.rfind("latent_", 0) == 0 || c.rfind("dist_", 0) == 0;
}

}  // namespace detail

/// Asset data: header `date,dlog_pd,dlog_c` (optionally followed by latent_* or
/// dist_* columns), ISO dates three months apart, no missing values.
inline ObservationData read_asset_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty asset data file");
  const auto head = split_csv_line(line);
  if (head.size() < 3 || head[0] != "date" || head[1] != "dlog_pd" || head[2] != "dlog_c")
    throw DataError("asset data header must start with date,dlog_pd,dlog_c");
  for (std::size_t i = 3; i < head.size(); ++i)
    if (!detail::is_auxiliary_column(head[i])) throw DataError("unexpected column " + head[i]);
  ObservationData d;
  d.columns = {"dlog_pd", "dlog_c"};
  std::size_t ln = 1;
  int prev = -1;
  while (std::getline(in, line)) {
    ++ln;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != head.size()) throw DataError("wrong number of fields on line " + std::to_string(ln));
    const IsoDate date = IsoDate::parse(cells[0]);
    if (prev >= 0 && date.month_index() - prev != 3)
      throw DataError("dates are not quarterly at line " + std::to_string(ln));
    prev = date.month_index();
    d.dates.push_back(cells[0]);
    Eigen::VectorXd r(2);
    r << detail::parse_value(cells[1], ln), detail::parse_value(cells[2], ln);
    d.rows.push_back(r);
  }
  return d;
}

/// Univariate data: header `t,y` (optionally followed by latent_* or dist_* columns).
inline ObservationData read_series_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty data file");
  const auto head = split_csv_line(line);
  if (head.size() < 2 || head[0] != "t" || head[1] != "y") throw DataError("data header must start with t,y");
  for (std::size_t i = 2; i < head.size(); ++i)
    if (!detail::is_auxiliary_column(head[i])) throw DataError("unexpected column " + head[i]);
  ObservationData d;
  d.columns = {"y"};
  std::size_t ln = 1;
  while (std::getline(in, line)) {
    ++ln;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != head.size()) throw DataError("wrong number of fields on line " + std::to_string(ln));
    d.rows.push_back(Eigen::VectorXd::Constant(1, detail::parse_value(cells[1], ln)));
  }
  return d;
}

inline ObservationData read_observations(const std::string& path, bool asset) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open data file " + path);
  return asset ? read_asset_csv(in) : read_series_csv(in);
}

/// Converts rows to a model's fixed-size observation type.
template <class Obs>
std::vector<Obs> to_observations(const ObservationData& d) {
  std::vector<Obs> out;
  out.reserve(d.rows.size());
  for (const auto& r : d.rows) {
    if (r.size() != Obs::RowsAtCompileTime) throw DataError("observation dimension mismatch");
    out.push_back(Obs(r));
  }
  return out;
}

}  // namespace adpf

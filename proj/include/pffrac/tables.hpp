#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"

namespace pff {

namespace detail {

inline std::vector<std::string> splitCsv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  return out;
}

inline double parseNumber(const std::string& s, int line) {
  std::istringstream is(s);
  is.imbue(std::locale::classic());
  double v = 0;
  is >> v;
  if (is.fail() || !is.eof()) throw ParseError("not a number: '" + s + "'", line);
  return v;
}

// Returns data rows; the header must match exactly.
inline std::vector<std::vector<double>> readCsv(std::istream& in, const std::vector<std::string>& header) {
  std::string line;
  int no = 0;
  bool seen_header = false;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++no;
    if (line.empty() || line[0] == '#' || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto cells = splitCsv(line);
    if (!seen_header) {
      if (cells != header) throw ParseError("unexpected CSV header", no);
      seen_header = true;
      continue;
    }
    if (cells.size() != header.size()) throw ParseError("wrong number of columns", no);
    std::vector<double> r;
    for (const auto& c : cells) r.push_back(parseNumber(c, no));
    rows.push_back(std::move(r));
  }
  if (!seen_header) throw ParseError("missing CSV header", no);
  return rows;
}

inline double lerp(double x0, double x1, double y0, double y1, double x) {
  if (x == x0) return y0;
  if (x == x1) return y1;
  return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
}

}  // namespace detail

struct ShearFitRow {
  double nu, a, b;
};

class ShearFitTable {
 public:
  static constexpr double kRowSnap = 1e-4;

  ShearFitTable() = default;
  explicit ShearFitTable(std::vector<ShearFitRow> rows) : rows_(std::move(rows)) { check(); }

  static const ShearFitTable& builtin() {
    static const ShearFitTable t({{0.20, -0.0728, -0.5896},
                                  {0.25, -0.0042, -0.7022},
                                  {0.30, 0.1281, -0.8783},
                                  {0.35, 0.2807, -1.0886},
                                  {0.40, 0.3952, -1.2633},
                                  {0.45, 1.0790, -1.9825}});
    return t;
  }

  static ShearFitTable fromCsv(std::istream& in) {
    std::vector<ShearFitRow> rows;
    for (const auto& r : detail::readCsv(in, {"nu", "a", "b"})) rows.push_back({r[0], r[1], r[2]});
    return ShearFitTable(std::move(rows));
  }
  static ShearFitTable fromFile(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open " + path);
    return fromCsv(in);
  }

  const std::vector<ShearFitRow>& rows() const { return rows_; }
  double nuMin() const { return rows_.front().nu; }
  double nuMax() const { return rows_.back().nu; }

  // (a, b) at nu, linear between rows
  std::array<double, 2> lookup(double nu) const {
    // tolerate roundoff from nu = lambda / (2 (lambda + mu))
    constexpr double slack = 1e-9;
    if (!(nu >= nuMin() - slack && nu <= nuMax() + slack))
      throw OutOfRange("poisson ratio " + std::to_string(nu) + " outside shear-fit table range [" +
                       std::to_string(nuMin()) + ", " + std::to_string(nuMax()) + "]");
    nu = std::clamp(nu, nuMin(), nuMax());
    // printed Lame constants carry 5 significant digits
    for (const auto& r : rows_)
      if (std::abs(nu - r.nu) <= kRowSnap) return {r.a, r.b};
    for (std::size_t i = 0; i + 1 < rows_.size(); ++i) {
      const auto& r0 = rows_[i];
      const auto& r1 = rows_[i + 1];
      if (nu <= r1.nu) return {detail::lerp(r0.nu, r1.nu, r0.a, r1.a, nu), detail::lerp(r0.nu, r1.nu, r0.b, r1.b, nu)};
    }
    return {rows_.back().a, rows_.back().b};
  }

 private:
  void check() const {
    if (rows_.size() < 2) throw InvalidInput("shear-fit table needs at least two rows");
    for (std::size_t i = 1; i < rows_.size(); ++i)
      if (!(rows_[i].nu > rows_[i - 1].nu)) throw InvalidInput("shear-fit table: nu must increase");
  }
  std::vector<ShearFitRow> rows_;
};

enum class CrackShape { PlaneStrain, Penny, Square };

struct CalibrationRow {
  double r_a;
  std::array<double, 3> d;  // plane strain, penny, square
};

class CalibrationTable {
 public:
  CalibrationTable() = default;
  explicit CalibrationTable(std::vector<CalibrationRow> rows) : rows_(std::move(rows)) { check(); }

  static const CalibrationTable& builtin() {
    static const CalibrationTable t({{0.0, {0.0, 0.0, 0.0}},
                                     {0.2, {0.0320, 0.0021, 0.0026}},
                                     {0.4, {0.1242, 0.0196, 0.0263}},
                                     {0.6, {0.2472, 0.0687, 0.0917}},
                                     {0.8, {0.3899, 0.1566, 0.2064}}});
    return t;
  }

  static CalibrationTable fromCsv(std::istream& in) {
    std::vector<CalibrationRow> rows;
    for (const auto& r : detail::readCsv(in, {"r_a", "plane_strain", "penny", "square"}))
      rows.push_back({r[0], {r[1], r[2], r[3]}});
    return CalibrationTable(std::move(rows));
  }
  static CalibrationTable fromFile(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open " + path);
    return fromCsv(in);
  }

  const std::vector<CalibrationRow>& rows() const { return rows_; }

  double lookup(double r_a, CrackShape shape) const {
    const double lo = rows_.front().r_a, hi = rows_.back().r_a;
    if (!(r_a >= lo && r_a <= hi))
      throw OutOfRange("crack length ratio " + std::to_string(r_a) + " outside calibration range");
    const int s = static_cast<int>(shape);
    for (std::size_t i = 0; i + 1 < rows_.size(); ++i) {
      const auto& r0 = rows_[i];
      const auto& r1 = rows_[i + 1];
      if (r_a <= r1.r_a) return detail::lerp(r0.r_a, r1.r_a, r0.d[s], r1.d[s], r_a);
    }
    return rows_.back().d[s];
  }

 private:
  void check() const {
    if (rows_.size() < 2) throw InvalidInput("calibration table needs at least two rows");
    for (std::size_t i = 1; i < rows_.size(); ++i) {
      if (!(rows_[i].r_a > rows_[i - 1].r_a)) throw InvalidInput("calibration table: r_a must increase");
      for (int s = 0; s < 3; ++s)
        if (!(rows_[i].d[s] > rows_[i - 1].d[s])) throw InvalidInput("calibration table: d must increase");
    }
  }
  std::vector<CalibrationRow> rows_;
};

inline double calibratePhase(double r_a, CrackShape shape, const CalibrationTable& table = CalibrationTable::builtin()) {
  return table.lookup(r_a, shape);
}

}  // namespace pff

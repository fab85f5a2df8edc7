#include "mixsearch/report.hpp"

#include <cmath>
#include <cstdio>

#include "mixsearch/error.hpp"

namespace mixsearch::report {

namespace {

double to_double(std::string_view s) {
  const std::string str(s);
  try {
    std::size_t used = 0;
    const double v = std::stod(str, &used);
    if (used == str.size() && std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::ParseError, "'" + str + "' is not a number");
}

double snap(double v) { return std::round(v * 1e9) / 1e9; }

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string column_name(const std::string& metric) {
  std::string out;
  for (char c : metric) {
    if (c != '@') out.push_back(c);
  }
  return out;
}

}  // namespace

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::vector<double> SweepTable::column(const std::string& metric) const {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const SweepRow& r : rows) out.push_back(r.report.aggregate.at(metric));
  return out;
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string format_sweep_csv(const SweepTable& table) {
  std::string out = csv_field(table.x_name);
  const std::vector<std::string> names =
      table.rows.empty() ? std::vector<std::string>{} : table.rows.front().report.metric_names;
  for (const std::string& n : names) out += "," + column_name(n);
  out += '\n';
  char buf[32];
  for (const SweepRow& r : table.rows) {
    out += format_number(r.x);
    for (const std::string& n : names) {
      std::snprintf(buf, sizeof buf, ",%.6f", r.report.aggregate.at(n));
      out += buf;
    }
    out += '\n';
  }
  return out;
}

std::vector<double> parse_grid(std::string_view spec) {
  std::vector<double> out;
  if (spec.find(':') != std::string_view::npos) {
    const auto parts = split(spec, ':');
    if (parts.size() != 3) throw Error(ErrorCode::ParseError, "grid '" + std::string(spec) + "' must be lo:hi:step");
    const double lo = to_double(parts[0]);
    const double hi = to_double(parts[1]);
    const double step = to_double(parts[2]);
    if (!(step > 0.0) || hi < lo) throw Error(ErrorCode::ParseError, "grid '" + std::string(spec) + "' is empty");
    const auto n = static_cast<long long>(std::floor((hi - lo) / step + 1e-9));
    for (long long i = 0; i <= n; ++i) out.push_back(snap(lo + static_cast<double>(i) * step));
  } else {
    for (auto p : split(spec, ',')) {
      if (!p.empty()) out.push_back(snap(to_double(p)));
    }
  }
  if (out.empty()) throw Error(ErrorCode::ParseError, "grid '" + std::string(spec) + "' is empty");
  return out;
}

std::vector<std::size_t> parse_k_list(std::string_view spec) {
  std::vector<std::size_t> out;
  for (auto p : split(spec, ',')) {
    if (p.empty()) continue;
    const double v = to_double(p);
    if (v < 1 || v != std::floor(v)) throw Error(ErrorCode::ParseError, "K '" + std::string(p) + "' must be a positive integer");
    out.push_back(static_cast<std::size_t>(v));
  }
  if (out.empty()) throw Error(ErrorCode::ParseError, "empty K list");
  return out;
}

}  // namespace mixsearch::report

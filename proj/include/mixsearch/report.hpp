#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "mixsearch/metrics.hpp"

namespace mixsearch::report {

// RFC 4180: quotes fields containing ',', '"', CR or LF; doubles embedded quotes.
std::string csv_field(std::string_view s);

struct SweepRow {
  double x = 0.0;
  metrics::MetricReport report;
};

struct SweepTable {
  std::string x_name;  // "alpha" or "p"
  std::vector<SweepRow> rows;

  // Aggregate of `metric` per row, in row order.
  std::vector<double> column(const std::string& metric) const;
};

// Header `x_name,ndcg10,ndcg100,recall1` (metric names without '@').
std::string format_sweep_csv(const SweepTable& table);

// "lo:hi:step" (inclusive), or a comma list "0,0.5,1". Values are snapped to
// 1e-9 so 0:1:0.1 yields exactly 0.3 and not 0.30000000000000004.
std::vector<double> parse_grid(std::string_view spec);
// "10,100"
std::vector<std::size_t> parse_k_list(std::string_view spec);
std::string format_number(double v);

}  // namespace mixsearch::report

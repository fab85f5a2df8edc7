#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mixsearch/calibration.hpp"
#include "mixsearch/core.hpp"
#include "mixsearch/fusion.hpp"
#include "mixsearch/report.hpp"

namespace mixsearch::fusion {

struct SweepOptions {
  std::vector<std::size_t> k_values{10, 100};
  bool recall1 = true;
  bool prenormalize = true;
  unsigned threads = 0;
  Modality text_modality = Modality::Text;
  Modality other_modality = Modality::Image;
  bool renormalize_centered = false;
};

// One retrieval + evaluation per alpha in `grid`. Calibrated iff means != nullptr.
report::SweepTable alpha_sweep(const Corpus& corpus, const std::vector<Query>& queries, const Qrels& qrels,
                               std::span<const double> grid, const calibration::CalibrationMeans* means,
                               const SweepOptions& options = {});

}  // namespace mixsearch::fusion

#pragma once

// Corpus construction for the mixing experiments: per-document modality
// replacement with probability p, fixed-ratio shape mixing, and the push-down
// simulation that pins replaced documents to a constant score.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mixsearch/calibration.hpp"
#include "mixsearch/core.hpp"
#include "mixsearch/metrics.hpp"
#include "mixsearch/report.hpp"
#include "mixsearch/search.hpp"

namespace mixsearch::corpusops {

inline constexpr std::uint64_t kDefaultSeed = 42;

enum class ReplacementMode { Bernoulli, ExactCount };

std::string_view replacement_mode_name(ReplacementMode m);
ReplacementMode parse_replacement_mode(std::string_view s);

struct ReplacementPlan {
  double p = 0.0;
  ReplacementMode mode = ReplacementMode::Bernoulli;
  std::uint64_t seed = kDefaultSeed;
  Modality source_modality = Modality::Text;
  Modality target_modality = Modality::Image;

  void validate() const;
};

// One uniform draw in [0, 1) per document, in document order. Masks built from
// the same draws are nested in p.
std::vector<double> uniform_draws(std::size_t n, std::uint64_t seed);

// Bernoulli: u_i < p. ExactCount: the floor(p * n) documents with the smallest
// draws (ties by index).
std::vector<bool> replacement_mask(std::span<const double> draws, double p, ReplacementMode mode);

struct Replaced {
  Corpus corpus;
  std::vector<bool> mask;
  std::vector<std::string> replaced_ids;
};

// Every document keeps exactly one part: target when masked, else source.
// Throws MissingPart.
Replaced apply_replacement(const Corpus& paired, const ReplacementPlan& plan);

enum class MixShape { TextOnly, ImageOnly, Multimodal };

std::string_view mix_shape_name(MixShape s);

struct MixPlan {
  // Indexed by MixShape.
  std::array<double, 3> ratios{1.0, 1.0, 1.0};
  std::uint64_t seed = kDefaultSeed;
  Modality text_modality = Modality::Text;
  Modality image_modality = Modality::Image;

  void validate() const;
};

// "1:1:1"
std::array<double, 3> parse_ratios(std::string_view s);

// Largest-remainder apportionment of n over the ratios; remainder ties go to
// the lower shape index.
std::array<std::size_t, 3> mix_counts(std::size_t n, const std::array<double, 3>& ratios);

struct Mixed {
  Corpus corpus;
  std::vector<MixShape> shapes;
};

// Documents keep their input order; shapes are assigned over a seeded
// permutation. Throws MissingPart.
Mixed apply_mix(const Corpus& paired, const MixPlan& plan);

struct ExperimentOptions {
  std::vector<std::size_t> k_values{10, 100};
  bool recall1 = true;
  bool prenormalize = true;
  unsigned threads = 0;
};

// Uncalibrated retrieval with every masked document's score replaced by 0.
// NativeScore keeps the masked block in its cosine order below the rest;
// ById ranks the masked block by id.
metrics::MetricReport pushdown_simulation(const std::vector<Query>& queries, const Corpus& corpus,
                                          const std::vector<bool>& mask, const Qrels& qrels,
                                          const ExperimentOptions& options = {},
                                          search::TieOrder tie_order = search::TieOrder::ByNativeScore);

// For each p: apply_replacement (plan.p overridden), retrieve, evaluate.
// Calibrated iff means != nullptr.
report::SweepTable p_sweep(const Corpus& paired, const std::vector<Query>& queries, const Qrels& qrels,
                           std::span<const double> grid, const ReplacementPlan& plan,
                           const calibration::CalibrationMeans* means, const ExperimentOptions& options = {});

// For each p: apply_replacement, then pushdown_simulation on the result.
report::SweepTable pushdown_sweep(const Corpus& paired, const std::vector<Query>& queries, const Qrels& qrels,
                                  std::span<const double> grid, const ReplacementPlan& plan,
                                  const ExperimentOptions& options = {},
                                  search::TieOrder tie_order = search::TieOrder::ByNativeScore);

}  // namespace mixsearch::corpusops

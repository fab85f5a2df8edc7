#pragma once

// Synthetic paired corpora with a planted modality gap.
//
// Per document i: s_i uniform on the unit sphere of the first semantic_dim
// coordinates; image = normalize(s_i + eps), text = normalize(s_i + eps' + g u),
// query i = normalize(s_i + eps'' + g u), with isotropic Gaussian noise of
// per-coordinate sigma. u is the last coordinate, or a seeded random unit
// vector orthogonal to the semantic coordinates. Query i is relevant only to
// document i.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mixsearch/calibration.hpp"
#include "mixsearch/core.hpp"
#include "mixsearch/corpusops.hpp"
#include "mixsearch/report.hpp"

namespace mixsearch::synth {

struct SynthConfig {
  std::size_t dimension = 64;
  std::size_t semantic_dim = 32;
  std::size_t n_docs = 1000;
  std::size_t n_queries = 1000;
  double gap = 1.0;
  double sigma = 0.05;
  std::uint64_t seed = 42;
  bool random_gap_direction = false;
  // Text parts carry the first half of the semantic coordinates, image parts
  // the second half; queries carry all of them.
  bool split_semantics = false;

  // Throws Error(ConfigInvalid).
  void validate() const;
};

struct SynthData {
  Corpus corpus;
  std::vector<Query> queries;
  Qrels qrels;
};

// Unit vector u for the config (depends on dimension, semantic_dim, seed and
// random_gap_direction only).
Embedding gap_direction(const SynthConfig& config);

SynthData generate(const SynthConfig& config);

// Fresh draw with the same gap direction as `config` but noise and semantics
// from `seed`, for use as a held-out calibration set.
SynthData generate_calibration(const SynthConfig& config, std::size_t n, std::uint64_t seed);

// Seed of the default held-out calibration draw for a config.
std::uint64_t calibration_seed(const SynthConfig& config);

// Means over every (normalized) query and document part of `data`.
calibration::CalibrationMeans means_of(const SynthData& data);

struct UShape {
  report::SweepTable raw;
  report::SweepTable calibrated;
};

// generate -> p sweep with and without calibration. The calibrated curve uses
// means from generate_calibration(config, config.n_docs, calibration_seed(config)).
UShape ushape_experiment(const SynthConfig& config, std::span<const double> grid,
                         const corpusops::ReplacementPlan& plan = {},
                         const corpusops::ExperimentOptions& options = {});

}  // namespace mixsearch::synth

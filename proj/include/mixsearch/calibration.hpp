#pragma once

// Modality-gap removal by mean centering. Means are estimated per
// (role, modality) from a calibration set, so query means stay separate from
// text-document means.

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mixsearch/core.hpp"
#include "mixsearch/store.hpp"

namespace mixsearch::calibration {

inline constexpr double kDegenerateNorm = 1e-12;

struct MeanKey {
  store::Role role = store::Role::DocumentPart;
  Modality modality = Modality::Text;

  friend auto operator<=>(const MeanKey&, const MeanKey&) = default;
};

std::string to_string(const MeanKey& key);
// "query:text", "part:image", ...
MeanKey parse_mean_key(std::string_view s);

inline MeanKey query_key(Modality m) { return {store::Role::Query, m}; }
inline MeanKey part_key(Modality m) { return {store::Role::DocumentPart, m}; }

struct CalibrationMeans {
  std::size_t dimension = 0;
  std::map<MeanKey, Embedding> means;
  std::map<MeanKey, std::uint64_t> sample_counts;
  std::string profile;

  bool contains(const MeanKey& key) const { return means.count(key) != 0; }
  // Throws Error(MissingMean) naming the key.
  const Embedding& at(const MeanKey& key) const;
};

struct Normalized {
  Embedding embedding;
  bool degenerate = false;
};

// Unit L2 norm; vectors with norm < 1e-12 come back unchanged and flagged.
Normalized normalize(const Embedding& e);

struct CalibrationRecord {
  MeanKey key;
  Embedding embedding;
};

// Per-key arithmetic mean, accumulated in double in record order.
// Throws EmptyCalibrationSet or DimensionMismatch.
CalibrationMeans compute_means(std::span<const CalibrationRecord> records);

// e - means[key]. Throws MissingMean or DimensionMismatch.
Embedding remove_gap(const Embedding& e, const MeanKey& key, const CalibrationMeans& means);

struct GapEstimate {
  Embedding gap_vector;
  double magnitude = 0.0;
  // |cos| between the gap and the top principal direction of the pooled,
  // per-key centered samples. Only available when samples are supplied.
  std::optional<double> cosine_to_subspace;
};

GapEstimate estimate_gap(const CalibrationMeans& means, const MeanKey& a, const MeanKey& b);
GapEstimate estimate_gap(const CalibrationMeans& means, const MeanKey& a, const MeanKey& b,
                         std::span<const CalibrationRecord> samples);

// Power iteration on the scatter matrix of `rows` (already centered).
// Deterministic start vector; stops after `max_iter` or when the update moves
// less than `tol`.
std::vector<double> top_principal_direction(std::span<const Embedding* const> rows, std::size_t dim,
                                            int max_iter = 100, double tol = 1e-9);

struct CalibratedData {
  Corpus corpus;
  std::vector<Query> queries;
};

// Centers every query with its query mean and every document part with the
// part mean of its modality. Throws MissingMean naming the first absent key.
CalibratedData calibrate_corpus(const Corpus& corpus, const std::vector<Query>& queries,
                                const CalibrationMeans& means);

// Every record of a store becomes a calibration sample keyed by its role and
// modality. `keys`, when non-empty, filters the samples.
std::vector<CalibrationRecord> records_from_store(const store::StoreContents& contents, bool prenormalize,
                                                  std::span<const MeanKey> keys = {});

// Calibration samples drawn from an assembled corpus: query samples plus every
// document part.
std::vector<CalibrationRecord> records_from_corpus(const Corpus& corpus, const std::vector<Query>& queries);

// Means profile files are stores whose records are the mean vectors; the
// sidecar carries the sample count and profile name.
store::StoreContents means_to_store(const CalibrationMeans& means);
CalibrationMeans means_from_store(const store::StoreContents& contents);

// Replaces the query-role means of `base` with those of `queries_from`
// (dataset-specific query profiles).
CalibrationMeans with_query_means(const CalibrationMeans& base, const CalibrationMeans& queries_from);

}  // namespace mixsearch::calibration

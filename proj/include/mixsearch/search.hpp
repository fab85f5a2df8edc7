#pragma once

// Exact brute-force cosine top-k search.
//
// Ordering key per document: effective score descending, then a secondary
// score descending, then document id ascending (byte-wise lexicographic).
// The effective score is the cosine, or the override value for overridden
// documents. The secondary score equals the effective score, except for
// overrides with TieOrder::ByNativeScore, which keep the cosine there so
// overridden documents sink as a block while keeping their relative order.

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "mixsearch/calibration.hpp"
#include "mixsearch/core.hpp"
#include "mixsearch/fusion.hpp"

namespace mixsearch::search {

struct ScoredDoc {
  std::string doc_id;
  double score = 0.0;
  std::size_t rank = 0;

  friend bool operator==(const ScoredDoc&, const ScoredDoc&) = default;
};

enum class TieOrder { ById, ByNativeScore };

struct ScoreOverride {
  // Exactly one predicate is used: modality (document's modality set contains
  // it) when set, otherwise membership in `ids`.
  std::optional<Modality> modality;
  std::unordered_set<std::string> ids;
  double value = 0.0;
  TieOrder tie_order = TieOrder::ById;

  static ScoreOverride for_modality(Modality m, double value, TieOrder order = TieOrder::ById);
  static ScoreOverride for_ids(std::unordered_set<std::string> ids, double value, TieOrder order = TieOrder::ById);
  bool matches(const std::string& doc_id, const std::set<Modality>& modality_set) const;
};

// "modality=Screenshot:0" or "ids=@path:0" (one id per line in path).
ScoreOverride parse_override(std::string_view spec);

struct Cosine {
  double value = 0.0;
  bool degenerate = false;
};

// dot / (|a| |b|) in double; 0 and flagged if either norm < 1e-12.
// Throws DimensionMismatch.
Cosine cosine(const Embedding& a, const Embedding& b);

// One vector per document, row-major, with norms and id ranks precomputed.
class EmbeddedCorpus {
 public:
  explicit EmbeddedCorpus(std::size_t dimension);

  void add(std::string id, std::set<Modality> modality_set, std::span<const float> vector);
  // Recomputes norms and the lexicographic id ranking. Called by search when stale.
  void finalize();

  std::size_t size() const noexcept { return ids_.size(); }
  std::size_t dimension() const noexcept { return dimension_; }
  const std::string& id(std::size_t i) const { return ids_[i]; }
  const std::set<Modality>& modality_set(std::size_t i) const { return modalities_[i]; }
  std::span<const float> row(std::size_t i) const { return {rows_.data() + i * dimension_, dimension_}; }
  const float* data() const noexcept { return rows_.data(); }
  double norm(std::size_t i) const { return norms_[i]; }
  std::uint32_t id_rank(std::size_t i) const { return id_ranks_[i]; }
  bool finalized() const noexcept { return finalized_; }
  std::size_t degenerate_rows() const noexcept { return degenerate_rows_; }

 private:
  std::size_t dimension_;
  std::vector<std::string> ids_;
  std::vector<std::set<Modality>> modalities_;
  std::vector<float> rows_;
  std::vector<double> norms_;
  std::vector<std::uint32_t> id_ranks_;
  std::size_t degenerate_rows_ = 0;
  bool finalized_ = false;
};

// Per-document override resolution (first matching override wins).
struct ResolvedOverrides {
  std::vector<std::int32_t> which;  // -1: none
  std::vector<ScoreOverride> overrides;

  bool empty() const noexcept { return overrides.empty(); }
};

ResolvedOverrides resolve_overrides(const EmbeddedCorpus& corpus, std::span<const ScoreOverride> overrides);

struct SearchStats {
  bool degenerate_query = false;
};

// Top-min(k, N) documents. Throws EmptyCorpus, InvalidArgument (k == 0) or
// DimensionMismatch. `corpus` must be finalized.
std::vector<ScoredDoc> search_topk(const Query& query, const EmbeddedCorpus& corpus, std::size_t k,
                                   const ResolvedOverrides& overrides, SearchStats* stats = nullptr);
std::vector<ScoredDoc> search_topk(const Query& query, const EmbeddedCorpus& corpus, std::size_t k,
                                   std::span<const ScoreOverride> overrides = {});

struct QueryResult {
  std::string query_id;
  std::vector<ScoredDoc> docs;

  friend bool operator==(const QueryResult&, const QueryResult&) = default;
};

struct RunResult {
  std::vector<QueryResult> queries;
  std::size_t degenerate_vectors = 0;
};

struct RetrievalOptions {
  std::size_t k = 10;
  fusion::FusionSpec fusion;
  // Calibration is on iff means is non-null.
  const calibration::CalibrationMeans* means = nullptr;
  std::vector<ScoreOverride> overrides;
  bool prenormalize = true;
  unsigned threads = 0;
};

// Unimodal documents use their single part; multimodal ones are fused with
// `spec` (fuse_calibrated when means are given). Parts are L2-normalized first
// when `prenormalize` is set.
EmbeddedCorpus embed_corpus(const Corpus& corpus, const fusion::FusionSpec& spec,
                            const calibration::CalibrationMeans* means, bool prenormalize);
std::vector<Query> prepare_queries(const std::vector<Query>& queries, const calibration::CalibrationMeans* means,
                                   bool prenormalize);

// Results follow query input order regardless of thread count.
RunResult run_retrieval(const std::vector<Query>& queries, const Corpus& corpus, const RetrievalOptions& options);
RunResult run_retrieval(const std::vector<Query>& prepared_queries, const EmbeddedCorpus& corpus,
                        std::size_t k, std::span<const ScoreOverride> overrides, unsigned threads = 0);

// `query_id doc_id rank score run_tag` per line.
std::string format_run(const RunResult& run, std::string_view run_tag);
// Groups lines by query (first-appearance order) and sorts each by rank.
RunResult parse_run(std::string_view text);

}  // namespace mixsearch::search

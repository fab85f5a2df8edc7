#pragma once

// NDCG@K with exponential gain (2^rel - 1) and log2(i + 1) discount, ideal DCG
// truncated at K, and Recall@1. Unjudged documents have relevance 0; a query
// with no relevant judgments scores 0.

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "mixsearch/core.hpp"
#include "mixsearch/search.hpp"

namespace mixsearch::metrics {

double dcg_at_k(std::span<const int> ranked_relevances, std::size_t k);

double ndcg_at_k(std::span<const search::ScoredDoc> result, const Qrels::Judgments* judged, std::size_t k);

double recall_at_1(std::span<const search::ScoredDoc> result, const Qrels::Judgments* judged);

std::string ndcg_name(std::size_t k);
inline constexpr const char* kRecall1 = "recall@1";

struct MetricReport {
  std::vector<std::size_t> k_values;
  bool recall1 = true;
  // Metric names in column order: ndcg@K for each K, then recall@1.
  std::vector<std::string> metric_names;
  std::map<std::string, std::map<std::string, double>> per_query;
  std::map<std::string, double> aggregate;
};

// Every qrels query must appear in the run (QueryMissingFromRun otherwise).
// Run queries without judgments score 0.
MetricReport evaluate_run(const search::RunResult& run, const Qrels& qrels, std::span<const std::size_t> k_values,
                          bool recall1 = true);

// Long form `metric,k,query_id,value`; aggregate rows use query_id "all".
std::string format_report_csv(const MetricReport& report);
std::string format_report_table(const MetricReport& report);

}  // namespace mixsearch::metrics

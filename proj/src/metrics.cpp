#include "mixsearch/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>

#include "mixsearch/error.hpp"
#include "mixsearch/report.hpp"

namespace mixsearch::metrics {

namespace {

double gain(int rel) { return std::ldexp(1.0, rel) - 1.0; }

int relevance_of(const Qrels::Judgments* judged, const std::string& doc_id) {
  if (judged == nullptr) return 0;
  auto it = judged->find(doc_id);
  return it == judged->end() ? 0 : it->second;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

double dcg_at_k(std::span<const int> ranked_relevances, std::size_t k) {
  double dcg = 0.0;
  const std::size_t n = std::min(k, ranked_relevances.size());
  for (std::size_t i = 0; i < n; ++i) {
    dcg += gain(ranked_relevances[i]) / std::log2(static_cast<double>(i) + 2.0);
  }
  return dcg;
}

double ndcg_at_k(std::span<const search::ScoredDoc> result, const Qrels::Judgments* judged, std::size_t k) {
  if (judged == nullptr || judged->empty()) return 0.0;
  std::vector<int> ideal;
  ideal.reserve(judged->size());
  for (const auto& [d, g] : *judged) ideal.push_back(g);
  std::sort(ideal.begin(), ideal.end(), std::greater<>());
  const double idcg = dcg_at_k(ideal, k);
  if (idcg <= 0.0) return 0.0;
  std::vector<int> ranked;
  ranked.reserve(std::min(k, result.size()));
  for (std::size_t i = 0; i < result.size() && i < k; ++i) ranked.push_back(relevance_of(judged, result[i].doc_id));
  return dcg_at_k(ranked, k) / idcg;
}

double recall_at_1(std::span<const search::ScoredDoc> result, const Qrels::Judgments* judged) {
  if (result.empty()) return 0.0;
  return relevance_of(judged, result.front().doc_id) >= 1 ? 1.0 : 0.0;
}

std::string ndcg_name(std::size_t k) { return "ndcg@" + std::to_string(k); }

MetricReport evaluate_run(const search::RunResult& run, const Qrels& qrels, std::span<const std::size_t> k_values,
                          bool recall1) {
  MetricReport report;
  report.k_values.assign(k_values.begin(), k_values.end());
  report.recall1 = recall1;
  for (std::size_t k : k_values) {
    if (k == 0) throw Error(ErrorCode::InvalidArgument, "metric cutoff K must be >= 1");
    report.metric_names.push_back(ndcg_name(k));
  }
  if (recall1) report.metric_names.emplace_back(kRecall1);

  std::set<std::string> in_run;
  for (const search::QueryResult& q : run.queries) {
    if (!in_run.insert(q.query_id).second) {
      throw Error(ErrorCode::InvalidArgument, "query '" + q.query_id + "' appears twice in the run");
    }
    std::set<std::string_view> docs;
    for (const search::ScoredDoc& d : q.docs) {
      if (!docs.insert(d.doc_id).second) {
        throw Error(ErrorCode::InvalidArgument, "document '" + d.doc_id + "' ranked twice for '" + q.query_id + "'");
      }
    }
  }
  for (const auto& [qid, judged] : qrels.all()) {
    if (!in_run.count(qid)) throw Error(ErrorCode::QueryMissingFromRun, "query '" + qid + "' has no results");
  }

  for (const std::string& name : report.metric_names) report.aggregate[name] = 0.0;
  for (const search::QueryResult& q : run.queries) {
    const Qrels::Judgments* judged = qrels.judged(q.query_id);
    auto& row = report.per_query[q.query_id];
    for (std::size_t k : k_values) row[ndcg_name(k)] = ndcg_at_k(q.docs, judged, k);
    if (recall1) row[kRecall1] = recall_at_1(q.docs, judged);
  }
  // Summed in run order for reproducible aggregates.
  for (const search::QueryResult& q : run.queries) {
    for (const auto& [name, v] : report.per_query[q.query_id]) report.aggregate[name] += v;
  }
  if (!run.queries.empty()) {
    for (auto& [name, v] : report.aggregate) v /= static_cast<double>(run.queries.size());
  }
  return report;
}

std::string format_report_csv(const MetricReport& report) {
  std::string out = "metric,k,query_id,value\n";
  auto emit = [&](const std::string& name, const std::string& qid, double v) {
    const auto at = name.find('@');
    out += name.substr(0, at);
    out += ',';
    out += name.substr(at + 1);
    out += ',';
    out += ::mixsearch::report::csv_field(qid);
    out += ',';
    out += fmt(v);
    out += '\n';
  };
  for (const std::string& name : report.metric_names) {
    for (const auto& [qid, row] : report.per_query) emit(name, qid, row.at(name));
  }
  for (const std::string& name : report.metric_names) emit(name, "all", report.aggregate.at(name));
  return out;
}

std::string format_report_table(const MetricReport& report) {
  std::string out;
  char buf[96];
  std::snprintf(buf, sizeof buf, "%-12s %10s\n", "metric", "mean");
  out += buf;
  for (const std::string& name : report.metric_names) {
    std::snprintf(buf, sizeof buf, "%-12s %10.6f\n", name.c_str(), report.aggregate.at(name));
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "queries      %10zu\n", report.per_query.size());
  out += buf;
  return out;
}

}  // namespace mixsearch::metrics

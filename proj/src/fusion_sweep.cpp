#include "mixsearch/fusion_sweep.hpp"

#include <algorithm>

#include "mixsearch/error.hpp"
#include "mixsearch/metrics.hpp"
#include "mixsearch/search.hpp"

namespace mixsearch::fusion {

report::SweepTable alpha_sweep(const Corpus& corpus, const std::vector<Query>& queries, const Qrels& qrels,
                               std::span<const double> grid, const calibration::CalibrationMeans* means,
                               const SweepOptions& options) {
  report::SweepTable table;
  table.x_name = "alpha";
  if (options.k_values.empty()) throw Error(ErrorCode::InvalidArgument, "no metric cutoffs given");
  const std::size_t k = *std::max_element(options.k_values.begin(), options.k_values.end());
  const std::vector<Query> prepared = search::prepare_queries(queries, means, options.prenormalize);
  for (double alpha : grid) {
    FusionSpec spec{alpha, options.text_modality, options.other_modality, options.renormalize_centered};
    spec.validate();
    const search::EmbeddedCorpus embedded = search::embed_corpus(corpus, spec, means, options.prenormalize);
    const search::RunResult run = search::run_retrieval(prepared, embedded, k, {}, options.threads);
    table.rows.push_back({alpha, metrics::evaluate_run(run, qrels, options.k_values, options.recall1)});
  }
  return table;
}

}  // namespace mixsearch::fusion

#include "mixsearch/corpusops.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mixsearch/error.hpp"
#include "mixsearch/random.hpp"

namespace mixsearch::corpusops {

namespace {

const Embedding& require_part(const Document& doc, Modality m) {
  const Embedding* e = doc.part(m);
  if (e == nullptr) {
    throw Error(ErrorCode::MissingPart,
                "document '" + doc.id + "' has no " + std::string(modality_name(m)) + " part");
  }
  return *e;
}

std::size_t max_k(const ExperimentOptions& options) {
  if (options.k_values.empty()) throw Error(ErrorCode::InvalidArgument, "no metric cutoffs given");
  return *std::max_element(options.k_values.begin(), options.k_values.end());
}

}  // namespace

std::string_view replacement_mode_name(ReplacementMode m) {
  return m == ReplacementMode::Bernoulli ? "bernoulli" : "exact";
}

ReplacementMode parse_replacement_mode(std::string_view s) {
  if (s == "bernoulli") return ReplacementMode::Bernoulli;
  if (s == "exact" || s == "exact-count") return ReplacementMode::ExactCount;
  throw Error(ErrorCode::ParseError, "unknown replacement mode '" + std::string(s) + "'");
}

void ReplacementPlan::validate() const {
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::InvalidArgument, "p must lie in [0, 1]");
  if (source_modality == target_modality) {
    throw Error(ErrorCode::InvalidArgument, "source and target modality must differ");
  }
}

std::vector<double> uniform_draws(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> u(n);
  for (double& x : u) x = rng.uniform();
  return u;
}

std::vector<bool> replacement_mask(std::span<const double> draws, double p, ReplacementMode mode) {
  std::vector<bool> mask(draws.size(), false);
  if (mode == ReplacementMode::Bernoulli) {
    for (std::size_t i = 0; i < draws.size(); ++i) mask[i] = draws[i] < p;
    return mask;
  }
  // The epsilon keeps floor(0.3 * 10) at 3 despite 0.3 * 10 < 3 in binary.
  const auto count = std::min<std::size_t>(
      draws.size(), static_cast<std::size_t>(std::floor(p * static_cast<double>(draws.size()) + 1e-9)));
  std::vector<std::size_t> order(draws.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return draws[a] < draws[b]; });
  for (std::size_t i = 0; i < count; ++i) mask[order[i]] = true;
  return mask;
}

Replaced apply_replacement(const Corpus& paired, const ReplacementPlan& plan) {
  plan.validate();
  const std::vector<double> draws = uniform_draws(paired.size(), plan.seed);
  Replaced out;
  out.mask = replacement_mask(draws, plan.p, plan.mode);
  out.corpus.dimension = paired.dimension;
  out.corpus.documents.reserve(paired.size());
  for (std::size_t i = 0; i < paired.size(); ++i) {
    const Document& doc = paired.documents[i];
    const Embedding& source = require_part(doc, plan.source_modality);
    const Embedding& target = require_part(doc, plan.target_modality);
    if (out.mask[i]) {
      out.corpus.documents.push_back(Document::from_parts(doc.id, {{plan.target_modality, target}}));
      out.replaced_ids.push_back(doc.id);
    } else {
      out.corpus.documents.push_back(Document::from_parts(doc.id, {{plan.source_modality, source}}));
    }
  }
  return out;
}

std::string_view mix_shape_name(MixShape s) {
  switch (s) {
    case MixShape::TextOnly: return "text";
    case MixShape::ImageOnly: return "image";
    case MixShape::Multimodal: return "multimodal";
  }
  return "?";
}

void MixPlan::validate() const {
  double sum = 0.0;
  for (double r : ratios) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw Error(ErrorCode::InvalidArgument, "mix ratios must be non-negative");
    sum += r;
  }
  if (!(sum > 0.0)) throw Error(ErrorCode::InvalidArgument, "mix ratios must not all be zero");
  if (text_modality == image_modality) throw Error(ErrorCode::InvalidArgument, "mix modalities must differ");
}

std::array<double, 3> parse_ratios(std::string_view s) {
  std::array<double, 3> out{};
  std::size_t idx = 0;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(':', start);
    const std::string field(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (idx >= 3) throw Error(ErrorCode::ParseError, "ratios '" + std::string(s) + "' need exactly three fields");
    try {
      std::size_t used = 0;
      out[idx] = std::stod(field, &used);
      if (used != field.size()) throw std::invalid_argument(field);
    } catch (const std::exception&) {
      throw Error(ErrorCode::ParseError, "ratio '" + field + "' is not a number");
    }
    ++idx;
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  if (idx != 3) throw Error(ErrorCode::ParseError, "ratios '" + std::string(s) + "' need exactly three fields");
  return out;
}

std::array<std::size_t, 3> mix_counts(std::size_t n, const std::array<double, 3>& ratios) {
  const double sum = ratios[0] + ratios[1] + ratios[2];
  std::array<std::size_t, 3> counts{};
  std::array<double, 3> remainder{};
  std::size_t assigned = 0;
  for (std::size_t s = 0; s < 3; ++s) {
    const double exact = static_cast<double>(n) * ratios[s] / sum;
    counts[s] = static_cast<std::size_t>(std::floor(exact));
    remainder[s] = exact - static_cast<double>(counts[s]);
    assigned += counts[s];
  }
  std::array<std::size_t, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t i = 0; assigned < n; ++i, ++assigned) ++counts[order[i % 3]];
  return counts;
}

Mixed apply_mix(const Corpus& paired, const MixPlan& plan) {
  plan.validate();
  const std::size_t n = paired.size();
  for (const Document& doc : paired.documents) {
    require_part(doc, plan.text_modality);
    require_part(doc, plan.image_modality);
  }
  const std::array<std::size_t, 3> counts = mix_counts(n, plan.ratios);

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(plan.seed);
  for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);

  Mixed out;
  out.shapes.resize(n);
  std::size_t cursor = 0;
  for (std::size_t s = 0; s < 3; ++s) {
    for (std::size_t c = 0; c < counts[s]; ++c) out.shapes[perm[cursor++]] = static_cast<MixShape>(s);
  }
  out.corpus.dimension = paired.dimension;
  out.corpus.documents.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Document& doc = paired.documents[i];
    std::map<Modality, Embedding> parts;
    if (out.shapes[i] != MixShape::ImageOnly) parts.emplace(plan.text_modality, *doc.part(plan.text_modality));
    if (out.shapes[i] != MixShape::TextOnly) parts.emplace(plan.image_modality, *doc.part(plan.image_modality));
    out.corpus.documents.push_back(Document::from_parts(doc.id, std::move(parts)));
  }
  return out;
}

metrics::MetricReport pushdown_simulation(const std::vector<Query>& queries, const Corpus& corpus,
                                          const std::vector<bool>& mask, const Qrels& qrels,
                                          const ExperimentOptions& options, search::TieOrder tie_order) {
  if (mask.size() != corpus.size()) {
    throw Error(ErrorCode::InvalidArgument, "mask covers " + std::to_string(mask.size()) + " documents, corpus has " +
                                                std::to_string(corpus.size()));
  }
  search::RetrievalOptions ro;
  ro.k = max_k(options);
  ro.prenormalize = options.prenormalize;
  ro.threads = options.threads;
  std::unordered_set<std::string> ids;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) ids.insert(corpus.documents[i].id);
  }
  if (!ids.empty()) ro.overrides.push_back(search::ScoreOverride::for_ids(std::move(ids), 0.0, tie_order));
  const search::RunResult run = search::run_retrieval(queries, corpus, ro);
  return metrics::evaluate_run(run, qrels, options.k_values, options.recall1);
}

report::SweepTable p_sweep(const Corpus& paired, const std::vector<Query>& queries, const Qrels& qrels,
                           std::span<const double> grid, const ReplacementPlan& plan,
                           const calibration::CalibrationMeans* means, const ExperimentOptions& options) {
  report::SweepTable table;
  table.x_name = "p";
  const std::size_t k = max_k(options);
  const std::vector<Query> prepared = search::prepare_queries(queries, means, options.prenormalize);
  for (double p : grid) {
    ReplacementPlan at = plan;
    at.p = p;
    const Replaced replaced = apply_replacement(paired, at);
    const search::EmbeddedCorpus embedded =
        search::embed_corpus(replaced.corpus, fusion::FusionSpec{}, means, options.prenormalize);
    const search::RunResult run = search::run_retrieval(prepared, embedded, k, {}, options.threads);
    table.rows.push_back({p, metrics::evaluate_run(run, qrels, options.k_values, options.recall1)});
  }
  return table;
}

report::SweepTable pushdown_sweep(const Corpus& paired, const std::vector<Query>& queries, const Qrels& qrels,
                                  std::span<const double> grid, const ReplacementPlan& plan,
                                  const ExperimentOptions& options, search::TieOrder tie_order) {
  report::SweepTable table;
  table.x_name = "p";
  for (double p : grid) {
    ReplacementPlan at = plan;
    at.p = p;
    const Replaced replaced = apply_replacement(paired, at);
    table.rows.push_back(
        {p, pushdown_simulation(queries, replaced.corpus, replaced.mask, qrels, options, tie_order)});
  }
  return table;
}

}  // namespace mixsearch::corpusops

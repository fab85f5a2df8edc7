#include "mixsearch/search.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "mixsearch/error.hpp"
#include "mixsearch/io.hpp"
#include "mixsearch/kernels.hpp"
#include "mixsearch/parallel.hpp"

namespace mixsearch::search {

namespace {

constexpr double kDegenerate = calibration::kDegenerateNorm;

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_double(const std::string& s, std::string_view what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::ParseError, std::string(what) + " '" + s + "' is not a number");
  }
}

}  // namespace

ScoreOverride ScoreOverride::for_modality(Modality m, double value, TieOrder order) {
  ScoreOverride o;
  o.modality = m;
  o.value = value;
  o.tie_order = order;
  return o;
}

ScoreOverride ScoreOverride::for_ids(std::unordered_set<std::string> ids, double value, TieOrder order) {
  ScoreOverride o;
  o.ids = std::move(ids);
  o.value = value;
  o.tie_order = order;
  return o;
}

bool ScoreOverride::matches(const std::string& doc_id, const std::set<Modality>& modality_set) const {
  if (modality) return modality_set.count(*modality) != 0;
  return ids.count(doc_id) != 0;
}

ScoreOverride parse_override(std::string_view spec) {
  const auto eq = spec.find('=');
  if (eq == std::string_view::npos) {
    throw Error(ErrorCode::ParseError, "override '" + std::string(spec) + "' must be kind=target:value");
  }
  const std::string kind(spec.substr(0, eq));
  auto fields = split(spec.substr(eq + 1), ':');
  if (fields.size() < 2 || fields.size() > 3) {
    throw Error(ErrorCode::ParseError, "override '" + std::string(spec) + "' must be kind=target:value[:pushdown]");
  }
  TieOrder order = TieOrder::ById;
  if (fields.size() == 3) {
    if (fields[2] != "pushdown") throw Error(ErrorCode::ParseError, "unknown override flag '" + fields[2] + "'");
    order = TieOrder::ByNativeScore;
  }
  const double value = parse_double(fields[1], "override value");
  if (!std::isfinite(value)) throw Error(ErrorCode::ParseError, "override value must be finite");
  if (kind == "modality") return ScoreOverride::for_modality(modality_from_string(fields[0]), value, order);
  if (kind == "ids") {
    std::unordered_set<std::string> ids;
    if (!fields[0].empty() && fields[0][0] == '@') {
      // First token of each line; the rest of the line is ignored.
      std::istringstream in(io::read_file(fields[0].substr(1)));
      std::string line;
      while (std::getline(in, line)) {
        std::istringstream tok(line);
        std::string id;
        if (tok >> id && id[0] != '#') ids.insert(id);
      }
    } else {
      for (auto& id : split(fields[0], ',')) {
        if (!id.empty()) ids.insert(id);
      }
    }
    return ScoreOverride::for_ids(std::move(ids), value, order);
  }
  throw Error(ErrorCode::ParseError, "unknown override kind '" + kind + "'");
}

Cosine cosine(const Embedding& a, const Embedding& b) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                "cosine of dimensions " + std::to_string(a.dim()) + " and " + std::to_string(b.dim()));
  }
  const auto& k = kernels::active();
  const double na = std::sqrt(k.dot(a.data(), a.data(), a.dim()));
  const double nb = std::sqrt(k.dot(b.data(), b.data(), b.dim()));
  if (!(na >= kDegenerate) || !(nb >= kDegenerate)) return {0.0, true};
  const double c = k.dot(a.data(), b.data(), a.dim()) / (na * nb);
  if (!std::isfinite(c)) return {0.0, true};
  return {c, false};
}

EmbeddedCorpus::EmbeddedCorpus(std::size_t dimension) : dimension_(dimension) {
  if (dimension == 0) throw Error(ErrorCode::InvalidArgument, "corpus dimension must be >= 1");
}

void EmbeddedCorpus::add(std::string id, std::set<Modality> modality_set, std::span<const float> vector) {
  if (vector.size() != dimension_) {
    throw Error(ErrorCode::DimensionMismatch, "document '" + id + "' has dimension " + std::to_string(vector.size()));
  }
  ids_.push_back(std::move(id));
  modalities_.push_back(std::move(modality_set));
  rows_.insert(rows_.end(), vector.begin(), vector.end());
  finalized_ = false;
}

void EmbeddedCorpus::finalize() {
  const auto& k = kernels::active();
  norms_.resize(ids_.size());
  degenerate_rows_ = 0;
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    const float* r = rows_.data() + i * dimension_;
    norms_[i] = std::sqrt(k.dot(r, r, dimension_));
    if (!(norms_[i] >= kDegenerate)) ++degenerate_rows_;
  }
  std::vector<std::uint32_t> order(ids_.size());
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    return ids_[a] != ids_[b] ? ids_[a] < ids_[b] : a < b;
  });
  id_ranks_.resize(ids_.size());
  for (std::uint32_t r = 0; r < order.size(); ++r) id_ranks_[order[r]] = r;
  finalized_ = true;
}

ResolvedOverrides resolve_overrides(const EmbeddedCorpus& corpus, std::span<const ScoreOverride> overrides) {
  ResolvedOverrides out;
  out.overrides.assign(overrides.begin(), overrides.end());
  if (overrides.empty()) return out;
  out.which.assign(corpus.size(), -1);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    for (std::size_t o = 0; o < overrides.size(); ++o) {
      if (overrides[o].matches(corpus.id(i), corpus.modality_set(i))) {
        out.which[i] = static_cast<std::int32_t>(o);
        break;
      }
    }
  }
  return out;
}

std::vector<ScoredDoc> search_topk(const Query& query, const EmbeddedCorpus& corpus, std::size_t k,
                                   const ResolvedOverrides& overrides, SearchStats* stats) {
  if (corpus.size() == 0) throw Error(ErrorCode::EmptyCorpus, "cannot search an empty corpus");
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "k must be >= 1");
  if (!corpus.finalized()) throw Error(ErrorCode::InvalidArgument, "corpus not finalized");
  if (query.embedding.dim() != corpus.dimension()) {
    throw Error(ErrorCode::DimensionMismatch, "query '" + query.id + "' has dimension " +
                                                  std::to_string(query.embedding.dim()) + ", corpus has " +
                                                  std::to_string(corpus.dimension()));
  }
  const std::size_t n = corpus.size();
  const auto& kern = kernels::active();

  std::vector<double> effective(n);
  kern.dot_rows(query.embedding.data(), corpus.data(), n, corpus.dimension(), effective.data());
  const double qnorm = std::sqrt(kern.dot(query.embedding.data(), query.embedding.data(), query.embedding.dim()));
  const bool degenerate_query = !(qnorm >= kDegenerate);
  if (stats) stats->degenerate_query = degenerate_query;
  for (std::size_t i = 0; i < n; ++i) {
    const double dn = corpus.norm(i);
    double s = 0.0;
    if (!degenerate_query && dn >= kDegenerate) {
      s = effective[i] / (qnorm * dn);
      if (!std::isfinite(s)) s = 0.0;
    }
    effective[i] = s;
  }
  std::vector<double> secondary = effective;
  if (!overrides.empty()) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::int32_t o = overrides.which[i];
      if (o < 0) continue;
      const ScoreOverride& ov = overrides.overrides[static_cast<std::size_t>(o)];
      effective[i] = ov.value;
      if (ov.tie_order == TieOrder::ById) secondary[i] = ov.value;
    }
  }

  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  const auto before = [&](std::uint32_t a, std::uint32_t b) {
    if (effective[a] != effective[b]) return effective[a] > effective[b];
    if (secondary[a] != secondary[b]) return secondary[a] > secondary[b];
    return corpus.id_rank(a) < corpus.id_rank(b);
  };
  const std::size_t top = std::min(k, n);
  if (top < n) {
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(top), order.end(), before);
  } else {
    std::sort(order.begin(), order.end(), before);
  }

  std::vector<ScoredDoc> out;
  out.reserve(top);
  for (std::size_t r = 0; r < top; ++r) out.push_back({corpus.id(order[r]), effective[order[r]], r + 1});
  return out;
}

std::vector<ScoredDoc> search_topk(const Query& query, const EmbeddedCorpus& corpus, std::size_t k,
                                   std::span<const ScoreOverride> overrides) {
  return search_topk(query, corpus, k, resolve_overrides(corpus, overrides));
}

EmbeddedCorpus embed_corpus(const Corpus& corpus, const fusion::FusionSpec& spec,
                            const calibration::CalibrationMeans* means, bool prenormalize) {
  EmbeddedCorpus out(corpus.dimension);
  for (const Document& doc : corpus.documents) {
    Document prepared{doc.id, {}, doc.modality_set};
    for (const auto& [m, e] : doc.parts) {
      prepared.parts.emplace(m, prenormalize ? calibration::normalize(e).embedding : e);
    }
    Embedding v;
    if (prepared.parts.size() == 1) {
      const auto& [m, e] = *prepared.parts.begin();
      v = means ? calibration::remove_gap(e, calibration::part_key(m), *means) : e;
    } else if (prepared.parts.size() == 2) {
      v = means ? fusion::fuse_calibrated(prepared, spec, *means) : fusion::fuse_raw(prepared, spec);
    } else if (prepared.parts.empty()) {
      throw Error(ErrorCode::MissingPart, "document '" + doc.id + "' has no parts");
    } else {
      throw Error(ErrorCode::InvalidArgument, "document '" + doc.id + "' has more than two parts");
    }
    out.add(doc.id, doc.modality_set, v.values());
  }
  out.finalize();
  return out;
}

std::vector<Query> prepare_queries(const std::vector<Query>& queries, const calibration::CalibrationMeans* means,
                                   bool prenormalize) {
  std::vector<Query> out;
  out.reserve(queries.size());
  for (const Query& q : queries) {
    Embedding e = prenormalize ? calibration::normalize(q.embedding).embedding : q.embedding;
    if (means) e = calibration::remove_gap(e, calibration::query_key(q.modality), *means);
    out.push_back({q.id, std::move(e), q.modality});
  }
  return out;
}

RunResult run_retrieval(const std::vector<Query>& prepared_queries, const EmbeddedCorpus& corpus, std::size_t k,
                        std::span<const ScoreOverride> overrides, unsigned threads) {
  const ResolvedOverrides resolved = resolve_overrides(corpus, overrides);
  RunResult run;
  run.queries.resize(prepared_queries.size());
  std::vector<char> degenerate(prepared_queries.size(), 0);
  parallel_for(prepared_queries.size(), threads, [&](std::size_t i) {
    SearchStats stats;
    run.queries[i] = {prepared_queries[i].id, search_topk(prepared_queries[i], corpus, k, resolved, &stats)};
    degenerate[i] = stats.degenerate_query ? 1 : 0;
  });
  run.degenerate_vectors = corpus.degenerate_rows() +
                           static_cast<std::size_t>(std::count(degenerate.begin(), degenerate.end(), 1));
  return run;
}

RunResult run_retrieval(const std::vector<Query>& queries, const Corpus& corpus, const RetrievalOptions& options) {
  options.fusion.validate();
  const EmbeddedCorpus embedded = embed_corpus(corpus, options.fusion, options.means, options.prenormalize);
  const std::vector<Query> prepared = prepare_queries(queries, options.means, options.prenormalize);
  return run_retrieval(prepared, embedded, options.k, options.overrides, options.threads);
}

std::string format_run(const RunResult& run, std::string_view run_tag) {
  std::string out;
  char buf[64];
  for (const QueryResult& q : run.queries) {
    for (const ScoredDoc& d : q.docs) {
      std::snprintf(buf, sizeof buf, " %zu %.9g ", d.rank, d.score);
      out += q.query_id;
      out += ' ';
      out += d.doc_id;
      out += buf;
      out += run_tag;
      out += '\n';
    }
  }
  return out;
}

RunResult parse_run(std::string_view text) {
  RunResult run;
  std::unordered_map<std::string, std::size_t> index;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream fields(line);
    std::string qid, did, score, tag;
    std::size_t rank = 0;
    if (!(fields >> qid)) continue;
    if (qid[0] == '#') continue;
    if (!(fields >> did >> rank >> score)) {
      throw Error(ErrorCode::ParseError, "run line " + std::to_string(lineno) + " is not 'qid docid rank score tag'");
    }
    auto [it, inserted] = index.emplace(qid, run.queries.size());
    if (inserted) run.queries.push_back({qid, {}});
    run.queries[it->second].docs.push_back({did, parse_double(score, "score"), rank});
  }
  for (QueryResult& q : run.queries) {
    std::stable_sort(q.docs.begin(), q.docs.end(),
                     [](const ScoredDoc& a, const ScoredDoc& b) { return a.rank < b.rank; });
  }
  return run;
}

}  // namespace mixsearch::search

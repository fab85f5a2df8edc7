#include "mixsearch/calibration.hpp"

#include <algorithm>
#include <cmath>

#include "mixsearch/error.hpp"
#include "mixsearch/kernels.hpp"

namespace mixsearch::calibration {

namespace {

void check_dim(const Embedding& e, std::size_t dim, const std::string& what) {
  if (e.dim() != dim) {
    throw Error(ErrorCode::DimensionMismatch,
                what + " has dimension " + std::to_string(e.dim()) + ", expected " + std::to_string(dim));
  }
}

Embedding subtract(const Embedding& a, const Embedding& b) {
  Embedding out(a.dim());
  kernels::active().subtract(out.data(), a.data(), b.data(), a.dim());
  return out;
}

}  // namespace

std::string to_string(const MeanKey& key) {
  return std::string(store::role_name(key.role)) + ":" + std::string(modality_name(key.modality));
}

MeanKey parse_mean_key(std::string_view s) {
  const auto colon = s.find(':');
  if (colon == std::string_view::npos) {
    throw Error(ErrorCode::ParseError, "mean key '" + std::string(s) + "' must look like role:modality");
  }
  return {store::role_from_string(s.substr(0, colon)), modality_from_string(s.substr(colon + 1))};
}

const Embedding& CalibrationMeans::at(const MeanKey& key) const {
  auto it = means.find(key);
  if (it == means.end()) throw Error(ErrorCode::MissingMean, to_string(key));
  return it->second;
}

Normalized normalize(const Embedding& e) {
  const double norm = std::sqrt(kernels::active().dot(e.data(), e.data(), e.dim()));
  if (!(norm >= kDegenerateNorm)) return {e, true};
  Embedding out(e.dim());
  for (std::size_t j = 0; j < e.dim(); ++j) out[j] = static_cast<float>(static_cast<double>(e[j]) / norm);
  return {std::move(out), false};
}

CalibrationMeans compute_means(std::span<const CalibrationRecord> records) {
  if (records.empty()) throw Error(ErrorCode::EmptyCalibrationSet, "no calibration records");
  CalibrationMeans out;
  out.dimension = records.front().embedding.dim();
  std::map<MeanKey, std::vector<double>> sums;
  const auto& k = kernels::active();
  for (const CalibrationRecord& r : records) {
    check_dim(r.embedding, out.dimension, "calibration record for " + to_string(r.key));
    auto& acc = sums[r.key];
    if (acc.empty()) acc.assign(out.dimension, 0.0);
    k.accumulate(acc.data(), r.embedding.data(), out.dimension);
    ++out.sample_counts[r.key];
  }
  for (const auto& [key, acc] : sums) {
    const double n = static_cast<double>(out.sample_counts[key]);
    Embedding mean(out.dimension);
    for (std::size_t j = 0; j < out.dimension; ++j) mean[j] = static_cast<float>(acc[j] / n);
    out.means.emplace(key, std::move(mean));
  }
  return out;
}

Embedding remove_gap(const Embedding& e, const MeanKey& key, const CalibrationMeans& means) {
  const Embedding& mean = means.at(key);
  check_dim(e, mean.dim(), "embedding");
  return subtract(e, mean);
}

GapEstimate estimate_gap(const CalibrationMeans& means, const MeanKey& a, const MeanKey& b) {
  const Embedding& ma = means.at(a);
  const Embedding& mb = means.at(b);
  GapEstimate g;
  g.gap_vector = subtract(ma, mb);
  g.magnitude = std::sqrt(kernels::active().dot(g.gap_vector.data(), g.gap_vector.data(), g.gap_vector.dim()));
  return g;
}

GapEstimate estimate_gap(const CalibrationMeans& means, const MeanKey& a, const MeanKey& b,
                         std::span<const CalibrationRecord> samples) {
  GapEstimate g = estimate_gap(means, a, b);
  std::vector<Embedding> centered;
  for (const CalibrationRecord& r : samples) {
    if (r.key == a || r.key == b) centered.push_back(remove_gap(r.embedding, r.key, means));
  }
  if (centered.empty() || g.magnitude < kDegenerateNorm) return g;
  std::vector<const Embedding*> rows;
  rows.reserve(centered.size());
  for (const Embedding& e : centered) rows.push_back(&e);
  const std::vector<double> pc = top_principal_direction(rows, means.dimension);
  double dot = 0.0;
  for (std::size_t j = 0; j < pc.size(); ++j) dot += pc[j] * static_cast<double>(g.gap_vector[j]);
  g.cosine_to_subspace = std::min(1.0, std::abs(dot) / g.magnitude);
  return g;
}

std::vector<double> top_principal_direction(std::span<const Embedding* const> rows, std::size_t dim,
                                            int max_iter, double tol) {
  std::vector<double> v(dim, 1.0 / std::sqrt(static_cast<double>(dim)));
  std::vector<double> w(dim);
  for (int it = 0; it < max_iter; ++it) {
    std::fill(w.begin(), w.end(), 0.0);
    for (const Embedding* x : rows) {
      double proj = 0.0;
      for (std::size_t j = 0; j < dim; ++j) proj += static_cast<double>((*x)[j]) * v[j];
      for (std::size_t j = 0; j < dim; ++j) w[j] += proj * static_cast<double>((*x)[j]);
    }
    double norm = 0.0;
    for (double x : w) norm += x * x;
    norm = std::sqrt(norm);
    if (norm < kDegenerateNorm) break;
    double delta = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
      w[j] /= norm;
      delta += (w[j] - v[j]) * (w[j] - v[j]);
    }
    v.swap(w);
    if (std::sqrt(delta) < tol) break;
  }
  return v;
}

CalibratedData calibrate_corpus(const Corpus& corpus, const std::vector<Query>& queries,
                                const CalibrationMeans& means) {
  CalibratedData out;
  out.corpus.dimension = corpus.dimension;
  out.corpus.documents.reserve(corpus.documents.size());
  for (const Document& doc : corpus.documents) {
    Document centered{doc.id, {}, doc.modality_set};
    for (const auto& [m, e] : doc.parts) centered.parts.emplace(m, remove_gap(e, part_key(m), means));
    out.corpus.documents.push_back(std::move(centered));
  }
  out.queries.reserve(queries.size());
  for (const Query& q : queries) {
    out.queries.push_back({q.id, remove_gap(q.embedding, query_key(q.modality), means), q.modality});
  }
  return out;
}

std::vector<CalibrationRecord> records_from_store(const store::StoreContents& contents, bool prenormalize,
                                                  std::span<const MeanKey> keys) {
  std::vector<CalibrationRecord> out;
  out.reserve(contents.records.size());
  for (const store::Record& r : contents.records) {
    const MeanKey key{r.meta.role, r.meta.modality};
    if (!keys.empty() && std::find(keys.begin(), keys.end(), key) == keys.end()) continue;
    out.push_back({key, prenormalize ? normalize(r.embedding).embedding : r.embedding});
  }
  return out;
}

std::vector<CalibrationRecord> records_from_corpus(const Corpus& corpus, const std::vector<Query>& queries) {
  std::vector<CalibrationRecord> out;
  for (const Query& q : queries) out.push_back({query_key(q.modality), q.embedding});
  for (const Document& d : corpus.documents) {
    for (const auto& [m, e] : d.parts) out.push_back({part_key(m), e});
  }
  return out;
}

store::StoreContents means_to_store(const CalibrationMeans& means) {
  store::StoreContents out;
  out.dimension = static_cast<std::uint32_t>(means.dimension);
  for (const auto& [key, mean] : means.means) {
    store::RecordMeta meta;
    meta.id = "mean:" + to_string(key);
    meta.role = key.role;
    meta.modality = key.modality;
    auto c = means.sample_counts.find(key);
    meta.count = c == means.sample_counts.end() ? 1 : c->second;
    if (!means.profile.empty()) meta.profile = means.profile;
    out.records.push_back({std::move(meta), mean});
  }
  return out;
}

CalibrationMeans means_from_store(const store::StoreContents& contents) {
  CalibrationMeans out;
  out.dimension = contents.dimension;
  for (const store::Record& r : contents.records) {
    const MeanKey key{r.meta.role, r.meta.modality};
    if (!out.means.emplace(key, r.embedding).second) {
      throw Error(ErrorCode::DuplicateId, "means profile has two entries for " + to_string(key));
    }
    const std::uint64_t count = r.meta.count.value_or(1);
    if (count == 0) throw Error(ErrorCode::ParseError, "sample count 0 for " + to_string(key));
    out.sample_counts[key] = count;
    if (r.meta.profile && out.profile.empty()) out.profile = *r.meta.profile;
  }
  return out;
}

CalibrationMeans with_query_means(const CalibrationMeans& base, const CalibrationMeans& queries_from) {
  if (base.dimension != queries_from.dimension) {
    throw Error(ErrorCode::DimensionMismatch, "query profile dimension differs from base profile");
  }
  CalibrationMeans out = base;
  for (const auto& [key, mean] : queries_from.means) {
    if (key.role != store::Role::Query) continue;
    out.means[key] = mean;
    out.sample_counts[key] = queries_from.sample_counts.at(key);
  }
  return out;
}

}  // namespace mixsearch::calibration

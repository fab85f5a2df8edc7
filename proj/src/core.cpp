#include "mixsearch/core.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <unordered_set>

#include "mixsearch/error.hpp"

namespace mixsearch {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::DuplicatePart: return "DuplicatePart";
    case ErrorCode::MissingPart: return "MissingPart";
    case ErrorCode::MissingMean: return "MissingMean";
    case ErrorCode::EmptyCalibrationSet: return "EmptyCalibrationSet";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::QueryMissingFromRun: return "QueryMissingFromRun";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::UnsupportedDtype: return "UnsupportedDtype";
    case ErrorCode::Truncated: return "Truncated";
    case ErrorCode::MetaMismatch: return "MetaMismatch";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::Io: return "IoError";
  }
  return "Unknown";
}

std::string_view modality_name(Modality m) {
  switch (m) {
    case Modality::Text: return "text";
    case Modality::Image: return "image";
    case Modality::Screenshot: return "screenshot";
    case Modality::Audio: return "audio";
    case Modality::Video: return "video";
  }
  return "unknown";
}

std::optional<Modality> parse_modality(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (Modality m : kAllModalities) {
    if (modality_name(m) == lower) return m;
  }
  return std::nullopt;
}

Modality modality_from_string(std::string_view name) {
  if (auto m = parse_modality(name)) return *m;
  throw Error(ErrorCode::ParseError, "unknown modality '" + std::string(name) + "'");
}

bool Embedding::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](float v) { return std::isfinite(v); });
}

const Embedding* Document::part(Modality m) const {
  auto it = parts.find(m);
  return it == parts.end() ? nullptr : &it->second;
}

Document Document::from_parts(std::string id, std::map<Modality, Embedding> parts) {
  Document doc{std::move(id), std::move(parts), {}};
  for (const auto& [m, e] : doc.parts) doc.modality_set.insert(m);
  return doc;
}

std::vector<Violation> validate_corpus(const Corpus& corpus) {
  std::vector<Violation> report;
  if (corpus.dimension == 0) report.push_back({"", "dimension", "corpus dimension must be positive"});
  if (corpus.documents.empty()) report.push_back({"", "non-empty", "corpus has no documents"});

  std::unordered_set<std::string> seen;
  for (const Document& doc : corpus.documents) {
    if (!seen.insert(doc.id).second) {
      report.push_back({doc.id, "unique-id", "duplicate document id"});
    }
    if (doc.modality_set.empty()) {
      report.push_back({doc.id, "modality-set", "modality set is empty"});
    }
    std::set<Modality> keys;
    for (const auto& [m, e] : doc.parts) keys.insert(m);
    if (keys != doc.modality_set) {
      report.push_back({doc.id, "modality-set", "modality set differs from part keys"});
    }
    for (const auto& [m, e] : doc.parts) {
      if (e.dim() != corpus.dimension) {
        report.push_back({doc.id, "dimension",
                          std::string(modality_name(m)) + " part has dimension " +
                              std::to_string(e.dim()) + ", expected " +
                              std::to_string(corpus.dimension)});
      }
      if (!e.all_finite()) {
        report.push_back({doc.id, "finite", std::string(modality_name(m)) + " part has non-finite entries"});
      }
    }
  }
  return report;
}

Qrels::Qrels(int max_grade) : max_grade_(max_grade) {
  if (max_grade < 1) throw Error(ErrorCode::InvalidArgument, "qrels max grade must be >= 1");
}

void Qrels::set(const std::string& query_id, const std::string& doc_id, int grade) {
  if (grade < 0 || grade > max_grade_) {
    throw Error(ErrorCode::InvalidArgument, "grade " + std::to_string(grade) + " for (" + query_id +
                                                ", " + doc_id + ") outside [0, " +
                                                std::to_string(max_grade_) + "]");
  }
  by_query_[query_id][doc_id] = grade;
}

int Qrels::grade(const std::string& query_id, const std::string& doc_id) const {
  auto q = by_query_.find(query_id);
  if (q == by_query_.end()) return 0;
  auto d = q->second.find(doc_id);
  return d == q->second.end() ? 0 : d->second;
}

const Qrels::Judgments* Qrels::judged(const std::string& query_id) const {
  auto q = by_query_.find(query_id);
  return q == by_query_.end() ? nullptr : &q->second;
}

std::vector<std::string> Qrels::query_ids() const {
  std::vector<std::string> ids;
  ids.reserve(by_query_.size());
  for (const auto& [q, j] : by_query_) ids.push_back(q);
  return ids;
}

std::size_t Qrels::size() const noexcept {
  std::size_t n = 0;
  for (const auto& [q, j] : by_query_) n += j.size();
  return n;
}

}  // namespace mixsearch

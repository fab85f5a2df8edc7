#pragma once

#include <cstddef>
#include <initializer_list>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mixsearch {

enum class Modality { Text, Image, Screenshot, Audio, Video };

inline constexpr Modality kAllModalities[] = {Modality::Text, Modality::Image, Modality::Screenshot,
                                              Modality::Audio, Modality::Video};

std::string_view modality_name(Modality m);
// Case-insensitive; returns nullopt for tags outside the closed set.
std::optional<Modality> parse_modality(std::string_view name);
// Throws Error(ParseError) on unknown tags.
Modality modality_from_string(std::string_view name);

// Fixed-dimension float32 vector. Arithmetic on embeddings accumulates in
// double and rounds back to float on store.
class Embedding {
 public:
  Embedding() = default;
  explicit Embedding(std::size_t dim) : values_(dim, 0.0f) {}
  explicit Embedding(std::vector<float> values) : values_(std::move(values)) {}
  Embedding(std::initializer_list<float> values) : values_(values) {}

  std::size_t dim() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }
  const float* data() const noexcept { return values_.data(); }
  float* data() noexcept { return values_.data(); }
  std::span<const float> values() const noexcept { return values_; }
  std::span<float> values() noexcept { return values_; }
  float operator[](std::size_t i) const { return values_[i]; }
  float& operator[](std::size_t i) { return values_[i]; }

  bool all_finite() const noexcept;

  friend bool operator==(const Embedding&, const Embedding&) = default;

 private:
  std::vector<float> values_;
};

struct Document {
  std::string id;
  std::map<Modality, Embedding> parts;
  std::set<Modality> modality_set;

  bool is_multimodal() const noexcept { return parts.size() > 1; }
  const Embedding* part(Modality m) const;

  // Builds a document whose modality set is the key set of `parts`.
  static Document from_parts(std::string id, std::map<Modality, Embedding> parts);
};

struct Query {
  std::string id;
  Embedding embedding;
  Modality modality = Modality::Text;
};

struct Corpus {
  std::size_t dimension = 0;
  std::vector<Document> documents;

  std::size_t size() const noexcept { return documents.size(); }
};

struct Violation {
  std::string doc_id;
  std::string rule;
  std::string detail;
};

// Checks every structural invariant of a corpus. Empty result means valid.
std::vector<Violation> validate_corpus(const Corpus& corpus);

// Graded relevance judgments. Absent pairs have grade 0.
class Qrels {
 public:
  using Judgments = std::map<std::string, int>;

  explicit Qrels(int max_grade = 1);

  // Throws Error(InvalidArgument) for negative grades or grades above max.
  void set(const std::string& query_id, const std::string& doc_id, int grade);
  int grade(const std::string& query_id, const std::string& doc_id) const;
  // nullptr when the query has no judgments at all.
  const Judgments* judged(const std::string& query_id) const;
  std::vector<std::string> query_ids() const;
  const std::map<std::string, Judgments>& all() const noexcept { return by_query_; }
  int max_grade() const noexcept { return max_grade_; }
  std::size_t size() const noexcept;

 private:
  int max_grade_;
  std::map<std::string, Judgments> by_query_;
};

}  // namespace mixsearch

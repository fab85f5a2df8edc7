#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "mixsearch/core.hpp"
#include "mixsearch/error.hpp"

using namespace mixsearch;

namespace {

bool has_rule(const std::vector<Violation>& v, const std::string& rule) {
  return std::any_of(v.begin(), v.end(), [&](const Violation& x) { return x.rule == rule; });
}

Corpus two_doc_corpus() {
  Corpus c;
  c.dimension = 2;
  c.documents.push_back(Document::from_parts("a", {{Modality::Text, Embedding{1.0f, 0.0f}}}));
  c.documents.push_back(
      Document::from_parts("b", {{Modality::Text, Embedding{0.0f, 1.0f}}, {Modality::Image, Embedding{1.0f, 1.0f}}}));
  return c;
}

}  // namespace

TEST(Modality, NamesRoundTrip) {
  for (Modality m : kAllModalities) {
    EXPECT_EQ(parse_modality(modality_name(m)), m);
    EXPECT_EQ(modality_from_string(modality_name(m)), m);
  }
}

TEST(Modality, ParsingIsCaseInsensitive) {
  EXPECT_EQ(parse_modality("Screenshot"), Modality::Screenshot);
  EXPECT_EQ(parse_modality("IMAGE"), Modality::Image);
}

TEST(Modality, UnknownTagIsRejected) {
  EXPECT_FALSE(parse_modality("smell").has_value());
  try {
    modality_from_string("smell");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
  }
}

TEST(Document, FromPartsDerivesModalitySet) {
  const Document d =
      Document::from_parts("x", {{Modality::Image, Embedding{1.0f}}, {Modality::Text, Embedding{2.0f}}});
  EXPECT_EQ(d.modality_set, (std::set<Modality>{Modality::Text, Modality::Image}));
  EXPECT_TRUE(d.is_multimodal());
  ASSERT_NE(d.part(Modality::Image), nullptr);
  EXPECT_EQ(d.part(Modality::Audio), nullptr);
}

TEST(ValidateCorpus, ValidCorpusHasNoViolations) { EXPECT_TRUE(validate_corpus(two_doc_corpus()).empty()); }

TEST(ValidateCorpus, EmptyCorpus) {
  Corpus c;
  c.dimension = 4;
  EXPECT_TRUE(has_rule(validate_corpus(c), "non-empty"));
}

TEST(ValidateCorpus, DimensionMismatch) {
  Corpus c = two_doc_corpus();
  c.documents[0].parts[Modality::Text] = Embedding{1.0f, 2.0f, 3.0f};
  const auto v = validate_corpus(c);
  ASSERT_TRUE(has_rule(v, "dimension"));
  EXPECT_EQ(v.front().doc_id, "a");
}

TEST(ValidateCorpus, DuplicateId) {
  Corpus c = two_doc_corpus();
  c.documents.push_back(c.documents[0]);
  EXPECT_TRUE(has_rule(validate_corpus(c), "unique-id"));
}

TEST(ValidateCorpus, EmptyModalitySet) {
  Corpus c = two_doc_corpus();
  c.documents.push_back(Document{"z", {}, {}});
  EXPECT_TRUE(has_rule(validate_corpus(c), "modality-set"));
}

TEST(ValidateCorpus, ModalitySetMustMatchParts) {
  Corpus c = two_doc_corpus();
  c.documents[0].modality_set.insert(Modality::Image);
  EXPECT_TRUE(has_rule(validate_corpus(c), "modality-set"));
}

TEST(ValidateCorpus, NonFiniteEntries) {
  Corpus c = two_doc_corpus();
  c.documents[1].parts[Modality::Image][0] = std::numeric_limits<float>::quiet_NaN();
  EXPECT_TRUE(has_rule(validate_corpus(c), "finite"));
  c.documents[1].parts[Modality::Image][0] = std::numeric_limits<float>::infinity();
  EXPECT_TRUE(has_rule(validate_corpus(c), "finite"));
}

TEST(Qrels, AbsentPairsHaveGradeZero) {
  Qrels q(3);
  q.set("q1", "d1", 2);
  EXPECT_EQ(q.grade("q1", "d1"), 2);
  EXPECT_EQ(q.grade("q1", "d2"), 0);
  EXPECT_EQ(q.grade("q9", "d1"), 0);
  EXPECT_EQ(q.judged("q9"), nullptr);
  EXPECT_EQ(q.size(), 1u);
}

TEST(Qrels, GradeBounds) {
  Qrels q(2);
  EXPECT_THROW(q.set("q", "d", -1), Error);
  EXPECT_THROW(q.set("q", "d", 3), Error);
  EXPECT_NO_THROW(q.set("q", "d", 0));
  EXPECT_THROW(Qrels(0), Error);
}

TEST(Error, MessageCarriesCodeName) {
  const Error e(ErrorCode::MissingMean, "part:audio");
  EXPECT_EQ(std::string(e.what()), "MissingMean: part:audio");
  EXPECT_FALSE(e.is_io());
  EXPECT_TRUE(Error(ErrorCode::Io, "x").is_io());
}

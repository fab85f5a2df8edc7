#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "mixsearch/corpusops.hpp"
#include "mixsearch/search.hpp"
#include "mixsearch/synth.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace mixsearch;
using namespace mixsearch::corpusops;

namespace {

Corpus paired_corpus(std::size_t n, std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  Corpus c;
  c.dimension = d;
  for (std::size_t i = 0; i < n; ++i) {
    c.documents.push_back(Document::from_parts("doc" + std::to_string(i),
                                               {{Modality::Text, Embedding(oracle::gaussian_vector(rng, d))},
                                                {Modality::Image, Embedding(oracle::gaussian_vector(rng, d))}}));
  }
  return c;
}

synth::SynthConfig small_config() {
  synth::SynthConfig c;
  c.n_docs = 300;
  c.n_queries = 300;
  return c;
}

}  // namespace

TEST(Replacement, Endpoints) {
  const Corpus paired = paired_corpus(40, 8, 1);
  for (ReplacementMode mode : {ReplacementMode::Bernoulli, ReplacementMode::ExactCount}) {
    ReplacementPlan plan;
    plan.mode = mode;
    plan.p = 0.0;
    const Replaced none = apply_replacement(paired, plan);
    plan.p = 1.0;
    const Replaced all = apply_replacement(paired, plan);
    for (std::size_t i = 0; i < paired.size(); ++i) {
      EXPECT_EQ(none.corpus.documents[i].modality_set, std::set<Modality>{Modality::Text});
      EXPECT_EQ(*none.corpus.documents[i].part(Modality::Text), *paired.documents[i].part(Modality::Text));
      EXPECT_EQ(all.corpus.documents[i].modality_set, std::set<Modality>{Modality::Image});
      EXPECT_EQ(*all.corpus.documents[i].part(Modality::Image), *paired.documents[i].part(Modality::Image));
      EXPECT_EQ(all.corpus.documents[i].id, paired.documents[i].id);
    }
    EXPECT_TRUE(none.replaced_ids.empty());
    EXPECT_EQ(all.replaced_ids.size(), paired.size());
    EXPECT_TRUE(validate_corpus(all.corpus).empty());
  }
}

TEST(Replacement, ExactCountHalf) {
  const Corpus paired = paired_corpus(10, 4, 2);
  ReplacementPlan plan;
  plan.mode = ReplacementMode::ExactCount;
  plan.p = 0.5;
  EXPECT_EQ(apply_replacement(paired, plan).replaced_ids.size(), 5u);
  plan.p = 0.3;
  EXPECT_EQ(apply_replacement(paired, plan).replaced_ids.size(), 3u);
}

TEST(Replacement, ExactCountPicksSmallestDraws) {
  const std::vector<double> draws{0.9, 0.1, 0.5, 0.1, 0.7};
  EXPECT_EQ(replacement_mask(draws, 0.4, ReplacementMode::ExactCount),
            (std::vector<bool>{false, true, false, true, false}));
  EXPECT_EQ(replacement_mask(draws, 0.6, ReplacementMode::ExactCount),
            (std::vector<bool>{false, true, true, true, false}));
  EXPECT_EQ(replacement_mask(draws, 0.5, ReplacementMode::Bernoulli),
            (std::vector<bool>{false, true, false, true, false}));
}

TEST(Replacement, DeterministicAndSeeded) {
  const Corpus paired = paired_corpus(200, 4, 3);
  ReplacementPlan plan;
  plan.p = 0.5;
  const Replaced a = apply_replacement(paired, plan);
  const Replaced b = apply_replacement(paired, plan);
  EXPECT_EQ(a.mask, b.mask);
  EXPECT_EQ(a.replaced_ids, b.replaced_ids);
  plan.seed = 43;
  EXPECT_NE(apply_replacement(paired, plan).mask, a.mask);
}

TEST(Replacement, MasksAreNestedInP) {
  const Corpus paired = paired_corpus(300, 4, 4);
  const std::vector<double> grid = report::parse_grid("0:1:0.05");
  for (ReplacementMode mode : {ReplacementMode::Bernoulli, ReplacementMode::ExactCount}) {
    ReplacementPlan plan;
    plan.mode = mode;
    std::vector<bool> prev(paired.size(), false);
    for (double p : grid) {
      plan.p = p;
      const std::vector<bool> mask = apply_replacement(paired, plan).mask;
      for (std::size_t i = 0; i < mask.size(); ++i) {
        if (prev[i]) EXPECT_TRUE(mask[i]) << "p=" << p << " i=" << i;
      }
      prev = mask;
    }
  }
}

TEST(Replacement, BernoulliFrequencyNearP) {
  const std::vector<double> draws = uniform_draws(20000, 7);
  for (double p : {0.1, 0.5, 0.9}) {
    const auto mask = replacement_mask(draws, p, ReplacementMode::Bernoulli);
    const double frac = static_cast<double>(std::count(mask.begin(), mask.end(), true)) / 20000.0;
    // Five standard deviations of a binomial proportion.
    EXPECT_NEAR(frac, p, 5.0 * std::sqrt(p * (1 - p) / 20000.0));
  }
}

TEST(Replacement, Errors) {
  Corpus paired = paired_corpus(3, 4, 5);
  paired.documents[1].parts.erase(Modality::Image);
  paired.documents[1].modality_set.erase(Modality::Image);
  ReplacementPlan plan;
  EXPECT_ERROR_CODE(apply_replacement(paired, plan), ErrorCode::MissingPart);
  plan.p = 1.5;
  EXPECT_ERROR_CODE(plan.validate(), ErrorCode::InvalidArgument);
  plan.p = 0.5;
  plan.target_modality = Modality::Text;
  EXPECT_ERROR_CODE(plan.validate(), ErrorCode::InvalidArgument);
  EXPECT_EQ(parse_replacement_mode("exact-count"), ReplacementMode::ExactCount);
  EXPECT_ERROR_CODE(parse_replacement_mode("coin"), ErrorCode::ParseError);
}

TEST(Mix, Counts) {
  EXPECT_EQ(mix_counts(9, {1, 1, 1}), (std::array<std::size_t, 3>{3, 3, 3}));
  EXPECT_EQ(mix_counts(10, {1, 1, 1}), (std::array<std::size_t, 3>{4, 3, 3}));
  EXPECT_EQ(mix_counts(7, {1, 0, 0}), (std::array<std::size_t, 3>{7, 0, 0}));
  EXPECT_EQ(mix_counts(0, {1, 1, 1}), (std::array<std::size_t, 3>{0, 0, 0}));
  for (std::size_t n = 0; n < 200; ++n) {
    const auto c = mix_counts(n, {1, 1, 1});
    EXPECT_EQ(c[0] + c[1] + c[2], n);
    EXPECT_LE(*std::max_element(c.begin(), c.end()) - *std::min_element(c.begin(), c.end()), 1u);
    const auto w = mix_counts(n, {2, 1, 1});
    EXPECT_EQ(w[0] + w[1] + w[2], n);
    EXPECT_NEAR(static_cast<double>(w[0]), n / 2.0, 1.0);
  }
}

TEST(Mix, ConservesIdsAndMatchesCounts) {
  const Corpus paired = paired_corpus(31, 4, 6);
  const Mixed mixed = apply_mix(paired, {});
  ASSERT_EQ(mixed.corpus.size(), paired.size());
  EXPECT_TRUE(validate_corpus(mixed.corpus).empty());
  std::array<std::size_t, 3> seen{};
  for (std::size_t i = 0; i < paired.size(); ++i) {
    const Document& doc = mixed.corpus.documents[i];
    EXPECT_EQ(doc.id, paired.documents[i].id);
    const MixShape shape = mixed.shapes[i];
    ++seen[static_cast<std::size_t>(shape)];
    switch (shape) {
      case MixShape::TextOnly:
        EXPECT_EQ(doc.modality_set, std::set<Modality>{Modality::Text});
        break;
      case MixShape::ImageOnly:
        EXPECT_EQ(doc.modality_set, std::set<Modality>{Modality::Image});
        break;
      case MixShape::Multimodal:
        EXPECT_EQ(doc.modality_set, (std::set<Modality>{Modality::Text, Modality::Image}));
        break;
    }
    for (const auto& [m, e] : doc.parts) EXPECT_EQ(e, *paired.documents[i].part(m));
  }
  EXPECT_EQ(seen, mix_counts(31, {1, 1, 1}));
  EXPECT_EQ(apply_mix(paired, {}).shapes, mixed.shapes);
}

TEST(Mix, ParseAndValidate) {
  EXPECT_EQ(parse_ratios("1:1:1"), (std::array<double, 3>{1, 1, 1}));
  EXPECT_EQ(parse_ratios("2:0.5:0"), (std::array<double, 3>{2, 0.5, 0}));
  EXPECT_ERROR_CODE(parse_ratios("1:1"), ErrorCode::ParseError);
  EXPECT_ERROR_CODE(parse_ratios("1:1:1:1"), ErrorCode::ParseError);
  EXPECT_ERROR_CODE(parse_ratios("1:x:1"), ErrorCode::ParseError);
  MixPlan plan;
  plan.ratios = {0, 0, 0};
  EXPECT_ERROR_CODE(plan.validate(), ErrorCode::InvalidArgument);
  plan.ratios = {1, -1, 1};
  EXPECT_ERROR_CODE(plan.validate(), ErrorCode::InvalidArgument);
}

TEST(Pushdown, EmptyMaskMatchesPlainRetrieval) {
  const synth::SynthData data = synth::generate(small_config());
  ReplacementPlan plan;
  plan.p = 0.4;
  const Replaced replaced = apply_replacement(data.corpus, plan);
  const std::vector<bool> none(replaced.corpus.size(), false);
  const metrics::MetricReport a = pushdown_simulation(data.queries, replaced.corpus, none, data.qrels);

  search::RetrievalOptions ro;
  ro.k = 100;
  const search::RunResult run = search::run_retrieval(data.queries, replaced.corpus, ro);
  const std::vector<std::size_t> ks{10, 100};
  const metrics::MetricReport b = metrics::evaluate_run(run, data.qrels, ks);
  EXPECT_EQ(metrics::format_report_csv(a), metrics::format_report_csv(b));
}

TEST(Pushdown, FullMaskByIdRanksInIdOrder) {
  const synth::SynthData data = synth::generate(small_config());
  ReplacementPlan plan;
  plan.p = 1.0;
  const Replaced replaced = apply_replacement(data.corpus, plan);
  const metrics::MetricReport r =
      pushdown_simulation(data.queries, replaced.corpus, replaced.mask, data.qrels, {}, search::TieOrder::ById);

  std::vector<std::string> ids;
  for (const Document& d : data.corpus.documents) ids.push_back(d.id);
  std::sort(ids.begin(), ids.end());
  double sum10 = 0.0, sum100 = 0.0, r1 = 0.0;
  for (const Query& q : data.queries) {
    const auto grades = *data.qrels.judged(q.id);
    sum10 += oracle::ndcg(ids, grades, 10);
    sum100 += oracle::ndcg(ids, grades, 100);
    r1 += oracle::recall1(ids, grades);
  }
  const double n = static_cast<double>(data.queries.size());
  EXPECT_NEAR(r.aggregate.at("ndcg@10"), sum10 / n, 1e-9);
  EXPECT_NEAR(r.aggregate.at("ndcg@100"), sum100 / n, 1e-9);
  EXPECT_NEAR(r.aggregate.at("recall@1"), r1 / n, 1e-9);
}

TEST(Pushdown, MaskedDocumentsRankBelowTheRest) {
  const synth::SynthData data = synth::generate(small_config());
  ReplacementPlan plan;
  plan.p = 0.5;
  const Replaced replaced = apply_replacement(data.corpus, plan);
  // Native cosines are positive here, so every unmasked document outranks
  // every masked one.
  search::RetrievalOptions ro;
  ro.k = replaced.corpus.size();
  ro.overrides.push_back(search::ScoreOverride::for_ids(
      {replaced.replaced_ids.begin(), replaced.replaced_ids.end()}, 0.0, search::TieOrder::ByNativeScore));
  const search::RunResult run = search::run_retrieval(data.queries, replaced.corpus, ro);
  const std::set<std::string> masked(replaced.replaced_ids.begin(), replaced.replaced_ids.end());
  for (const auto& q : run.queries) {
    bool in_masked = false;
    for (const auto& d : q.docs) {
      const bool m = masked.count(d.doc_id) != 0;
      if (in_masked) EXPECT_TRUE(m);
      in_masked |= m;
    }
  }
}

TEST(Pushdown, MaskSizeMismatch) {
  const synth::SynthData data = synth::generate(small_config());
  EXPECT_ERROR_CODE(pushdown_simulation(data.queries, data.corpus, std::vector<bool>(3), data.qrels),
                    ErrorCode::InvalidArgument);
}

TEST(PSweep, ZeroIsTextOnlyRetrieval) {
  const synth::SynthData data = synth::generate(small_config());
  const std::vector<double> grid{0.0};
  const report::SweepTable t = p_sweep(data.corpus, data.queries, data.qrels, grid, {}, nullptr);
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.x_name, "p");

  Corpus text_only = data.corpus;
  for (Document& d : text_only.documents) d = Document::from_parts(d.id, {{Modality::Text, *d.part(Modality::Text)}});
  search::RetrievalOptions ro;
  ro.k = 100;
  const std::vector<std::size_t> ks{10, 100};
  const auto direct = metrics::evaluate_run(search::run_retrieval(data.queries, text_only, ro), data.qrels, ks);
  EXPECT_EQ(metrics::format_report_csv(t.rows[0].report), metrics::format_report_csv(direct));
}

TEST(PSweep, UShapeAndCalibratedFlattening) {
  const synth::SynthConfig config = small_config();
  const std::vector<double> grid{0.0, 0.5, 1.0};
  const synth::UShape u = synth::ushape_experiment(config, grid);
  const std::vector<double> raw = u.raw.column("ndcg@10");
  const std::vector<double> cal = u.calibrated.column("ndcg@10");
  EXPECT_GT(std::min(raw[0], raw[2]) - raw[1], 0.10);
  const auto [lo, hi] = std::minmax_element(cal.begin(), cal.end());
  EXPECT_LE(*hi - *lo, 0.05);
  for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_GE(cal[i], raw[i] - 0.01);
}

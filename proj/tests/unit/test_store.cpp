#include <gtest/gtest.h>

#include <bit>
#include <cstring>
#include <filesystem>
#include <limits>

#include "mixsearch/io.hpp"
#include "mixsearch/random.hpp"
#include "mixsearch/store.hpp"
#include "support.hpp"

using namespace mixsearch;
using namespace mixsearch::store;

namespace {

StoreContents random_contents(Rng& rng, std::uint32_t dim, std::size_t n_queries, std::size_t n_docs) {
  StoreContents c;
  c.dimension = dim;
  auto vec = [&] {
    std::vector<float> v(dim);
    for (float& x : v) x = static_cast<float>(rng.gaussian());
    return Embedding(std::move(v));
  };
  for (std::size_t i = 0; i < n_queries; ++i) {
    c.records.push_back({{"q" + std::to_string(i), Role::Query, Modality::Text, "", std::nullopt, std::nullopt}, vec()});
  }
  const Modality mods[] = {Modality::Text, Modality::Image, Modality::Screenshot};
  for (std::size_t i = 0; i < n_docs; ++i) {
    const std::size_t parts = 1 + rng.below(3);
    for (std::size_t p = 0; p < parts; ++p) {
      const std::string doc = "doc \"" + std::to_string(i) + "\"";
      c.records.push_back(
          {{doc + "#" + std::to_string(p), Role::DocumentPart, mods[p], doc, std::nullopt, std::nullopt}, vec()});
    }
  }
  if (n_docs > 0 && rng.below(2) == 0) c.records.back().meta.count = rng.next();
  if (n_docs > 0) c.records.front().meta.profile = "oven/short";
  return c;
}

void expect_same(const StoreContents& a, const StoreContents& b) {
  ASSERT_EQ(a.dimension, b.dimension);
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    const Record& x = a.records[i];
    const Record& y = b.records[i];
    EXPECT_EQ(x.meta.id, y.meta.id);
    EXPECT_EQ(x.meta.role, y.meta.role);
    EXPECT_EQ(x.meta.modality, y.meta.modality);
    EXPECT_EQ(x.meta.doc_id, y.meta.doc_id);
    EXPECT_EQ(x.meta.count, y.meta.count);
    EXPECT_EQ(x.meta.profile, y.meta.profile);
    ASSERT_EQ(x.embedding.dim(), y.embedding.dim());
    EXPECT_EQ(0, std::memcmp(x.embedding.data(), y.embedding.data(), x.embedding.dim() * 4));
  }
}

StoreContents tiny() {
  return {2,
          {{{"q", Role::Query, Modality::Text, "", std::nullopt, std::nullopt}, Embedding{1.0f, 2.0f}},
           {{"d#text", Role::DocumentPart, Modality::Text, "d", std::nullopt, std::nullopt}, Embedding{3.0f, 4.0f}}}};
}

}  // namespace

TEST(Store, HeaderLayout) {
  const std::string data = encode_data(tiny());
  ASSERT_EQ(data.size(), kHeaderSize + 2 * 2 * 4);
  EXPECT_EQ(data.substr(0, 4), "MMS1");
  EXPECT_EQ(static_cast<unsigned char>(data[4]), 1);
  EXPECT_EQ(static_cast<unsigned char>(data[5]), 0);
  EXPECT_EQ(static_cast<unsigned char>(data[6]), 2);
  EXPECT_EQ(static_cast<unsigned char>(data[10]), 2);
  EXPECT_EQ(static_cast<unsigned char>(data[18]), 0);
  // 1.0f little-endian
  EXPECT_EQ(static_cast<unsigned char>(data[19]), 0x00);
  EXPECT_EQ(static_cast<unsigned char>(data[22]), 0x3f);
}

TEST(Store, SidecarIsOneJsonObjectPerLine) {
  EXPECT_EQ(encode_meta(tiny()),
            "{\"id\":\"q\",\"role\":\"query\",\"modality\":\"text\",\"doc_id\":\"\"}\n"
            "{\"id\":\"d#text\",\"role\":\"part\",\"modality\":\"text\",\"doc_id\":\"d\"}\n");
}

TEST(Store, RandomRoundTripIsExact) {
  Rng rng(11);
  const auto dir = scratch_dir("store_rt");
  for (int trial = 0; trial < 50; ++trial) {
    const auto dim = static_cast<std::uint32_t>(1 + rng.below(70));
    const StoreContents c = random_contents(rng, dim, rng.below(5), rng.below(20));
    if (c.records.empty()) continue;
    const StoreContents back = decode(encode_data(c), encode_meta(c));
    expect_same(c, back);
    const auto path = dir / ("s" + std::to_string(trial) + ".mms");
    write_store(c, path);
    expect_same(c, read_store(path));
    EXPECT_EQ(io::read_file(path), encode_data(back));
    EXPECT_EQ(io::read_file(meta_path(path)), encode_meta(back));
  }
}

TEST(Store, SpecialFloatsSurvive) {
  StoreContents c = tiny();
  c.records[0].embedding = Embedding{-0.0f, std::numeric_limits<float>::denorm_min()};
  c.records[1].embedding = Embedding{std::numeric_limits<float>::max(), -std::numeric_limits<float>::infinity()};
  expect_same(c, decode(encode_data(c), encode_meta(c)));
}

TEST(Store, EmptyStoreRoundTrips) {
  StoreContents c{3, {}};
  const StoreContents back = decode(encode_data(c), encode_meta(c));
  EXPECT_EQ(back.dimension, 3u);
  EXPECT_TRUE(back.records.empty());
}

TEST(Store, BadMagic) {
  std::string data = encode_data(tiny());
  data[0] = 'X';
  EXPECT_ERROR_CODE(decode(data, encode_meta(tiny())), ErrorCode::BadMagic);
}

TEST(Store, UnsupportedVersion) {
  std::string data = encode_data(tiny());
  data[4] = 2;
  EXPECT_ERROR_CODE(decode(data, encode_meta(tiny())), ErrorCode::UnsupportedVersion);
}

TEST(Store, UnsupportedDtype) {
  std::string data = encode_data(tiny());
  data[18] = 1;
  EXPECT_ERROR_CODE(decode(data, encode_meta(tiny())), ErrorCode::UnsupportedDtype);
}

TEST(Store, TruncatedPayload) {
  const std::string data = encode_data(tiny());
  EXPECT_ERROR_CODE(decode(data.substr(0, data.size() - 1), encode_meta(tiny())), ErrorCode::Truncated);
  EXPECT_ERROR_CODE(decode(data.substr(0, 10), encode_meta(tiny())), ErrorCode::Truncated);
  EXPECT_ERROR_CODE(decode(data + "xxxx", encode_meta(tiny())), ErrorCode::Truncated);
}

TEST(Store, HugeCountDoesNotOverflow) {
  std::string data = encode_data(tiny());
  for (int i = 10; i < 18; ++i) data[i] = static_cast<char>(0xff);
  EXPECT_ERROR_CODE(decode(data, encode_meta(tiny())), ErrorCode::Truncated);
}

TEST(Store, SidecarLineCountMismatch) {
  const std::string meta = encode_meta(tiny());
  EXPECT_ERROR_CODE(decode(encode_data(tiny()), meta.substr(0, meta.find('\n') + 1)), ErrorCode::MetaMismatch);
}

TEST(Store, SidecarParseErrors) {
  EXPECT_ERROR_CODE(decode(encode_data(tiny()), "{not json}\n{}\n"), ErrorCode::ParseError);
  EXPECT_ERROR_CODE(decode(encode_data(tiny()),
                           "{\"id\":\"q\",\"role\":\"query\",\"modality\":\"smell\"}\n"
                           "{\"id\":\"d\",\"role\":\"part\",\"modality\":\"text\",\"doc_id\":\"d\"}\n"),
                    ErrorCode::ParseError);
  EXPECT_ERROR_CODE(decode(encode_data(tiny()), "{\"role\":\"query\",\"modality\":\"text\"}\n{}\n"),
                    ErrorCode::ParseError);
}

TEST(Store, DuplicateIdAndPart) {
  StoreContents c = tiny();
  c.records[1].meta.id = "q";
  EXPECT_ERROR_CODE(decode(encode_data(c), encode_meta(c)), ErrorCode::DuplicateId);
  const auto dir = scratch_dir("store_dup");
  EXPECT_ERROR_CODE(write_store(c, dir / "x.mms"), ErrorCode::DuplicateId);

  StoreContents d = tiny();
  d.records.push_back(d.records[1]);
  d.records.back().meta.id = "d#text2";
  EXPECT_ERROR_CODE(decode(encode_data(d), encode_meta(d)), ErrorCode::DuplicatePart);
}

TEST(Store, DimensionMismatchOnEncode) {
  StoreContents c = tiny();
  c.records[1].embedding = Embedding{1.0f, 2.0f, 3.0f};
  EXPECT_ERROR_CODE(encode_data(c), ErrorCode::DimensionMismatch);
}

TEST(Store, MissingFilesAreIoErrors) {
  const auto dir = scratch_dir("store_missing");
  try {
    read_store(dir / "absent.mms");
    FAIL();
  } catch (const Error& e) {
    EXPECT_TRUE(e.is_io());
    EXPECT_NE(std::string(e.what()).find("absent.mms"), std::string::npos);
  }
  io::atomic_write(dir / "nometa.mms", encode_data(tiny()));
  EXPECT_ERROR_CODE(read_store(dir / "nometa.mms"), ErrorCode::Io);
}

TEST(Store, AssembleGroupsPartsInFirstAppearanceOrder) {
  StoreContents c{1, {}};
  auto rec = [](std::string id, Role role, Modality m, std::string doc, float v) {
    return Record{{std::move(id), role, m, std::move(doc), std::nullopt, std::nullopt}, Embedding{v}};
  };
  c.records.push_back(rec("b#image", Role::DocumentPart, Modality::Image, "b", 1));
  c.records.push_back(rec("q1", Role::Query, Modality::Text, "", 2));
  c.records.push_back(rec("a#text", Role::DocumentPart, Modality::Text, "a", 3));
  c.records.push_back(rec("b#text", Role::DocumentPart, Modality::Text, "b", 4));
  const Assembled a = assemble_corpus(c);
  ASSERT_EQ(a.corpus.size(), 2u);
  EXPECT_EQ(a.corpus.documents[0].id, "b");
  EXPECT_EQ(a.corpus.documents[0].modality_set, (std::set<Modality>{Modality::Text, Modality::Image}));
  EXPECT_EQ(a.corpus.documents[1].id, "a");
  ASSERT_EQ(a.queries.size(), 1u);
  EXPECT_EQ(a.queries[0].embedding[0], 2.0f);
  EXPECT_TRUE(validate_corpus(a.corpus).empty());

  const Assembled again = assemble_corpus(to_store(a.corpus, a.queries));
  EXPECT_EQ(again.corpus.documents[0].parts, a.corpus.documents[0].parts);
  EXPECT_EQ(again.corpus.documents[1].id, "a");
}

TEST(Qrels, ParseSkipsCommentsAndClampsNegatives) {
  const Qrels q = parse_qrels("# header\n\nq1 0 d1 1\nq1 0 d2 -1\n  q2 0 d3 2\n", 2);
  EXPECT_EQ(q.grade("q1", "d1"), 1);
  EXPECT_EQ(q.grade("q1", "d2"), 0);
  ASSERT_NE(q.judged("q1"), nullptr);
  EXPECT_EQ(q.judged("q1")->count("d2"), 1u);
  EXPECT_EQ(q.grade("q2", "d3"), 2);
}

TEST(Qrels, MalformedLines) {
  EXPECT_ERROR_CODE(parse_qrels("q1 0 d1\n"), ErrorCode::ParseError);
  EXPECT_ERROR_CODE(parse_qrels("q1 0 d1 x\n"), ErrorCode::ParseError);
  EXPECT_ERROR_CODE(parse_qrels("q1 0 d1 1 extra\n"), ErrorCode::ParseError);
}

TEST(Qrels, FormatRoundTrip) {
  Qrels q(3);
  q.set("q2", "d9", 3);
  q.set("q1", "d1", 1);
  q.set("q1", "d0", 0);
  const std::string text = format_qrels(q);
  EXPECT_EQ(text, "q1 0 d0 0\nq1 0 d1 1\nq2 0 d9 3\n");
  EXPECT_EQ(format_qrels(parse_qrels(text, 3)), text);
}

TEST(Io, AtomicWriteLeavesNoTempFile) {
  const auto dir = scratch_dir("io");
  io::atomic_write(dir / "f.txt", "hello");
  EXPECT_EQ(io::read_file(dir / "f.txt"), "hello");
  io::atomic_write(dir / "f.txt", "bye");
  EXPECT_EQ(io::read_file(dir / "f.txt"), "bye");
  EXPECT_FALSE(std::filesystem::exists(dir / "f.txt.tmp"));
  EXPECT_ERROR_CODE(io::atomic_write(dir / "no" / "such" / "f.txt", "x"), ErrorCode::Io);
}

TEST(Io, Fnv1aKnownValues) {
  EXPECT_EQ(io::fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(io::fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(io::fnv1a64("foobar"), 0x85944171f73967e8ULL);
  EXPECT_EQ(io::hex64(0xabcULL), "0000000000000abc");
}

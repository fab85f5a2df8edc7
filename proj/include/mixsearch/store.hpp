#pragma once

// Binary embedding store (`<name>.mmse`) with a line-delimited JSON sidecar
// (`<name>.mmse.meta`), plus the whitespace qrels format.
//
// Data file layout, all little-endian, no padding:
//   offset  size  field
//   0       4     magic "MMS1"
//   4       2     version (1)
//   6       4     dimension
//   10      8     record_count
//   18      1     dtype (0 = float32)
//   19      ...   record_count * dimension float32 values in record order
//
// Sidecar: one object per record, same order, e.g.
//   {"id":"d1#text","role":"part","modality":"text","doc_id":"d1"}
// Optional keys: "count" (sample count, means profiles), "profile".
// Unknown keys are ignored on read.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mixsearch/core.hpp"

namespace mixsearch::store {

inline constexpr char kMagic[4] = {'M', 'M', 'S', '1'};
inline constexpr std::uint16_t kVersion = 1;
inline constexpr std::uint8_t kDtypeFloat32 = 0;
inline constexpr std::size_t kHeaderSize = 19;

enum class Role { Query, DocumentPart };

std::string_view role_name(Role r);
Role role_from_string(std::string_view s);

struct RecordMeta {
  std::string id;
  Role role = Role::DocumentPart;
  Modality modality = Modality::Text;
  std::string doc_id;
  std::optional<std::uint64_t> count;
  std::optional<std::string> profile;

  friend bool operator==(const RecordMeta&, const RecordMeta&) = default;
};

struct Record {
  RecordMeta meta;
  Embedding embedding;

  friend bool operator==(const Record&, const Record&) = default;
};

struct StoreContents {
  std::uint32_t dimension = 0;
  std::vector<Record> records;
};

std::filesystem::path meta_path(const std::filesystem::path& data_path);

// Serialized bytes of the data file and the sidecar. Byte-identical for
// identical input. Throws DimensionMismatch / InvalidArgument.
std::string encode_data(const StoreContents& contents);
std::string encode_meta(const StoreContents& contents);

// Writes both files atomically. Throws DimensionMismatch or Io.
void write_store(const StoreContents& contents, const std::filesystem::path& path);

// Throws BadMagic, UnsupportedVersion, UnsupportedDtype, Truncated,
// MetaMismatch, ParseError, DuplicateId, DuplicatePart or Io.
StoreContents read_store(const std::filesystem::path& path);
StoreContents decode(std::string_view data, std::string_view meta);

struct Assembled {
  Corpus corpus;
  std::vector<Query> queries;
};

// Groups DocumentPart records by doc_id (first-appearance order) and turns
// Query records into queries.
Assembled assemble_corpus(const StoreContents& contents);
// Inverse of assemble_corpus: queries first, then each document's parts in
// modality order.
StoreContents to_store(const Corpus& corpus, const std::vector<Query>& queries);

// `query_id 0 doc_id grade` per line; blank lines and '#' comments skipped.
Qrels parse_qrels(std::string_view text, int max_grade = 1);
Qrels read_qrels(const std::filesystem::path& path, int max_grade = 1);
std::string format_qrels(const Qrels& qrels);
void write_qrels(const Qrels& qrels, const std::filesystem::path& path);

}  // namespace mixsearch::store

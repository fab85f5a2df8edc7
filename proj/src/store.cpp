#include "mixsearch/store.hpp"

#include <bit>
#include <cstring>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "mixsearch/error.hpp"
#include "mixsearch/io.hpp"

namespace mixsearch::store {

namespace {

template <typename T>
void put_le(std::string& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xff));
  }
}

template <typename T>
T get_le(const char* p) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  }
  return static_cast<T>(v);
}

void put_float(std::string& out, float f) { put_le(out, std::bit_cast<std::uint32_t>(f)); }

float get_float(const char* p) { return std::bit_cast<float>(get_le<std::uint32_t>(p)); }

std::uint32_t infer_dimension(const StoreContents& contents) {
  std::uint32_t dim = contents.dimension;
  for (const Record& r : contents.records) {
    if (dim == 0) dim = static_cast<std::uint32_t>(r.embedding.dim());
    if (r.embedding.dim() != dim) {
      throw Error(ErrorCode::DimensionMismatch, "record '" + r.meta.id + "' has dimension " +
                                                    std::to_string(r.embedding.dim()) + ", expected " +
                                                    std::to_string(dim));
    }
  }
  if (dim == 0) throw Error(ErrorCode::InvalidArgument, "store dimension must be >= 1");
  return dim;
}

void check_unique(const std::vector<Record>& records) {
  std::unordered_set<std::string> ids;
  std::set<std::pair<std::string, Modality>> parts;
  for (const Record& r : records) {
    if (!ids.insert(r.meta.id).second) {
      throw Error(ErrorCode::DuplicateId, "record id '" + r.meta.id + "' appears twice");
    }
    if (r.meta.role == Role::DocumentPart && !parts.emplace(r.meta.doc_id, r.meta.modality).second) {
      throw Error(ErrorCode::DuplicatePart, "document '" + r.meta.doc_id + "' has two " +
                                                std::string(modality_name(r.meta.modality)) + " parts");
    }
  }
}

}  // namespace

std::string_view role_name(Role r) { return r == Role::Query ? "query" : "part"; }

Role role_from_string(std::string_view s) {
  if (s == "query") return Role::Query;
  if (s == "part") return Role::DocumentPart;
  throw Error(ErrorCode::ParseError, "unknown role '" + std::string(s) + "'");
}

std::filesystem::path meta_path(const std::filesystem::path& data_path) {
  std::filesystem::path p = data_path;
  p += ".meta";
  return p;
}

std::string encode_data(const StoreContents& contents) {
  const std::uint32_t dim = infer_dimension(contents);
  std::string out;
  out.reserve(kHeaderSize + contents.records.size() * dim * 4);
  out.append(kMagic, 4);
  put_le<std::uint16_t>(out, kVersion);
  put_le<std::uint32_t>(out, dim);
  put_le<std::uint64_t>(out, contents.records.size());
  put_le<std::uint8_t>(out, kDtypeFloat32);
  for (const Record& r : contents.records) {
    for (float f : r.embedding.values()) put_float(out, f);
  }
  return out;
}

std::string encode_meta(const StoreContents& contents) {
  std::string out;
  for (const Record& r : contents.records) {
    nlohmann::ordered_json j;
    j["id"] = r.meta.id;
    j["role"] = role_name(r.meta.role);
    j["modality"] = modality_name(r.meta.modality);
    j["doc_id"] = r.meta.doc_id;
    if (r.meta.count) j["count"] = *r.meta.count;
    if (r.meta.profile) j["profile"] = *r.meta.profile;
    out += j.dump();
    out.push_back('\n');
  }
  return out;
}

void write_store(const StoreContents& contents, const std::filesystem::path& path) {
  check_unique(contents.records);
  const std::string data = encode_data(contents);
  const std::string meta = encode_meta(contents);
  io::atomic_write(path, data);
  io::atomic_write(meta_path(path), meta);
}

StoreContents decode(std::string_view data, std::string_view meta) {
  if (data.size() < kHeaderSize) throw Error(ErrorCode::Truncated, "file shorter than header");
  if (std::memcmp(data.data(), kMagic, 4) != 0) throw Error(ErrorCode::BadMagic, "magic is not MMS1");
  const auto version = get_le<std::uint16_t>(data.data() + 4);
  if (version != kVersion) {
    throw Error(ErrorCode::UnsupportedVersion, "version " + std::to_string(version));
  }
  const auto dim = get_le<std::uint32_t>(data.data() + 6);
  const auto count = get_le<std::uint64_t>(data.data() + 10);
  const auto dtype = get_le<std::uint8_t>(data.data() + 18);
  if (dtype != kDtypeFloat32) throw Error(ErrorCode::UnsupportedDtype, "dtype " + std::to_string(dtype));
  if (dim == 0) throw Error(ErrorCode::ParseError, "dimension is 0");
  const std::uint64_t payload = static_cast<std::uint64_t>(data.size() - kHeaderSize);
  if (count > payload / (4ULL * dim) + 1 || payload != count * dim * 4ULL) {
    throw Error(ErrorCode::Truncated, "payload is " + std::to_string(payload) + " bytes, header implies " +
                                          std::to_string(count * dim * 4ULL));
  }

  std::vector<RecordMeta> metas;
  std::size_t start = 0;
  while (start < meta.size()) {
    std::size_t end = meta.find('\n', start);
    if (end == std::string_view::npos) end = meta.size();
    std::string_view line = meta.substr(start, end - start);
    start = end + 1;
    if (line.empty() || line == "\r") continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ParseError, std::string("sidecar line: ") + e.what());
    }
    try {
      RecordMeta m;
      m.id = j.at("id").get<std::string>();
      m.role = role_from_string(j.at("role").get<std::string>());
      m.modality = modality_from_string(j.at("modality").get<std::string>());
      if (j.contains("doc_id")) m.doc_id = j["doc_id"].get<std::string>();
      if (j.contains("count")) m.count = j["count"].get<std::uint64_t>();
      if (j.contains("profile")) m.profile = j["profile"].get<std::string>();
      metas.push_back(std::move(m));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ParseError, std::string("sidecar field: ") + e.what());
    }
  }
  if (metas.size() != count) {
    throw Error(ErrorCode::MetaMismatch, "sidecar has " + std::to_string(metas.size()) +
                                             " lines, header says " + std::to_string(count));
  }

  StoreContents contents;
  contents.dimension = dim;
  contents.records.reserve(count);
  const char* p = data.data() + kHeaderSize;
  for (std::uint64_t r = 0; r < count; ++r) {
    std::vector<float> v(dim);
    for (std::uint32_t j = 0; j < dim; ++j, p += 4) v[j] = get_float(p);
    contents.records.push_back({std::move(metas[r]), Embedding(std::move(v))});
  }
  check_unique(contents.records);
  return contents;
}

StoreContents read_store(const std::filesystem::path& path) {
  const std::string data = io::read_file(path);
  const auto mpath = meta_path(path);
  if (!std::filesystem::exists(mpath)) {
    throw Error(ErrorCode::Io, "missing sidecar '" + mpath.string() + "'");
  }
  const std::string meta = io::read_file(mpath);
  return decode(data, meta);
}

Assembled assemble_corpus(const StoreContents& contents) {
  Assembled out;
  out.corpus.dimension = contents.dimension;
  std::unordered_map<std::string, std::size_t> index;
  for (const Record& r : contents.records) {
    if (r.embedding.dim() != contents.dimension) {
      throw Error(ErrorCode::DimensionMismatch, "record '" + r.meta.id + "' has dimension " +
                                                    std::to_string(r.embedding.dim()));
    }
    if (r.meta.role == Role::Query) {
      out.queries.push_back({r.meta.id, r.embedding, r.meta.modality});
      continue;
    }
    auto [it, inserted] = index.emplace(r.meta.doc_id, out.corpus.documents.size());
    if (inserted) out.corpus.documents.push_back({r.meta.doc_id, {}, {}});
    Document& doc = out.corpus.documents[it->second];
    if (!doc.parts.emplace(r.meta.modality, r.embedding).second) {
      throw Error(ErrorCode::DuplicatePart, "document '" + doc.id + "' has two " +
                                                std::string(modality_name(r.meta.modality)) + " parts");
    }
    doc.modality_set.insert(r.meta.modality);
  }
  return out;
}

StoreContents to_store(const Corpus& corpus, const std::vector<Query>& queries) {
  StoreContents out;
  out.dimension = static_cast<std::uint32_t>(corpus.dimension);
  for (const Query& q : queries) {
    out.records.push_back({{q.id, Role::Query, q.modality, "", std::nullopt, std::nullopt}, q.embedding});
  }
  for (const Document& d : corpus.documents) {
    for (const auto& [m, e] : d.parts) {
      out.records.push_back(
          {{d.id + "#" + std::string(modality_name(m)), Role::DocumentPart, m, d.id, std::nullopt, std::nullopt},
           e});
    }
  }
  return out;
}

Qrels parse_qrels(std::string_view text, int max_grade) {
  Qrels qrels(max_grade);
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream fields(line);
    std::string qid, iter, did, extra;
    long long grade = 0;
    if (!(fields >> qid)) continue;
    if (qid[0] == '#') continue;
    if (!(fields >> iter >> did >> grade) || (fields >> extra)) {
      throw Error(ErrorCode::ParseError, "qrels line " + std::to_string(lineno) + " is not 'qid 0 docid grade'");
    }
    if (grade < 0) grade = 0;
    qrels.set(qid, did, static_cast<int>(grade));
  }
  return qrels;
}

Qrels read_qrels(const std::filesystem::path& path, int max_grade) {
  return parse_qrels(io::read_file(path), max_grade);
}

std::string format_qrels(const Qrels& qrels) {
  std::string out;
  for (const auto& [q, judged] : qrels.all()) {
    for (const auto& [d, g] : judged) {
      out += q;
      out += " 0 ";
      out += d;
      out += ' ';
      out += std::to_string(g);
      out += '\n';
    }
  }
  return out;
}

void write_qrels(const Qrels& qrels, const std::filesystem::path& path) {
  io::atomic_write(path, format_qrels(qrels));
}

}  // namespace mixsearch::store

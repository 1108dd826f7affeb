#include "semrank/index.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "semrank/errors.hpp"

namespace semrank {

Index Index::build(const std::vector<Document>& docs, const PipelineConfig& config) {
  Index index;
  index.pipeline_hash_ = config.hash();
  index.docs_.reserve(docs.size());

  std::vector<std::map<std::string, std::uint32_t>> doc_tfs;
  doc_tfs.reserve(docs.size());
  std::map<std::string, std::vector<Posting>> postings;
  std::uint64_t total_tokens = 0;
  for (const auto& doc : docs) {
    if (doc.doc_id.empty()) throw DataError("document with empty doc_id");
    auto ordinal = static_cast<std::uint32_t>(index.docs_.size());
    if (!index.ordinals_.emplace(doc.doc_id, ordinal).second)
      throw DataError("duplicate doc_id: " + doc.doc_id);
    std::vector<std::string> terms = tokenize(doc.text, config);
    std::map<std::string, std::uint32_t> tf;
    for (const auto& term : terms) ++tf[term];
    for (const auto& [term, count] : tf) postings[term].push_back({ordinal, count});
    index.docs_.push_back({doc.doc_id, static_cast<std::uint32_t>(terms.size())});
    total_tokens += terms.size();
    doc_tfs.push_back(std::move(tf));
  }

  index.terms_.reserve(postings.size());
  index.entries_.reserve(postings.size());
  index.postings_.reserve(total_tokens);
  for (auto& [term, list] : postings) {  // std::map: sorted term order
    TermEntry entry;
    entry.df = static_cast<std::uint32_t>(list.size());
    entry.offset = index.postings_.size();
    for (const auto& posting : list) {
      entry.cf += posting.tf;
      index.postings_.push_back(posting);
    }
    index.term_ids_.emplace(term, static_cast<std::uint32_t>(index.terms_.size()));
    index.terms_.push_back(term);
    index.entries_.push_back(entry);
  }

  index.forward_offsets_.reserve(doc_tfs.size() + 1);
  index.forward_offsets_.push_back(0);
  for (const auto& tf : doc_tfs) {
    for (const auto& [term, count] : tf)
      index.forward_.push_back({index.term_ids_.at(term), count});
    index.forward_offsets_.push_back(index.forward_.size());
  }

  index.stats_.num_docs = index.docs_.size();
  index.stats_.total_tokens = total_tokens;
  index.stats_.vocab_size = index.terms_.size();
  index.stats_.avg_doc_length =
      index.docs_.empty()
          ? 0.0
          : static_cast<double>(total_tokens) / static_cast<double>(index.docs_.size());
  return index;
}

std::pair<std::uint32_t, std::span<const Posting>> Index::lookup(std::string_view term) const {
  auto id = term_id(term);
  if (!id) return {0, {}};
  const TermEntry& entry = entries_[*id];
  return {entry.df, std::span<const Posting>(postings_.data() + entry.offset, entry.df)};
}

std::uint64_t Index::collection_frequency(std::string_view term) const {
  auto id = term_id(term);
  return id ? entries_[*id].cf : 0;
}

std::uint64_t Index::collection_frequency(std::uint32_t term_id) const {
  return entries_.at(term_id).cf;
}

std::optional<std::uint32_t> Index::term_id(std::string_view term) const {
  auto it = term_ids_.find(std::string(term));
  if (it == term_ids_.end()) return std::nullopt;
  return it->second;
}

std::uint32_t Index::document_frequency(std::uint32_t term_id) const {
  return entries_.at(term_id).df;
}

std::span<const TermCount> Index::document_terms(std::uint32_t doc_ordinal) const {
  std::uint64_t begin = forward_offsets_.at(doc_ordinal);
  std::uint64_t end = forward_offsets_.at(doc_ordinal + 1);
  return {forward_.data() + begin, end - begin};
}

std::optional<std::uint32_t> Index::ordinal_of(std::string_view doc_id) const {
  auto it = ordinals_.find(std::string(doc_id));
  if (it == ordinals_.end()) return std::nullopt;
  return it->second;
}

namespace {

constexpr char kMagic[4] = {'S', 'R', 'I', 'X'};

void put_u32(std::ostream& out, std::uint32_t value) {
  unsigned char bytes[4];
  for (int i = 0; i < 4; ++i) bytes[i] = static_cast<unsigned char>(value >> (8 * i));
  out.write(reinterpret_cast<const char*>(bytes), 4);
}

void put_u64(std::ostream& out, std::uint64_t value) {
  unsigned char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(value >> (8 * i));
  out.write(reinterpret_cast<const char*>(bytes), 8);
}

void put_f64(std::ostream& out, double value) {
  std::uint64_t bits;
  std::memcpy(&bits, &value, 8);
  put_u64(out, bits);
}

void put_string(std::ostream& out, const std::string& s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char bytes[4];
  if (!in.read(reinterpret_cast<char*>(bytes), 4)) throw DataError("truncated index file");
  std::uint32_t value = 0;
  for (int i = 0; i < 4; ++i) value |= static_cast<std::uint32_t>(bytes[i]) << (8 * i);
  return value;
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char bytes[8];
  if (!in.read(reinterpret_cast<char*>(bytes), 8)) throw DataError("truncated index file");
  std::uint64_t value = 0;
  for (int i = 0; i < 8; ++i) value |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return value;
}

double get_f64(std::istream& in) {
  std::uint64_t bits = get_u64(in);
  double value;
  std::memcpy(&value, &bits, 8);
  return value;
}

std::string get_string(std::istream& in) {
  std::uint32_t size = get_u32(in);
  std::string s(size, '\0');
  if (size > 0 && !in.read(s.data(), size)) throw DataError("truncated index file");
  return s;
}

}  // namespace

void Index::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / "index.bin", std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write index file in " + dir.string());

  out.write(kMagic, 4);
  put_u32(out, kFormatVersion);
  put_u64(out, pipeline_hash_);

  put_f64(out, stats_.avg_doc_length);
  put_u64(out, stats_.total_tokens);

  put_u64(out, docs_.size());
  for (const auto& doc : docs_) {
    put_string(out, doc.doc_id);
    put_u32(out, doc.length);
  }

  put_u64(out, terms_.size());
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    put_string(out, terms_[i]);
    put_u32(out, entries_[i].df);
    put_u64(out, entries_[i].cf);
    put_u64(out, entries_[i].offset);
  }

  put_u64(out, postings_.size());
  for (const auto& posting : postings_) {
    put_u32(out, posting.doc_ordinal);
    put_u32(out, posting.tf);
  }

  put_u64(out, forward_.size());
  for (const auto& item : forward_) {
    put_u32(out, item.term_id);
    put_u32(out, item.tf);
  }
  for (std::size_t i = 0; i < docs_.size() + 1; ++i) put_u64(out, forward_offsets_[i]);

  if (!out) throw DataError("failed writing index file in " + dir.string());
  out.close();

  std::ofstream manifest(dir / "manifest.txt", std::ios::trunc);
  manifest.precision(17);
  manifest << "format_version=" << kFormatVersion << "\n"
           << "N=" << stats_.num_docs << "\n"
           << "avg_l=" << stats_.avg_doc_length << "\n"
           << "pipeline_hash=" << pipeline_hash_ << "\n";
}

Index Index::load(const std::filesystem::path& dir) {
  std::ifstream in(dir / "index.bin", std::ios::binary);
  if (!in) throw DataError("cannot open index file in " + dir.string());

  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
    throw DataError("not an index file: " + (dir / "index.bin").string());
  std::uint32_t version = get_u32(in);
  if (version != kFormatVersion)
    throw DataError("index format version mismatch: expected " +
                    std::to_string(kFormatVersion) + ", found " + std::to_string(version));

  Index index;
  index.pipeline_hash_ = get_u64(in);
  index.stats_.avg_doc_length = get_f64(in);
  index.stats_.total_tokens = get_u64(in);

  std::uint64_t num_docs = get_u64(in);
  index.docs_.reserve(num_docs);
  for (std::uint64_t i = 0; i < num_docs; ++i) {
    DocEntry doc;
    doc.doc_id = get_string(in);
    doc.length = get_u32(in);
    index.ordinals_.emplace(doc.doc_id, static_cast<std::uint32_t>(i));
    index.docs_.push_back(std::move(doc));
  }

  std::uint64_t num_terms = get_u64(in);
  index.terms_.reserve(num_terms);
  index.entries_.reserve(num_terms);
  for (std::uint64_t i = 0; i < num_terms; ++i) {
    std::string term = get_string(in);
    TermEntry entry;
    entry.df = get_u32(in);
    entry.cf = get_u64(in);
    entry.offset = get_u64(in);
    index.term_ids_.emplace(term, static_cast<std::uint32_t>(i));
    index.terms_.push_back(std::move(term));
    index.entries_.push_back(entry);
  }

  std::uint64_t num_postings = get_u64(in);
  index.postings_.reserve(num_postings);
  for (std::uint64_t i = 0; i < num_postings; ++i) {
    Posting posting;
    posting.doc_ordinal = get_u32(in);
    posting.tf = get_u32(in);
    index.postings_.push_back(posting);
  }

  std::uint64_t num_forward = get_u64(in);
  index.forward_.reserve(num_forward);
  for (std::uint64_t i = 0; i < num_forward; ++i) {
    TermCount item;
    item.term_id = get_u32(in);
    item.tf = get_u32(in);
    index.forward_.push_back(item);
  }
  index.forward_offsets_.reserve(num_docs + 1);
  for (std::uint64_t i = 0; i < num_docs + 1; ++i)
    index.forward_offsets_.push_back(get_u64(in));

  for (std::size_t i = 0; i < index.entries_.size(); ++i)
    if (index.entries_[i].offset + index.entries_[i].df > index.postings_.size())
      throw DataError("corrupt index: postings overrun for term " + index.terms_[i]);
  if (index.forward_offsets_.empty() || index.forward_offsets_.back() != index.forward_.size())
    throw DataError("corrupt index: forward section mismatch");

  index.stats_.num_docs = index.docs_.size();
  index.stats_.vocab_size = index.terms_.size();
  return index;
}

}  // namespace semrank

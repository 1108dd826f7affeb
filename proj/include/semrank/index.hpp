#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "semrank/corpus.hpp"

namespace semrank {

struct Posting {
  std::uint32_t doc_ordinal = 0;
  std::uint32_t tf = 0;
};

/// (term id, frequency) pair of a document's forward entry.
struct TermCount {
  std::uint32_t term_id = 0;
  std::uint32_t tf = 0;
};

struct CollectionStats {
  std::uint64_t num_docs = 0;
  double avg_doc_length = 0.0;
  std::uint64_t total_tokens = 0;
  std::uint64_t vocab_size = 0;
};

struct DocEntry {
  std::string doc_id;
  std::uint32_t length = 0;
};

/// Inverted index plus forward term lists and the collection statistics every
/// scoring formula consumes. Immutable once built or loaded; safe for
/// concurrent readers. Doc ordinals follow corpus order and drive all
/// downstream tie-breaking; term ids follow sorted term order.
class Index {
 public:
  static Index build(const std::vector<Document>& docs, const PipelineConfig& config);

  /// (document frequency, postings sorted by ordinal); unknown term -> (0, {}).
  std::pair<std::uint32_t, std::span<const Posting>> lookup(std::string_view term) const;

  /// Total occurrences of the term in the collection (for p(q|C)).
  std::uint64_t collection_frequency(std::string_view term) const;
  std::uint64_t collection_frequency(std::uint32_t term_id) const;

  std::optional<std::uint32_t> term_id(std::string_view term) const;
  const std::string& term(std::uint32_t term_id) const { return terms_.at(term_id); }
  std::uint32_t document_frequency(std::uint32_t term_id) const;

  /// Distinct terms of a document with frequencies, in term-id order.
  std::span<const TermCount> document_terms(std::uint32_t doc_ordinal) const;

  const CollectionStats& stats() const { return stats_; }
  const std::vector<DocEntry>& documents() const { return docs_; }
  const DocEntry& document(std::uint32_t ordinal) const { return docs_.at(ordinal); }
  std::optional<std::uint32_t> ordinal_of(std::string_view doc_id) const;
  std::uint64_t pipeline_hash() const { return pipeline_hash_; }
  std::size_t vocabulary_size() const { return terms_.size(); }

  /// Writes <dir>/index.bin (versioned, little-endian, length-prefixed
  /// sections) plus <dir>/manifest.txt.
  void save(const std::filesystem::path& dir) const;
  static Index load(const std::filesystem::path& dir);

  static constexpr std::uint32_t kFormatVersion = 1;

 private:
  struct TermEntry {
    std::uint32_t df = 0;
    std::uint64_t cf = 0;
    std::uint64_t offset = 0;  // into postings_
  };

  std::vector<std::string> terms_;  // sorted; position = term id
  std::vector<TermEntry> entries_;
  std::unordered_map<std::string, std::uint32_t> term_ids_;
  std::vector<Posting> postings_;
  std::vector<TermCount> forward_;
  std::vector<std::uint64_t> forward_offsets_;  // docs + 1 entries
  std::vector<DocEntry> docs_;
  std::unordered_map<std::string, std::uint32_t> ordinals_;
  CollectionStats stats_;
  std::uint64_t pipeline_hash_ = 0;
};

}  // namespace semrank

#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "semrank/pipeline.hpp"

namespace semrank {

struct Document {
  std::string doc_id;       // TREC DOCNO, unique within a corpus
  std::string text;         // concatenated body fields, tags stripped
  std::size_t length = 0;   // token count under the corpus pipeline
};

struct Topic {
  int topic_id = 0;
  std::string title;
  std::vector<std::string> terms;     // pipeline-processed title terms, with repeats
  std::map<std::string, double> qtf;  // term -> frequency; real-valued after expansion
  bool expanded = false;              // set by PRF expansion (qtf holds weights)
};

/// Graded relevance judgments. Lookup of an unjudged pair is distinct from
/// a judged grade of 0.
class Qrels {
 public:
  void add(int topic_id, const std::string& doc_id, int grade);
  std::optional<int> grade(int topic_id, const std::string& doc_id) const;
  bool relevant(int topic_id, const std::string& doc_id) const;
  std::size_t num_relevant(int topic_id) const;
  /// Positive grades of the topic, best first (the ideal-ranking gains).
  std::vector<int> positive_grades(int topic_id) const;
  /// All judgments of one topic, doc_id-sorted.
  const std::map<std::string, int>& judgments(int topic_id) const;
  std::vector<int> topics() const;  // sorted
  std::size_t size() const;

 private:
  std::map<int, std::map<std::string, int>> judgments_;
};

enum class DocFormat { trec_sgml, jsonl };
enum class TopicFormat { trec_sgml, tsv };

/// Removes <script>/<style> blocks wholesale, strips remaining tags and
/// decodes the five named XML entities.
std::string strip_html(std::string_view text);

/// Parses TREC <DOC>/<DOCNO>/<TEXT> blocks or JSONL records ({"doc_id","text"})
/// into Documents, stripping HTML and filling `length` under `config`.
/// Throws DataError on malformed blocks (with byte offset) and duplicate ids.
std::vector<Document> parse_trec_docs(std::istream& stream, DocFormat format,
                                      const PipelineConfig& config);

/// Parses TREC topic SGML (<top>/<num>/<title>) or "id<TAB>title" lines.
/// Only the title field is retained; terms come from the corpus pipeline.
std::vector<Topic> parse_topics(std::istream& stream, TopicFormat format,
                                const PipelineConfig& config);

/// Parses "topic 0 docno grade" lines. Later duplicates overwrite earlier
/// ones; the overwrite count is returned through `overwrites` when non-null.
Qrels parse_qrels(std::istream& stream, std::size_t* overwrites = nullptr);

Topic make_topic(int topic_id, const std::string& title, const PipelineConfig& config);

}  // namespace semrank

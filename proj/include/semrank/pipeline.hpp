#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace semrank {

enum class Stemmer { none, porter };

/// Text-processing configuration shared by indexing, topic parsing and
/// embedding training. The same config applied to the same text always
/// yields the same term sequence; the hash() digest is recorded in index
/// manifests so mismatched pipelines can be detected.
struct PipelineConfig {
  std::unordered_set<std::string> stopwords;
  Stemmer stemmer = Stemmer::porter;
  bool lowercase = true;

  /// Bundled English stopword list, Porter stemming, lowercasing.
  static PipelineConfig standard();

  /// Stable digest over stemmer, lowercase flag and the stopword set.
  std::uint64_t hash() const;
};

/// Porter's English stemmer (the reference implementation of the algorithm,
/// including its small departures from the 1980 paper). Expects a lowercase
/// word; words of length <= 2 are returned unchanged.
std::string porter_stem(std::string_view word);

/// The bundled stopword list (matches data/stopwords.txt).
const std::vector<std::string>& standard_stopwords();

/// One stopword per line; blank lines and lines starting with '#' ignored.
std::unordered_set<std::string> load_stopwords(const std::string& path);

/// Splits text into maximal runs of ASCII letters and digits, lowercases
/// (if configured), drops stopwords, then stems. Deterministic; empty text
/// yields an empty sequence.
std::vector<std::string> tokenize(std::string_view text, const PipelineConfig& config);

}  // namespace semrank

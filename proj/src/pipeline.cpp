#include "semrank/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "semrank/errors.hpp"

namespace semrank {

PipelineConfig PipelineConfig::standard() {
  PipelineConfig config;
  const auto& words = standard_stopwords();
  config.stopwords.insert(words.begin(), words.end());
  return config;
}

std::uint64_t PipelineConfig::hash() const {
  // FNV-1a over a canonical rendering of the config.
  constexpr std::uint64_t offset = 1469598103934665603ULL;
  constexpr std::uint64_t prime = 1099511628211ULL;
  std::uint64_t h = offset;
  auto mix = [&](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= prime;
    }
    h ^= 0xff;
    h *= prime;
  };
  mix(stemmer == Stemmer::porter ? "stemmer=porter" : "stemmer=none");
  mix(lowercase ? "lowercase=1" : "lowercase=0");
  std::vector<std::string_view> sorted(stopwords.begin(), stopwords.end());
  std::sort(sorted.begin(), sorted.end());
  for (auto word : sorted) mix(word);
  return h;
}

std::unordered_set<std::string> load_stopwords(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open stopword list: " + path);
  std::unordered_set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    words.insert(line);
  }
  return words;
}

std::vector<std::string> tokenize(std::string_view text, const PipelineConfig& config) {
  std::vector<std::string> terms;
  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    if (!config.stopwords.contains(token)) {
      if (config.stemmer == Stemmer::porter)
        terms.push_back(porter_stem(token));
      else
        terms.push_back(token);
    }
    token.clear();
  };
  for (unsigned char c : text) {
    if (std::isalnum(c) && c < 0x80) {
      token.push_back(config.lowercase ? static_cast<char>(std::tolower(c))
                                       : static_cast<char>(c));
    } else {
      flush();
    }
  }
  flush();
  return terms;
}

}  // namespace semrank

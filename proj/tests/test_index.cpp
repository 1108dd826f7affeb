#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <random>

#include "semrank/errors.hpp"
#include "semrank/index.hpp"

using namespace semrank;

namespace {

PipelineConfig raw_config() {
  PipelineConfig config;
  config.stemmer = Stemmer::none;
  return config;
}

std::vector<Document> two_docs() {
  return {{"doc0", "a b a", 0}, {"doc1", "b c", 0}};
}

std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("semrank_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("builds statistics from a 2-document corpus") {
  Index index = Index::build(two_docs(), raw_config());
  CHECK(index.stats().num_docs == 2);
  CHECK(index.stats().avg_doc_length == doctest::Approx(2.5));
  CHECK(index.stats().total_tokens == 5);
  CHECK(index.stats().vocab_size == 3);

  auto [df_a, postings_a] = index.lookup("a");
  CHECK(df_a == 1);
  REQUIRE(postings_a.size() == 1);
  CHECK(postings_a[0].doc_ordinal == 0);
  CHECK(postings_a[0].tf == 2);

  auto [df_b, postings_b] = index.lookup("b");
  CHECK(df_b == 2);
  REQUIRE(postings_b.size() == 2);
  CHECK(postings_b[0].doc_ordinal == 0);
  CHECK(postings_b[1].doc_ordinal == 1);

  CHECK(index.collection_frequency("a") == 2);
  CHECK(index.ordinal_of("doc1") == 1);
}

TEST_CASE("unknown term lookups are empty") {
  Index index = Index::build(two_docs(), raw_config());
  auto [df, postings] = index.lookup("zebra");
  CHECK(df == 0);
  CHECK(postings.empty());
  CHECK(index.collection_frequency("zebra") == 0);
}

TEST_CASE("single-document corpus") {
  Index index = Index::build({{"only", "x", 0}}, raw_config());
  CHECK(index.stats().num_docs == 1);
  CHECK(index.stats().avg_doc_length == doctest::Approx(1.0));
  CHECK(index.lookup("x").first == 1);
}

TEST_CASE("empty corpus builds an empty index flagged unusable") {
  Index index = Index::build({}, raw_config());
  CHECK(index.stats().num_docs == 0);
}

TEST_CASE("duplicate doc_id is an error") {
  std::vector<Document> docs = {{"dup", "a", 0}, {"dup", "b", 0}};
  CHECK_THROWS_WITH_AS(Index::build(docs, raw_config()), doctest::Contains("dup"), DataError);
}

TEST_CASE("stemmed lookup finds postings stored under the stem") {
  PipelineConfig config = PipelineConfig::standard();
  Index index = Index::build({{"d", "the summer olympics", 0}}, config);
  auto stemmed = tokenize("olympics", config);
  REQUIRE(stemmed.size() == 1);
  CHECK(index.lookup(stemmed[0]).first == 1);
  CHECK(index.lookup("olymp").first == 1);
}

TEST_CASE("document lengths match the pipeline") {
  PipelineConfig config = PipelineConfig::standard();
  std::vector<Document> docs = {{"d1", "The Summer Olympics were great", 0},
                                {"d2", "the of and", 0}};
  Index index = Index::build(docs, config);
  for (std::uint32_t i = 0; i < docs.size(); ++i)
    CHECK(index.document(i).length == tokenize(docs[i].text, config).size());
}

TEST_CASE("forward index mirrors postings") {
  Index index = Index::build(two_docs(), raw_config());
  auto terms = index.document_terms(0);
  REQUIRE(terms.size() == 2);
  std::uint64_t total = 0;
  for (std::uint32_t doc = 0; doc < index.stats().num_docs; ++doc)
    for (const TermCount& item : index.document_terms(doc)) total += item.tf;
  CHECK(total == index.stats().total_tokens);
}

TEST_CASE("df and cf invariants hold on a random corpus") {
  std::mt19937 rng(7);
  std::vector<Document> docs;
  const char* vocab[] = {"red", "green", "blue", "cyan", "lime", "teal"};
  for (int d = 0; d < 40; ++d) {
    std::string text;
    int len = static_cast<int>(rng() % 30);
    for (int t = 0; t < len; ++t) {
      text += vocab[rng() % 6];
      text += ' ';
    }
    docs.push_back({"doc" + std::to_string(d), text, 0});
  }
  Index index = Index::build(docs, raw_config());
  std::uint64_t cf_sum = 0;
  for (const char* term : vocab) {
    auto [df, postings] = index.lookup(term);
    CHECK(df == postings.size());
    std::uint64_t cf = 0;
    for (const auto& posting : postings) cf += posting.tf;
    CHECK(cf == index.collection_frequency(term));
    cf_sum += cf;
  }
  CHECK(cf_sum == index.stats().total_tokens);
}

TEST_CASE("save/load round-trip is observationally identical on random corpora") {
  for (unsigned seed : {11u, 23u, 47u, 89u}) {
  auto dir = temp_dir("roundtrip");
  std::mt19937 rng(seed);
  std::vector<Document> docs;
  const char* vocab[] = {"alpha", "beta", "gamma", "delta"};
  int num_docs = 5 + static_cast<int>(rng() % 40);
  for (int d = 0; d < num_docs; ++d) {
    std::string text;
    for (unsigned t = 0; t < 1 + rng() % 12; ++t) {
      text += vocab[rng() % 4];
      text += ' ';
    }
    docs.push_back({"d" + std::to_string(d), text, 0});
  }
  Index original = Index::build(docs, raw_config());
  original.save(dir);
  Index loaded = Index::load(dir);

  CHECK(loaded.stats().num_docs == original.stats().num_docs);
  CHECK(loaded.stats().avg_doc_length == original.stats().avg_doc_length);  // bit-identical
  CHECK(loaded.stats().total_tokens == original.stats().total_tokens);
  CHECK(loaded.stats().vocab_size == original.stats().vocab_size);
  CHECK(loaded.pipeline_hash() == original.pipeline_hash());
  for (const char* term : vocab) {
    auto [df_a, postings_a] = original.lookup(term);
    auto [df_b, postings_b] = loaded.lookup(term);
    CHECK(df_a == df_b);
    REQUIRE(postings_a.size() == postings_b.size());
    for (std::size_t i = 0; i < postings_a.size(); ++i) {
      CHECK(postings_a[i].doc_ordinal == postings_b[i].doc_ordinal);
      CHECK(postings_a[i].tf == postings_b[i].tf);
    }
  }
  for (std::uint32_t d = 0; d < original.stats().num_docs; ++d) {
    CHECK(original.document(d).doc_id == loaded.document(d).doc_id);
    CHECK(original.document(d).length == loaded.document(d).length);
  }
  std::filesystem::remove_all(dir);
  }
}

TEST_CASE("truncated index file fails to load") {
  auto dir = temp_dir("truncated");
  Index::build(two_docs(), raw_config()).save(dir);
  auto file = dir / "index.bin";
  auto size = std::filesystem::file_size(file);
  std::filesystem::resize_file(file, size / 2);
  CHECK_THROWS_AS(Index::load(dir), DataError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("format version mismatch is a named error") {
  auto dir = temp_dir("version");
  Index::build(two_docs(), raw_config()).save(dir);
  auto file = dir / "index.bin";
  {
    std::FILE* f = std::fopen(file.c_str(), "r+b");
    REQUIRE(f != nullptr);
    std::fseek(f, 4, SEEK_SET);  // version field follows the magic
    unsigned char bogus[4] = {9, 0, 0, 0};
    std::fwrite(bogus, 1, 4, f);
    std::fclose(f);
  }
  CHECK_THROWS_WITH_AS(Index::load(dir), doctest::Contains("expected 1, found 9"), DataError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("manifest records stats and pipeline hash") {
  auto dir = temp_dir("manifest");
  PipelineConfig config = PipelineConfig::standard();
  Index::build({{"d", "summer games", 0}}, config).save(dir);
  std::ifstream manifest(dir / "manifest.txt");
  std::string contents((std::istreambuf_iterator<char>(manifest)),
                       std::istreambuf_iterator<char>());
  CHECK(contents.find("format_version=1") != std::string::npos);
  CHECK(contents.find("N=1") != std::string::npos);
  CHECK(contents.find("pipeline_hash=" + std::to_string(config.hash())) != std::string::npos);
  std::filesystem::remove_all(dir);
}

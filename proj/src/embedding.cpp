#include "semrank/embedding.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "semrank/errors.hpp"

namespace semrank {

void VectorStore::set_dim(int dim) {
  if (dim_ != 0 && dim_ != dim) throw DataError("vector store dimensionality mismatch");
  dim_ = dim;
}

namespace {

void check_dim(int dim, const Eigen::VectorXd& v, std::string_view what) {
  if (v.size() != dim)
    throw DataError("vector store dimensionality mismatch for " + std::string(what));
}

}  // namespace

void VectorStore::put_word(const std::string& term, Eigen::VectorXd v) {
  if (dim_ == 0) dim_ = static_cast<int>(v.size());
  check_dim(dim_, v, term);
  words_[term] = std::move(v);
}

void VectorStore::put_context(const std::string& term, Eigen::VectorXd v) {
  if (dim_ == 0) dim_ = static_cast<int>(v.size());
  check_dim(dim_, v, term);
  contexts_[term] = std::move(v);
}

void VectorStore::put_doc(const std::string& doc_id, Eigen::VectorXd v) {
  if (dim_ == 0) dim_ = static_cast<int>(v.size());
  check_dim(dim_, v, doc_id);
  docs_[doc_id] = std::move(v);
}

const Eigen::VectorXd* VectorStore::word(const std::string& term) const {
  auto it = words_.find(term);
  return it == words_.end() ? nullptr : &it->second;
}

const Eigen::VectorXd* VectorStore::doc(const std::string& doc_id) const {
  auto it = docs_.find(doc_id);
  return it == docs_.end() ? nullptr : &it->second;
}

VectorStore VectorStore::unit_normalized(std::vector<std::string>* zero_keys) const {
  VectorStore out(dim_);
  auto normalize_into = [&](const std::map<std::string, Eigen::VectorXd>& src,
                            std::map<std::string, Eigen::VectorXd>& dst) {
    for (const auto& [key, v] : src) {
      bool was_zero = false;
      dst[key] = normalize_unit(v, &was_zero);
      if (was_zero && zero_keys) zero_keys->push_back(key);
    }
  };
  normalize_into(words_, out.words_);
  normalize_into(contexts_, out.contexts_);
  normalize_into(docs_, out.docs_);
  return out;
}

TrainingCorpus build_training_corpus(const std::vector<RankedList>& runs,
                                     const std::vector<Document>& corpus, std::size_t top_n,
                                     const PipelineConfig& config) {
  if (top_n < 1) throw DataError("training corpus needs top_n >= 1");
  std::unordered_map<std::string, const Document*> by_id;
  by_id.reserve(corpus.size());
  for (const auto& doc : corpus) by_id.emplace(doc.doc_id, &doc);

  TrainingCorpus training;
  std::unordered_map<std::string, bool> seen;
  for (const RankedList& run : runs) {
    std::size_t take = std::min(top_n, run.entries.size());
    auto& contributed = training.provenance[run.topic_id];
    for (std::size_t i = 0; i < take; ++i) {
      const std::string& doc_id = run.entries[i].doc_id;
      contributed.push_back(doc_id);
      if (seen.emplace(doc_id, true).second) {
        auto it = by_id.find(doc_id);
        if (it == by_id.end())
          throw DataError("ranked document missing from corpus: " + doc_id);
        training.documents.push_back(*it->second);
        training.tokens.push_back(tokenize(it->second->text, config));
      }
    }
  }
  return training;
}

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

PairGradients sgns_pair_objective(const Eigen::VectorXd& v_word,
                                  const Eigen::VectorXd& v_context,
                                  const std::vector<Eigen::VectorXd>& negative_contexts) {
  const auto dim = v_word.size();
  if (v_context.size() != dim)
    throw DataError("sgns_pair_objective: context dimensionality mismatch");
  PairGradients out;
  double s = sigmoid(v_word.dot(v_context));
  out.loss = -std::log(s);
  out.grad_word = -(1.0 - s) * v_context;
  out.grad_context = -(1.0 - s) * v_word;

  out.grad_negatives.reserve(negative_contexts.size());
  for (const auto& v_neg : negative_contexts) {
    if (v_neg.size() != dim)
      throw DataError("sgns_pair_objective: negative dimensionality mismatch");
    double sn = sigmoid(v_word.dot(v_neg));
    out.loss += -std::log(1.0 - sn);
    out.grad_word += sn * v_neg;
    out.grad_negatives.push_back(sn * v_word);
  }
  return out;
}

namespace {

// 53-bit uniform in [0, 1).
double next_uniform(std::uint64_t& state) {
  // splitmix64; avoids implementation-defined distribution behavior so runs
  // are reproducible across standard libraries.
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return static_cast<double>(z >> 11) * (1.0 / 9007199254740992.0);
}

struct Vocab {
  std::vector<std::string> terms;  // frequency-descending, then lexicographic
  std::vector<std::uint64_t> counts;
  std::unordered_map<std::string, std::uint32_t> ids;
  std::vector<double> noise_cdf;  // unigram^0.75

  std::uint32_t sample_noise(std::uint64_t& rng_state) const {
    double u = next_uniform(rng_state) * noise_cdf.back();
    auto it = std::upper_bound(noise_cdf.begin(), noise_cdf.end(), u);
    auto idx = static_cast<std::size_t>(it - noise_cdf.begin());
    return static_cast<std::uint32_t>(std::min(idx, noise_cdf.size() - 1));
  }
};

Vocab build_vocab(const TrainingCorpus& corpus, int min_count) {
  std::unordered_map<std::string, std::uint64_t> counts;
  for (const auto& doc : corpus.tokens)
    for (const auto& term : doc) ++counts[term];
  std::vector<std::pair<std::string, std::uint64_t>> kept;
  for (const auto& [term, count] : counts)
    if (count >= static_cast<std::uint64_t>(min_count)) kept.push_back({term, count});
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  Vocab vocab;
  vocab.terms.reserve(kept.size());
  vocab.counts.reserve(kept.size());
  double running = 0.0;
  for (const auto& [term, count] : kept) {
    vocab.ids.emplace(term, static_cast<std::uint32_t>(vocab.terms.size()));
    vocab.terms.push_back(term);
    vocab.counts.push_back(count);
    running += std::pow(static_cast<double>(count), 0.75);
    vocab.noise_cdf.push_back(running);
  }
  return vocab;
}

class Trainer {
 public:
  Trainer(const TrainingCorpus& corpus, const EmbeddingParams& params)
      : corpus_(corpus), params_(params), vocab_(build_vocab(corpus, params.min_count)) {
    if (params.dim < 1) throw DataError("embedding dim must be >= 1");
    if (vocab_.terms.empty())
      throw DataError("empty vocabulary after min_count pruning; nothing to train");
    streams_.reserve(corpus.tokens.size());
    total_positions_ = 0;
    for (const auto& doc : corpus.tokens) {
      std::vector<std::uint32_t> stream;
      stream.reserve(doc.size());
      for (const auto& term : doc) {
        auto it = vocab_.ids.find(term);
        if (it != vocab_.ids.end()) stream.push_back(it->second);
      }
      total_positions_ += stream.size();
      streams_.push_back(std::move(stream));
    }

    auto vocab_size = static_cast<Eigen::Index>(vocab_.terms.size());
    words_ = Eigen::MatrixXd(params.dim, vocab_size);
    std::uint64_t init_state = params.seed;
    for (Eigen::Index v = 0; v < vocab_size; ++v)
      for (Eigen::Index d = 0; d < params.dim; ++d)
        words_(d, v) = (next_uniform(init_state) - 0.5) / params.dim;
    contexts_ = Eigen::MatrixXd::Zero(params.dim, vocab_size);
    if (params.mode == EmbeddingMode::paragraph_vector)
      paragraphs_ = Eigen::MatrixXd::Zero(params.dim, static_cast<Eigen::Index>(streams_.size()));
  }

  void run(std::vector<double>* epoch_loss) {
    for (int epoch = 0; epoch < params_.epochs; ++epoch) {
      double loss = params_.threads > 1 ? run_epoch_parallel(epoch) : run_epoch_serial(epoch);
      std::cerr << "epoch " << (epoch + 1) << " loss " << loss << "\n";
      if (epoch_loss) epoch_loss->push_back(loss);
    }
  }

  VectorStore export_store() const {
    VectorStore store(params_.dim);
    for (std::size_t v = 0; v < vocab_.terms.size(); ++v) {
      store.put_word(vocab_.terms[v], words_.col(static_cast<Eigen::Index>(v)));
      store.put_context(vocab_.terms[v], contexts_.col(static_cast<Eigen::Index>(v)));
    }
    if (params_.mode == EmbeddingMode::paragraph_vector)
      for (std::size_t d = 0; d < streams_.size(); ++d)
        store.put_doc(corpus_.documents[d].doc_id,
                      paragraphs_.col(static_cast<Eigen::Index>(d)));
    return store;
  }

 private:
  double learning_rate() const {
    double total = static_cast<double>(total_positions_) * params_.epochs + 1.0;
    double progress = static_cast<double>(positions_done_.load(std::memory_order_relaxed));
    return std::max(params_.initial_lr * (1.0 - progress / total), params_.initial_lr * 1e-4);
  }

  // One (center, target) positive with sampled negatives; returns summed loss.
  // `target` addresses a context-word column or a paragraph column.
  double train_pair(std::uint32_t word_id, double* target, bool target_is_word,
                    std::uint32_t target_word_id, std::uint64_t& rng_state, double lr) {
    const int dim = params_.dim;
    Eigen::Map<Eigen::VectorXd> w(words_.col(word_id).data(), dim);
    Eigen::Map<Eigen::VectorXd> t(target, dim);
    Eigen::VectorXd word_update = Eigen::VectorXd::Zero(dim);

    double s = sigmoid(w.dot(t));
    double loss = -std::log(s);
    word_update += lr * (1.0 - s) * t;
    t += lr * (1.0 - s) * w;

    for (int n = 0; n < params_.negatives; ++n) {
      std::uint32_t sample = vocab_.sample_noise(rng_state);
      if (target_is_word && sample == target_word_id) continue;
      Eigen::Map<Eigen::VectorXd> neg(contexts_.col(sample).data(), dim);
      double sn = sigmoid(w.dot(neg));
      loss += -std::log(1.0 - sn);
      word_update -= lr * sn * neg;
      neg -= lr * sn * w;
    }
    w += word_update;
    return loss;
  }

  // Processes one document; returns (loss, pair count).
  std::pair<double, std::uint64_t> train_document(std::size_t doc, std::uint64_t& rng_state) {
    const auto& stream = streams_[doc];
    const bool with_paragraph = params_.mode == EmbeddingMode::paragraph_vector;
    double loss = 0.0;
    std::uint64_t pairs = 0;
    auto size = static_cast<std::ptrdiff_t>(stream.size());
    for (std::ptrdiff_t i = 0; i < size; ++i) {
      double lr = learning_rate();
      std::uint32_t center = stream[static_cast<std::size_t>(i)];
      std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - params_.window);
      std::ptrdiff_t hi = std::min<std::ptrdiff_t>(size - 1, i + params_.window);
      for (std::ptrdiff_t j = lo; j <= hi; ++j) {
        if (j == i) continue;
        std::uint32_t context = stream[static_cast<std::size_t>(j)];
        loss += train_pair(center, contexts_.col(context).data(), true, context, rng_state, lr);
        ++pairs;
      }
      if (with_paragraph) {
        loss += train_pair(center, paragraphs_.col(static_cast<Eigen::Index>(doc)).data(),
                           false, 0, rng_state, lr);
        ++pairs;
      }
      positions_done_.fetch_add(1, std::memory_order_relaxed);
    }
    return {loss, pairs};
  }

  double run_epoch_serial(int epoch) {
    std::uint64_t rng_state = params_.seed ^ (0xd1b54a32d192ed03ULL * (epoch + 1));
    double loss = 0.0;
    std::uint64_t pairs = 0;
    for (std::size_t doc = 0; doc < streams_.size(); ++doc) {
      auto [doc_loss, doc_pairs] = train_document(doc, rng_state);
      loss += doc_loss;
      pairs += doc_pairs;
    }
    return pairs > 0 ? loss / static_cast<double>(pairs) : 0.0;
  }

  double run_epoch_parallel(int epoch) {
    int threads = std::min<int>(params_.threads, static_cast<int>(streams_.size()));
    threads = std::max(threads, 1);
    std::vector<double> losses(threads, 0.0);
    std::vector<std::uint64_t> pairs(threads, 0);
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        std::uint64_t rng_state =
            params_.seed ^ (0xd1b54a32d192ed03ULL * (epoch + 1)) ^ (0x2545f4914f6cdd1dULL * (t + 1));
        for (std::size_t doc = t; doc < streams_.size(); doc += threads) {
          auto [doc_loss, doc_pairs] = train_document(doc, rng_state);
          losses[t] += doc_loss;
          pairs[t] += doc_pairs;
        }
      });
    }
    for (auto& thread : pool) thread.join();
    double loss = 0.0;
    std::uint64_t total_pairs = 0;
    for (int t = 0; t < threads; ++t) {
      loss += losses[t];
      total_pairs += pairs[t];
    }
    return total_pairs > 0 ? loss / static_cast<double>(total_pairs) : 0.0;
  }

  const TrainingCorpus& corpus_;
  EmbeddingParams params_;
  Vocab vocab_;
  std::vector<std::vector<std::uint32_t>> streams_;
  std::uint64_t total_positions_ = 0;
  std::atomic<std::uint64_t> positions_done_{0};
  Eigen::MatrixXd words_;
  Eigen::MatrixXd contexts_;
  Eigen::MatrixXd paragraphs_;
};

VectorStore train(const TrainingCorpus& corpus, const EmbeddingParams& params,
                  std::vector<double>* epoch_loss) {
  if (corpus.tokens.size() != corpus.documents.size())
    throw DataError("training corpus token streams out of sync with documents");
  if (corpus.documents.empty()) throw DataError("empty training corpus");
  Trainer trainer(corpus, params);
  trainer.run(epoch_loss);
  return trainer.export_store();
}

}  // namespace

VectorStore train_skipgram(const TrainingCorpus& corpus, const EmbeddingParams& params,
                           std::vector<double>* epoch_loss) {
  EmbeddingParams p = params;
  p.mode = EmbeddingMode::skipgram;
  return train(corpus, p, epoch_loss);
}

VectorStore train_paragraph_vectors(const TrainingCorpus& corpus, const EmbeddingParams& params,
                                    std::vector<double>* epoch_loss) {
  EmbeddingParams p = params;
  p.mode = EmbeddingMode::paragraph_vector;
  return train(corpus, p, epoch_loss);
}

double tfidf_weight(double tf, std::uint64_t df, std::uint64_t num_docs) {
  if (tf == 0.0) return 0.0;
  return tf * idf(num_docs, df);
}

Eigen::VectorXd doc_vector_term_addition(std::uint32_t doc_ordinal, const VectorStore& vectors,
                                         const Index& index, bool* all_skipped) {
  if (vectors.words().empty()) throw DataError("term addition needs word vectors");
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(vectors.dim());
  bool any = false;
  for (const TermCount& item : index.document_terms(doc_ordinal)) {
    const Eigen::VectorXd* v = vectors.word(index.term(item.term_id));
    if (!v) continue;
    any = true;
    sum += tfidf_weight(item.tf, index.document_frequency(item.term_id),
                        index.stats().num_docs) *
           (*v);
  }
  if (all_skipped) *all_skipped = !any;
  return sum;
}

std::map<std::string, double> doc_vector_tfidf_sparse(std::uint32_t doc_ordinal,
                                                      const Index& index) {
  std::map<std::string, double> weights;
  for (const TermCount& item : index.document_terms(doc_ordinal))
    weights[index.term(item.term_id)] = tfidf_weight(
        item.tf, index.document_frequency(item.term_id), index.stats().num_docs);
  return weights;
}

double cosine_sparse(const std::map<std::string, double>& a,
                     const std::map<std::string, double>& b) {
  double dot = 0.0;
  double norm_a = 0.0;
  double norm_b = 0.0;
  for (const auto& [term, weight] : a) norm_a += weight * weight;
  for (const auto& [term, weight] : b) norm_b += weight * weight;
  if (norm_a == 0.0 || norm_b == 0.0) return 0.0;
  auto it_a = a.begin();
  auto it_b = b.begin();
  while (it_a != a.end() && it_b != b.end()) {
    if (it_a->first < it_b->first) {
      ++it_a;
    } else if (it_b->first < it_a->first) {
      ++it_b;
    } else {
      dot += it_a->second * it_b->second;
      ++it_a;
      ++it_b;
    }
  }
  return dot / (std::sqrt(norm_a) * std::sqrt(norm_b));
}

Eigen::VectorXd normalize_unit(const Eigen::VectorXd& v, bool* was_zero) {
  double norm = v.norm();
  if (norm == 0.0) {
    if (was_zero) *was_zero = true;
    return v;
  }
  if (was_zero) *was_zero = false;
  return v / norm;
}

namespace {

void write_vector_file(const std::map<std::string, Eigen::VectorXd>& vectors, int dim,
                       const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write vector file: " + path.string());
  out << vectors.size() << " " << dim << "\n";
  char buffer[64];
  for (const auto& [key, v] : vectors) {
    out << key;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      std::snprintf(buffer, sizeof(buffer), " %.9g", v[i]);
      out << buffer;
    }
    out << "\n";
  }
  if (!out) throw DataError("failed writing vector file: " + path.string());
}

std::map<std::string, Eigen::VectorXd> read_vector_file(const std::filesystem::path& path,
                                                        int* dim_out) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open vector file: " + path.string());
  std::string header;
  if (!std::getline(in, header)) throw DataError("missing header in " + path.string());
  std::size_t count = 0;
  int dim = 0;
  if (std::sscanf(header.c_str(), "%zu %d", &count, &dim) != 2 || dim < 0)
    throw DataError("malformed header in " + path.string());
  std::map<std::string, Eigen::VectorXd> vectors;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string key;
    row >> key;
    Eigen::VectorXd v(dim);
    for (int i = 0; i < dim; ++i)
      if (!(row >> v[i]))
        throw DataError("row/dimension mismatch at line " + std::to_string(line_no) + " of " +
                        path.string());
    double extra;
    if (row >> extra)
      throw DataError("row/dimension mismatch at line " + std::to_string(line_no) + " of " +
                      path.string());
    vectors[key] = std::move(v);
  }
  if (vectors.size() != count)
    throw DataError("header announces " + std::to_string(count) + " rows but " +
                    std::to_string(vectors.size()) + " found in " + path.string());
  *dim_out = dim;
  return vectors;
}

}  // namespace

void save_vectors(const VectorStore& store, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_vector_file(store.words(), store.dim(), dir / "words.vec");
  write_vector_file(store.docs(), store.dim(), dir / "docs.vec");
}

VectorStore load_vectors(const std::filesystem::path& dir) {
  int word_dim = 0;
  auto words = read_vector_file(dir / "words.vec", &word_dim);
  VectorStore store(word_dim);
  for (auto& [key, v] : words) store.put_word(key, std::move(v));
  if (std::filesystem::exists(dir / "docs.vec")) {
    int doc_dim = 0;
    auto docs = read_vector_file(dir / "docs.vec", &doc_dim);
    if (!docs.empty() && !store.words().empty() && doc_dim != word_dim)
      throw DataError("word and document vector files disagree on dimensionality");
    if (store.dim() == 0) store.set_dim(doc_dim);
    for (auto& [key, v] : docs) store.put_doc(key, std::move(v));
  }
  return store;
}

}  // namespace semrank

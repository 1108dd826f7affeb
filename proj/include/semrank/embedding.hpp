#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "semrank/index.hpp"
#include "semrank/ranking.hpp"

namespace semrank {

enum class EmbeddingMode { skipgram, paragraph_vector };

struct EmbeddingParams {
  int dim = 300;
  int window = 10;
  int negatives = 5;
  int epochs = 5;
  int min_count = 5;
  double initial_lr = 0.025;
  std::uint64_t seed = 1;
  EmbeddingMode mode = EmbeddingMode::skipgram;
  int threads = 1;  // > 1 uses lock-free concurrent updates (run-dependent)
};

/// Dense word and document vectors sharing one dimensionality. Keys iterate
/// in sorted order so serialized stores are deterministic.
class VectorStore {
 public:
  VectorStore() = default;
  explicit VectorStore(int dim) : dim_(dim) {}

  int dim() const { return dim_; }
  void set_dim(int dim);

  void put_word(const std::string& term, Eigen::VectorXd v);
  void put_context(const std::string& term, Eigen::VectorXd v);
  void put_doc(const std::string& doc_id, Eigen::VectorXd v);

  const Eigen::VectorXd* word(const std::string& term) const;
  const Eigen::VectorXd* doc(const std::string& doc_id) const;

  const std::map<std::string, Eigen::VectorXd>& words() const { return words_; }
  const std::map<std::string, Eigen::VectorXd>& contexts() const { return contexts_; }
  const std::map<std::string, Eigen::VectorXd>& docs() const { return docs_; }

  /// Copy with every vector scaled to unit 2-norm; zero vectors are kept
  /// as-is and their keys reported through `zero_keys` when non-null.
  VectorStore unit_normalized(std::vector<std::string>* zero_keys = nullptr) const;

 private:
  int dim_ = 0;
  std::map<std::string, Eigen::VectorXd> words_;
  std::map<std::string, Eigen::VectorXd> contexts_;  // output projections (training-only)
  std::map<std::string, Eigen::VectorXd> docs_;
};

/// Deduplicated union of the top-ranked documents of a set of runs; the
/// training pool for locally trained embeddings.
struct TrainingCorpus {
  std::vector<Document> documents;                    // first-seen order
  std::vector<std::vector<std::string>> tokens;       // parallel to documents
  std::map<int, std::vector<std::string>> provenance;  // topic -> contributing docs
};

TrainingCorpus build_training_corpus(const std::vector<RankedList>& runs,
                                     const std::vector<Document>& corpus, std::size_t top_n,
                                     const PipelineConfig& config);

/// Skip-gram negative-sampling loss for one (word, context) pair:
///   loss = -log sigmoid(w.c) - sum_neg log sigmoid(-w.neg)
/// with exact analytic gradients for every input.
struct PairGradients {
  double loss = 0.0;
  Eigen::VectorXd grad_word;
  Eigen::VectorXd grad_context;
  std::vector<Eigen::VectorXd> grad_negatives;
};

PairGradients sgns_pair_objective(const Eigen::VectorXd& v_word, const Eigen::VectorXd& v_context,
                                  const std::vector<Eigen::VectorXd>& negative_contexts);

/// Trains skip-gram word vectors with negative sampling over every
/// (center, context) pair within `window` per position per epoch.
/// Deterministic for fixed seed with threads == 1. Per-epoch mean pair loss
/// is reported through `epoch_loss` when non-null and logged to stderr.
VectorStore train_skipgram(const TrainingCorpus& corpus, const EmbeddingParams& params,
                           std::vector<double>* epoch_loss = nullptr);

/// Same training loop with the document's paragraph id injected as an extra
/// context member for every center word; the trained paragraph-id embeddings
/// become the document vectors, word vectors are co-trained.
VectorStore train_paragraph_vectors(const TrainingCorpus& corpus, const EmbeddingParams& params,
                                    std::vector<double>* epoch_loss = nullptr);

/// tf * log2((N - df + 0.5) / (df + 0.5))
double tfidf_weight(double tf, std::uint64_t df, std::uint64_t num_docs);

/// Sum of tf-idf weighted word vectors over the document's distinct terms;
/// terms without vectors are skipped. Returns the zero vector (and sets
/// `all_skipped`) when nothing matches.
Eigen::VectorXd doc_vector_term_addition(std::uint32_t doc_ordinal, const VectorStore& vectors,
                                         const Index& index, bool* all_skipped = nullptr);

/// Sparse tf-idf document vector, term -> weight.
std::map<std::string, double> doc_vector_tfidf_sparse(std::uint32_t doc_ordinal,
                                                      const Index& index);

double cosine_sparse(const std::map<std::string, double>& a,
                     const std::map<std::string, double>& b);

/// v / ||v||; the zero vector is returned unchanged with `was_zero` set.
Eigen::VectorXd normalize_unit(const Eigen::VectorXd& v, bool* was_zero = nullptr);

/// word2vec text format ("count dim" header then one "key v1 .. v_dim" row
/// per vector, 9 significant digits). Word vectors in <dir>/words.vec, doc
/// vectors in the parallel <dir>/docs.vec.
void save_vectors(const VectorStore& store, const std::filesystem::path& dir);
VectorStore load_vectors(const std::filesystem::path& dir);

}  // namespace semrank

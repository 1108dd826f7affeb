#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "semrank/embedding.hpp"
#include "semrank/ranking.hpp"

namespace semrank {

/// Top-k documents of a ranking with their interpolation weights
/// (nonnegative, summing to 1).
struct FeedbackSet {
  int topic_id = 0;
  std::vector<std::pair<std::string, double>> members;  // (doc_id, baseline score)
  Eigen::VectorXd weights;
};

enum class DocVectorBackend { pv, add, tfidf_sparse };
enum class RerankMode { d2d, d2q };

struct RerankParams {
  double lambda = 0.35;
  std::size_t k = 30;  // |pseudo feedback set|
  DocVectorBackend backend = DocVectorBackend::pv;
  /// When set, candidates without vectors score as zero vectors (cosine 0
  /// against everything) instead of failing.
  bool allow_zero_vectors = false;
};

/// (s - min) / (max - min) elementwise; an all-equal input maps to all zeros.
std::vector<double> minmax_normalize(const std::vector<double>& scores);

/// Top-min(k, size) entries with weights derived from the baseline scores:
/// min-max normalized over the full list, restricted to the members, then
/// L1-normalized; uniform fallback when every member weight is zero.
FeedbackSet build_feedback_set(const RankedList& ranked, std::size_t k);

/// w^T (D^T d + 1) over unit-normalized columns; equals
/// sum_i w_i (cos(d, d_i) + 1), in [0, 2] when the weights sum to 1.
double sem_score(const Eigen::VectorXd& doc_vec, const Eigen::MatrixXd& feedback_matrix,
                 const Eigen::VectorXd& weights);

/// Unit-normalized sum of query-term word vectors with qtf multiplicity;
/// out-of-vocabulary terms are skipped (zero vector + flag when all are).
Eigen::VectorXd query_vector(const Topic& topic, const VectorStore& vectors,
                             bool* all_oov = nullptr);

/// Cosine of two unit vectors.
double d2q_score(const Eigen::VectorXd& doc_vec, const Eigen::VectorXd& query_vec);

/// Inputs the rerank operation draws on; which fields must be set depends on
/// the backend (pv: vectors; add: vectors + index; tfidf_sparse: index) and
/// mode (d2q additionally needs the topic).
struct RerankContext {
  const VectorStore* vectors = nullptr;
  const Index* index = nullptr;
  const Topic* topic = nullptr;
};

/// Re-scores the candidate list as lambda * R^ + (1 - lambda) * SEM^, both
/// min-max normalized over the candidates, and re-sorts. Pure re-ordering:
/// the output is a permutation of the input doc_ids. Ties keep the input
/// (baseline) order, which ranking functions produce in doc-ordinal order.
RankedList rerank(const RankedList& ranked, const RerankContext& context,
                  const RerankParams& params, RerankMode mode);

}  // namespace semrank

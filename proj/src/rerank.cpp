#include "semrank/rerank.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "semrank/errors.hpp"

namespace semrank {

std::vector<double> minmax_normalize(const std::vector<double>& scores) {
  if (scores.empty()) throw DataError("minmax_normalize: empty input");
  auto [min_it, max_it] = std::minmax_element(scores.begin(), scores.end());
  double min = *min_it;
  double max = *max_it;
  std::vector<double> out(scores.size(), 0.0);
  if (max == min) return out;  // degenerate: all equal -> all zeros
  for (std::size_t i = 0; i < scores.size(); ++i) out[i] = (scores[i] - min) / (max - min);
  return out;
}

FeedbackSet build_feedback_set(const RankedList& ranked, std::size_t k) {
  if (ranked.entries.empty()) throw DataError("build_feedback_set: empty ranked list");
  if (k < 1) throw DataError("build_feedback_set: k must be >= 1");

  std::vector<double> scores;
  scores.reserve(ranked.entries.size());
  for (const auto& entry : ranked.entries) scores.push_back(entry.score);
  std::vector<double> normalized = minmax_normalize(scores);

  std::size_t take = std::min(k, ranked.entries.size());
  FeedbackSet feedback;
  feedback.topic_id = ranked.topic_id;
  feedback.weights = Eigen::VectorXd(static_cast<Eigen::Index>(take));
  double sum = 0.0;
  for (std::size_t i = 0; i < take; ++i) {
    feedback.members.push_back({ranked.entries[i].doc_id, ranked.entries[i].score});
    feedback.weights[static_cast<Eigen::Index>(i)] = normalized[i];
    sum += normalized[i];
  }
  if (sum > 0.0)
    feedback.weights /= sum;
  else
    feedback.weights.setConstant(1.0 / static_cast<double>(take));
  return feedback;
}

double sem_score(const Eigen::VectorXd& doc_vec, const Eigen::MatrixXd& feedback_matrix,
                 const Eigen::VectorXd& weights) {
  if (feedback_matrix.rows() != doc_vec.size())
    throw DataError("sem_score: document/feedback dimensionality mismatch");
  if (feedback_matrix.cols() != weights.size())
    throw DataError("sem_score: feedback/weight count mismatch");
  Eigen::VectorXd shifted =
      (feedback_matrix.transpose() * doc_vec).array() + 1.0;
  return weights.dot(shifted);
}

Eigen::VectorXd query_vector(const Topic& topic, const VectorStore& vectors, bool* all_oov) {
  if (vectors.words().empty()) throw DataError("query_vector: no word vectors loaded");
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(vectors.dim());
  bool any = false;
  for (const auto& [term, qtf] : topic.qtf) {
    const Eigen::VectorXd* v = vectors.word(term);
    if (!v) continue;
    any = true;
    sum += qtf * (*v);
  }
  if (all_oov) *all_oov = !any;
  return normalize_unit(sum);
}

double d2q_score(const Eigen::VectorXd& doc_vec, const Eigen::VectorXd& query_vec) {
  if (doc_vec.size() != query_vec.size())
    throw DataError("d2q_score: dimensionality mismatch");
  return doc_vec.dot(query_vec);
}

namespace {

const Index& require_index(const RerankContext& context, std::string_view why) {
  if (!context.index)
    throw DataError("rerank: index required " + std::string(why));
  return *context.index;
}

const VectorStore& require_vectors(const RerankContext& context, std::string_view why) {
  if (!context.vectors)
    throw DataError("rerank: vector store required " + std::string(why));
  return *context.vectors;
}

std::uint32_t require_ordinal(const Index& index, const std::string& doc_id) {
  auto ordinal = index.ordinal_of(doc_id);
  if (!ordinal) throw DataError("rerank: document not in index: " + doc_id);
  return *ordinal;
}

// Unit-normalized dense candidate vectors (dim x n); zero columns flagged.
struct DenseVectors {
  Eigen::MatrixXd columns;
  std::vector<std::string> zero_docs;
};

DenseVectors gather_dense(const RankedList& ranked, const RerankContext& context,
                          const RerankParams& params) {
  DenseVectors out;
  const VectorStore& vectors = require_vectors(context, "for dense document vectors");
  if (vectors.dim() == 0) throw DataError("rerank: vector store is empty");
  auto n = static_cast<Eigen::Index>(ranked.entries.size());
  out.columns = Eigen::MatrixXd::Zero(vectors.dim(), n);

  std::vector<std::string> missing;
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::string& doc_id = ranked.entries[static_cast<std::size_t>(i)].doc_id;
    Eigen::VectorXd v;
    if (params.backend == DocVectorBackend::pv) {
      const Eigen::VectorXd* stored = vectors.doc(doc_id);
      if (!stored) {
        missing.push_back(doc_id);
        continue;
      }
      v = *stored;
    } else {  // term addition
      const Index& index = require_index(context, "for term-addition vectors");
      bool all_skipped = false;
      v = doc_vector_term_addition(require_ordinal(index, doc_id), vectors, index,
                                   &all_skipped);
    }
    bool was_zero = false;
    out.columns.col(i) = normalize_unit(v, &was_zero);
    if (was_zero) out.zero_docs.push_back(doc_id);
  }
  if (!missing.empty()) {
    if (!params.allow_zero_vectors) {
      std::string joined;
      for (const auto& id : missing) joined += (joined.empty() ? "" : ", ") + id;
      throw DataError("rerank: missing document vectors: " + joined);
    }
    out.zero_docs.insert(out.zero_docs.end(), missing.begin(), missing.end());
  }
  return out;
}

std::string backend_suffix(DocVectorBackend backend, RerankMode mode) {
  if (mode == RerankMode::d2q) return "+sim_dq";
  switch (backend) {
    case DocVectorBackend::pv:
      return "+sem_dpv";
    case DocVectorBackend::add:
      return "+sem_dadd";
    case DocVectorBackend::tfidf_sparse:
      return "+sem_dtfidf";
  }
  return "+sem";
}

std::vector<double> semantic_scores_dense(const RankedList& ranked,
                                          const RerankContext& context,
                                          const RerankParams& params, RerankMode mode,
                                          std::vector<std::string>* zero_docs) {
  DenseVectors dense = gather_dense(ranked, context, params);
  *zero_docs = dense.zero_docs;
  auto n = static_cast<std::size_t>(dense.columns.cols());
  std::vector<double> sem(n, 0.0);
  if (mode == RerankMode::d2d) {
    FeedbackSet feedback = build_feedback_set(ranked, params.k);
    auto k = static_cast<Eigen::Index>(feedback.members.size());
    Eigen::MatrixXd feedback_matrix(dense.columns.rows(), k);
    for (Eigen::Index j = 0; j < k; ++j) feedback_matrix.col(j) = dense.columns.col(j);
    for (std::size_t i = 0; i < n; ++i)
      sem[i] = sem_score(dense.columns.col(static_cast<Eigen::Index>(i)), feedback_matrix,
                         feedback.weights);
  } else {
    if (!context.topic) throw DataError("rerank: d2q mode needs the topic");
    const VectorStore& vectors = require_vectors(context, "for the query vector");
    bool all_oov = false;
    Eigen::VectorXd query = query_vector(*context.topic, vectors, &all_oov);
    if (all_oov && zero_docs) zero_docs->push_back("<query>");
    for (std::size_t i = 0; i < n; ++i)
      sem[i] =
          (d2q_score(dense.columns.col(static_cast<Eigen::Index>(i)), query) + 1.0) / 2.0;
  }
  return sem;
}

std::vector<double> semantic_scores_sparse(const RankedList& ranked,
                                           const RerankContext& context,
                                           const RerankParams& params, RerankMode mode) {
  const Index& index = require_index(context, "for tf-idf document vectors");
  std::vector<std::map<std::string, double>> sparse;
  sparse.reserve(ranked.entries.size());
  for (const auto& entry : ranked.entries)
    sparse.push_back(doc_vector_tfidf_sparse(require_ordinal(index, entry.doc_id), index));

  std::vector<double> sem(sparse.size(), 0.0);
  if (mode == RerankMode::d2d) {
    FeedbackSet feedback = build_feedback_set(ranked, params.k);
    for (std::size_t i = 0; i < sparse.size(); ++i) {
      double score = 0.0;
      for (std::size_t j = 0; j < feedback.members.size(); ++j)
        score += feedback.weights[static_cast<Eigen::Index>(j)] *
                 (cosine_sparse(sparse[i], sparse[j]) + 1.0);
      sem[i] = score;
    }
  } else {
    if (!context.topic) throw DataError("rerank: d2q mode needs the topic");
    std::map<std::string, double> query;
    for (const auto& [term, qtf] : context.topic->qtf) {
      auto [df, postings] = index.lookup(term);
      if (df == 0) continue;
      query[term] = tfidf_weight(qtf, df, index.stats().num_docs);
    }
    for (std::size_t i = 0; i < sparse.size(); ++i)
      sem[i] = (cosine_sparse(sparse[i], query) + 1.0) / 2.0;
  }
  return sem;
}

}  // namespace

RankedList rerank(const RankedList& ranked, const RerankContext& context,
                  const RerankParams& params, RerankMode mode) {
  if (params.lambda < 0.0 || params.lambda > 1.0)
    throw DataError("rerank: lambda must be in [0, 1]");
  RankedList out;
  out.topic_id = ranked.topic_id;
  out.tag = ranked.tag + backend_suffix(params.backend, mode);
  if (ranked.entries.empty()) {
    out.warning = ranked.warning;
    return out;
  }

  std::vector<std::string> zero_docs;
  std::vector<double> sem =
      params.backend == DocVectorBackend::tfidf_sparse
          ? semantic_scores_sparse(ranked, context, params, mode)
          : semantic_scores_dense(ranked, context, params, mode, &zero_docs);

  std::vector<double> baseline;
  baseline.reserve(ranked.entries.size());
  for (const auto& entry : ranked.entries) baseline.push_back(entry.score);
  std::vector<double> baseline_hat = minmax_normalize(baseline);
  std::vector<double> sem_hat = minmax_normalize(sem);

  std::vector<std::size_t> order(ranked.entries.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> combined(ranked.entries.size());
  for (std::size_t i = 0; i < combined.size(); ++i)
    combined[i] = params.lambda * baseline_hat[i] + (1.0 - params.lambda) * sem_hat[i];
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return combined[a] > combined[b];
  });

  out.entries.reserve(ranked.entries.size());
  for (std::size_t i = 0; i < order.size(); ++i)
    out.entries.push_back({ranked.entries[order[i]].doc_id, combined[order[i]],
                           static_cast<std::uint32_t>(i + 1)});
  if (!zero_docs.empty()) {
    out.warning = "zero-vector documents:";
    for (const auto& id : zero_docs) out.warning += " " + id;
  }
  return out;
}

}  // namespace semrank

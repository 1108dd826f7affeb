#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "semrank/index.hpp"

namespace semrank {

struct BM25Params {
  double k1 = 1.2;
  double k3 = 1000.0;
  double b = 0.75;
};

struct QLMParams {
  double mu = 1000.0;  // Dirichlet pseudo-count; alpha_d = mu / (mu + l)
};

struct RocchioParams {
  std::size_t fb_docs = 10;
  std::size_t fb_terms = 10;
  double beta = 0.4;
};

struct RM3Params {
  std::size_t fb_docs = 10;
  std::size_t fb_terms = 50;
  double alpha = 0.5;  // weight of the original query model
};

struct RunEntry {
  std::string doc_id;
  double score = 0.0;
  std::uint32_t rank = 0;  // 1-based
};

/// Per-topic ranking. Scores are non-increasing, ranks contiguous from 1,
/// doc_ids unique; ties are broken by ascending doc ordinal.
struct RankedList {
  int topic_id = 0;
  std::vector<RunEntry> entries;
  std::string tag = "run";
  std::string warning;  // not serialized; e.g. empty-query flag
};

/// log2((N - df + 0.5) / (df + 0.5)); may be negative for df > N/2.
double idf(std::uint64_t num_docs, std::uint64_t df);

double bm25_score(const Index& index, std::uint32_t doc_ordinal, const Topic& topic,
                  const BM25Params& params);

/// Dirichlet-smoothed query log-likelihood. Query terms absent from the
/// collection are skipped (OOV policy); a warning count is returned through
/// `skipped_oov` when non-null.
double qlm_score(const Index& index, std::uint32_t doc_ordinal, const Topic& topic,
                 const QLMParams& params, std::size_t* skipped_oov = nullptr);

RankedList rank_bm25(const Index& index, const Topic& topic, std::size_t depth,
                     const BM25Params& params, const std::string& tag = "bm25");

RankedList rank_qlm(const Index& index, const Topic& topic, std::size_t depth,
                    const QLMParams& params, const std::string& tag = "qlm");

/// Adapted Rocchio expansion: candidate terms from the top fb_docs feedback
/// documents are scored by summed tf-idf; the top fb_terms of them join the
/// query with weight qtw' = qtw/max_qtw + beta * score/max_score. The result
/// is a weighted topic (expanded=true) scored by the weighted BM25 variant.
Topic rocchio_expand(const Index& index, const Topic& topic, const RankedList& initial,
                     const RocchioParams& params);

/// RM3 query model: alpha * p_ml(w|Q) + (1-alpha) * p_rm(w) with
/// p_rm(w) proportional to sum over feedback docs of p(w|d) p(Q|d),
/// truncated to fb_terms terms and renormalized. Sums to 1 within 1e-9.
std::map<std::string, double> rm3_expand(const Index& index, const Topic& topic,
                                         const RankedList& initial, const RM3Params& params,
                                         const QLMParams& qlm_params);

/// Ranks by cross-entropy of a query language model against Dirichlet-smoothed
/// document models; with the maximum-likelihood model this reproduces the QLM
/// ordering exactly.
RankedList rank_query_model(const Index& index, const std::map<std::string, double>& model,
                            int topic_id, std::size_t depth, const QLMParams& params,
                            const std::string& tag);

RankedList rank_bm25_rocchio(const Index& index, const Topic& topic, std::size_t depth,
                             const BM25Params& bm25, const RocchioParams& rocchio,
                             const std::string& tag = "bm25_prf");

RankedList rank_qlm_rm3(const Index& index, const Topic& topic, std::size_t depth,
                        const QLMParams& qlm, const RM3Params& rm3,
                        const std::string& tag = "qlm_rm3");

}  // namespace semrank

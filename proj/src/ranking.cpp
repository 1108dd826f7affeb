#include "semrank/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <unordered_map>

#include "semrank/errors.hpp"

namespace semrank {

double idf(std::uint64_t num_docs, std::uint64_t df) {
  auto n = static_cast<double>(num_docs);
  auto d = static_cast<double>(df);
  return std::log2((n - d + 0.5) / (d + 0.5));
}

namespace {

void require_scorable(const Index& index) {
  if (index.stats().num_docs == 0) throw DataError("index is empty; nothing to score");
}

double bm25_k(const BM25Params& params, double doc_length, double avg_length) {
  return params.k1 * ((1.0 - params.b) + params.b * doc_length / avg_length);
}

// Query-side factor of Eq-style BM25; for expanded topics the Rocchio weight
// takes its place directly.
double bm25_query_factor(const Topic& topic, double qtf_or_weight, const BM25Params& params) {
  if (topic.expanded) return qtf_or_weight;
  return (params.k3 + 1.0) * qtf_or_weight / (params.k3 + qtf_or_weight);
}

std::uint32_t term_frequency_in(const Index& index, std::string_view term,
                                std::uint32_t doc_ordinal) {
  auto [df, postings] = index.lookup(term);
  if (df == 0) return 0;
  auto it = std::lower_bound(postings.begin(), postings.end(), doc_ordinal,
                             [](const Posting& p, std::uint32_t ord) {
                               return p.doc_ordinal < ord;
                             });
  if (it == postings.end() || it->doc_ordinal != doc_ordinal) return 0;
  return it->tf;
}

RankedList finalize_ranking(int topic_id, std::vector<std::pair<std::uint32_t, double>> scored,
                            const Index& index, std::size_t depth, const std::string& tag) {
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (scored.size() > depth) scored.resize(depth);
  RankedList list;
  list.topic_id = topic_id;
  list.tag = tag;
  list.entries.reserve(scored.size());
  for (std::size_t i = 0; i < scored.size(); ++i)
    list.entries.push_back({index.document(scored[i].first).doc_id, scored[i].second,
                            static_cast<std::uint32_t>(i + 1)});
  return list;
}

}  // namespace

double bm25_score(const Index& index, std::uint32_t doc_ordinal, const Topic& topic,
                  const BM25Params& params) {
  require_scorable(index);
  const CollectionStats& stats = index.stats();
  double k = bm25_k(params, index.document(doc_ordinal).length, stats.avg_doc_length);
  double score = 0.0;
  for (const auto& [term, qtf] : topic.qtf) {
    auto [df, postings] = index.lookup(term);
    if (df == 0) continue;
    double tf = term_frequency_in(index, term, doc_ordinal);
    if (tf == 0.0) continue;
    score += idf(stats.num_docs, df) * ((params.k1 + 1.0) * tf) / (k + tf) *
             bm25_query_factor(topic, qtf, params);
  }
  return score;
}

RankedList rank_bm25(const Index& index, const Topic& topic, std::size_t depth,
                     const BM25Params& params, const std::string& tag) {
  require_scorable(index);
  if (depth < 1) throw DataError("ranking depth must be >= 1");
  if (topic.qtf.empty()) {
    RankedList empty;
    empty.topic_id = topic.topic_id;
    empty.tag = tag;
    empty.warning = "empty query";
    return empty;
  }
  const CollectionStats& stats = index.stats();
  std::unordered_map<std::uint32_t, double> accumulator;
  for (const auto& [term, qtf] : topic.qtf) {
    auto [df, postings] = index.lookup(term);
    if (df == 0) continue;
    double w = idf(stats.num_docs, df) * bm25_query_factor(topic, qtf, params);
    for (const Posting& posting : postings) {
      double k = bm25_k(params, index.document(posting.doc_ordinal).length,
                        stats.avg_doc_length);
      accumulator[posting.doc_ordinal] +=
          w * ((params.k1 + 1.0) * posting.tf) / (k + posting.tf);
    }
  }
  // Only matching documents appear; no padding with zero-score documents.
  std::vector<std::pair<std::uint32_t, double>> scored(accumulator.begin(),
                                                       accumulator.end());
  return finalize_ranking(topic.topic_id, std::move(scored), index, depth, tag);
}

namespace {

// Terms of the query with nonzero collection frequency, with multiplicities.
// OOV terms would make the smoothed model assign zero probability.
struct EffectiveQuery {
  std::vector<std::pair<std::string, double>> terms;  // (term, qtf)
  double length = 0.0;                                // sum of qtf
  std::size_t skipped = 0;
};

EffectiveQuery effective_query(const Index& index, const Topic& topic) {
  EffectiveQuery query;
  for (const auto& [term, qtf] : topic.qtf) {
    if (index.collection_frequency(term) == 0) {
      ++query.skipped;
      continue;
    }
    query.terms.push_back({term, qtf});
    query.length += qtf;
  }
  return query;
}

double collection_probability(const Index& index, std::string_view term) {
  return static_cast<double>(index.collection_frequency(term)) /
         static_cast<double>(index.stats().total_tokens);
}

}  // namespace

double qlm_score(const Index& index, std::uint32_t doc_ordinal, const Topic& topic,
                 const QLMParams& params, std::size_t* skipped_oov) {
  require_scorable(index);
  EffectiveQuery query = effective_query(index, topic);
  if (skipped_oov) *skipped_oov = query.skipped;
  double doc_length = index.document(doc_ordinal).length;
  double alpha_d = params.mu / (doc_length + params.mu);
  double score = query.length * std::log(alpha_d);
  for (const auto& [term, qtf] : query.terms) {
    double tf = term_frequency_in(index, term, doc_ordinal);
    double p_c = collection_probability(index, term);
    // log(p(q|d) / (alpha_d p(q|C))) with Dirichlet estimates reduces to
    // log(1 + tf / (mu p(q|C))); absent terms contribute 0.
    if (tf > 0.0) score += qtf * std::log1p(tf / (params.mu * p_c));
  }
  return score;
}

RankedList rank_qlm(const Index& index, const Topic& topic, std::size_t depth,
                    const QLMParams& params, const std::string& tag) {
  require_scorable(index);
  if (depth < 1) throw DataError("ranking depth must be >= 1");
  EffectiveQuery query = effective_query(index, topic);
  if (query.terms.empty()) {
    RankedList empty;
    empty.topic_id = topic.topic_id;
    empty.tag = tag;
    empty.warning = query.skipped > 0 ? "all query terms out of vocabulary" : "empty query";
    return empty;
  }
  if (query.skipped > 0)
    std::cerr << "warning: topic " << topic.topic_id << ": skipped " << query.skipped
              << " out-of-vocabulary query terms\n";
  std::unordered_map<std::uint32_t, double> accumulator;
  for (const auto& [term, qtf] : query.terms) {
    auto [df, postings] = index.lookup(term);
    double p_c = collection_probability(index, term);
    for (const Posting& posting : postings)
      accumulator[posting.doc_ordinal] +=
          qtf * std::log1p(posting.tf / (params.mu * p_c));
  }
  std::vector<std::pair<std::uint32_t, double>> scored;
  scored.reserve(accumulator.size());
  for (const auto& [ordinal, partial] : accumulator) {
    double doc_length = index.document(ordinal).length;
    double alpha_d = params.mu / (doc_length + params.mu);
    scored.push_back({ordinal, partial + query.length * std::log(alpha_d)});
  }
  return finalize_ranking(topic.topic_id, std::move(scored), index, depth, tag);
}

Topic rocchio_expand(const Index& index, const Topic& topic, const RankedList& initial,
                     const RocchioParams& params) {
  require_scorable(index);
  if (initial.entries.empty()) throw DataError("Rocchio expansion needs a nonempty ranking");
  if (initial.entries.size() < params.fb_docs)
    std::cerr << "warning: topic " << topic.topic_id << ": only " << initial.entries.size()
              << " feedback documents available (wanted " << params.fb_docs << ")\n";

  std::size_t take = std::min(params.fb_docs, initial.entries.size());
  const std::uint64_t num_docs = index.stats().num_docs;
  std::unordered_map<std::uint32_t, double> expansion_score;  // term id -> sum tf-idf
  for (std::size_t i = 0; i < take; ++i) {
    auto ordinal = index.ordinal_of(initial.entries[i].doc_id);
    if (!ordinal)
      throw DataError("feedback document not in index: " + initial.entries[i].doc_id);
    for (const TermCount& item : index.document_terms(*ordinal))
      expansion_score[item.term_id] +=
          item.tf * idf(num_docs, index.document_frequency(item.term_id));
  }

  // Candidates with non-positive tf-idf carry no usable weight.
  std::vector<std::pair<std::uint32_t, double>> candidates;
  candidates.reserve(expansion_score.size());
  for (const auto& [term_id, score] : expansion_score)
    if (score > 0.0) candidates.push_back({term_id, score});
  std::sort(candidates.begin(), candidates.end(), [&](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return index.term(a.first) < index.term(b.first);
  });
  if (candidates.size() > params.fb_terms) candidates.resize(params.fb_terms);

  Topic expanded;
  expanded.topic_id = topic.topic_id;
  expanded.title = topic.title;
  expanded.expanded = true;

  double max_qtw = 0.0;
  for (const auto& [term, qtf] : topic.qtf) max_qtw = std::max(max_qtw, qtf);
  if (max_qtw > 0.0)
    for (const auto& [term, qtf] : topic.qtf) expanded.qtf[term] = qtf / max_qtw;

  if (params.beta > 0.0 && !candidates.empty()) {
    double max_score = candidates.front().second;
    for (const auto& [term_id, score] : candidates)
      expanded.qtf[index.term(term_id)] += params.beta * score / max_score;
  }
  for (const auto& [term, weight] : expanded.qtf) expanded.terms.push_back(term);
  return expanded;
}

namespace {

double smoothed_doc_probability(std::uint32_t tf, double doc_length, double p_collection,
                                double mu) {
  return (tf + mu * p_collection) / (doc_length + mu);
}

}  // namespace

std::map<std::string, double> rm3_expand(const Index& index, const Topic& topic,
                                         const RankedList& initial, const RM3Params& params,
                                         const QLMParams& qlm_params) {
  require_scorable(index);
  if (initial.entries.empty()) throw DataError("RM3 expansion needs a nonempty ranking");
  if (initial.entries.size() < params.fb_docs)
    std::cerr << "warning: topic " << topic.topic_id << ": only " << initial.entries.size()
              << " feedback documents available (wanted " << params.fb_docs << ")\n";

  // Maximum-likelihood query model.
  std::map<std::string, double> model;
  double query_length = 0.0;
  for (const auto& [term, qtf] : topic.qtf) query_length += qtf;
  if (query_length <= 0.0) throw DataError("RM3 expansion needs a nonempty query");
  for (const auto& [term, qtf] : topic.qtf) model[term] = params.alpha * qtf / query_length;
  if (params.alpha == 1.0) return model;

  std::size_t take = std::min(params.fb_docs, initial.entries.size());
  std::vector<std::uint32_t> feedback;
  feedback.reserve(take);
  for (std::size_t i = 0; i < take; ++i) {
    auto ordinal = index.ordinal_of(initial.entries[i].doc_id);
    if (!ordinal)
      throw DataError("feedback document not in index: " + initial.entries[i].doc_id);
    feedback.push_back(*ordinal);
  }

  // p(Q|d) over the feedback set, normalized via log-sum-exp.
  std::vector<double> log_likelihood(feedback.size(), 0.0);
  for (std::size_t i = 0; i < feedback.size(); ++i) {
    double doc_length = index.document(feedback[i]).length;
    for (const auto& [term, qtf] : topic.qtf) {
      if (index.collection_frequency(term) == 0) continue;  // OOV policy
      double p_c = collection_probability(index, term);
      std::uint32_t tf = term_frequency_in(index, term, feedback[i]);
      log_likelihood[i] +=
          qtf * std::log(smoothed_doc_probability(tf, doc_length, p_c, qlm_params.mu));
    }
  }
  double max_ll = *std::max_element(log_likelihood.begin(), log_likelihood.end());
  std::vector<double> query_weight(feedback.size());
  double weight_sum = 0.0;
  for (std::size_t i = 0; i < feedback.size(); ++i) {
    query_weight[i] = std::exp(log_likelihood[i] - max_ll);
    weight_sum += query_weight[i];
  }
  for (double& w : query_weight) w /= weight_sum;

  // Relevance model over terms occurring in the feedback documents.
  std::unordered_map<std::uint32_t, double> relevance;
  for (std::size_t i = 0; i < feedback.size(); ++i) {
    double doc_length = index.document(feedback[i]).length;
    for (const TermCount& item : index.document_terms(feedback[i])) {
      double p_c = collection_probability(index, index.term(item.term_id));
      relevance[item.term_id] +=
          query_weight[i] *
          smoothed_doc_probability(item.tf, doc_length, p_c, qlm_params.mu);
    }
  }
  std::vector<std::pair<std::uint32_t, double>> kept(relevance.begin(), relevance.end());
  std::sort(kept.begin(), kept.end(), [&](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return index.term(a.first) < index.term(b.first);
  });
  if (kept.size() > params.fb_terms) kept.resize(params.fb_terms);
  double total = 0.0;
  for (const auto& [term_id, mass] : kept) total += mass;
  for (const auto& [term_id, mass] : kept)
    model[index.term(term_id)] += (1.0 - params.alpha) * mass / total;
  return model;
}

RankedList rank_query_model(const Index& index, const std::map<std::string, double>& model,
                            int topic_id, std::size_t depth, const QLMParams& params,
                            const std::string& tag) {
  require_scorable(index);
  if (depth < 1) throw DataError("ranking depth must be >= 1");

  std::vector<std::pair<std::string, double>> effective;
  double base = 0.0;    // doc-independent part: sum_w m_w log(mu p(w|C))
  double mass = 0.0;    // total model mass of scorable terms
  std::size_t skipped = 0;
  for (const auto& [term, weight] : model) {
    if (weight <= 0.0) continue;
    if (index.collection_frequency(term) == 0) {
      ++skipped;
      continue;
    }
    double p_c = collection_probability(index, term);
    effective.push_back({term, weight});
    base += weight * std::log(params.mu * p_c);
    mass += weight;
  }
  if (effective.empty()) {
    RankedList empty;
    empty.topic_id = topic_id;
    empty.tag = tag;
    empty.warning = skipped > 0 ? "all model terms out of vocabulary" : "empty query model";
    return empty;
  }
  if (skipped > 0)
    std::cerr << "warning: topic " << topic_id << ": skipped " << skipped
              << " out-of-vocabulary model terms\n";

  std::unordered_map<std::uint32_t, double> accumulator;
  for (const auto& [term, weight] : effective) {
    auto [df, postings] = index.lookup(term);
    double p_c = collection_probability(index, term);
    for (const Posting& posting : postings)
      accumulator[posting.doc_ordinal] +=
          weight * std::log1p(posting.tf / (params.mu * p_c));
  }
  std::vector<std::pair<std::uint32_t, double>> scored;
  scored.reserve(accumulator.size());
  for (const auto& [ordinal, partial] : accumulator) {
    double doc_length = index.document(ordinal).length;
    scored.push_back(
        {ordinal, partial + base - mass * std::log(doc_length + params.mu)});
  }
  return finalize_ranking(topic_id, std::move(scored), index, depth, tag);
}

RankedList rank_bm25_rocchio(const Index& index, const Topic& topic, std::size_t depth,
                             const BM25Params& bm25, const RocchioParams& rocchio,
                             const std::string& tag) {
  RankedList initial = rank_bm25(index, topic, depth, bm25, tag);
  if (initial.entries.empty()) return initial;
  Topic expanded = rocchio_expand(index, topic, initial, rocchio);
  return rank_bm25(index, expanded, depth, bm25, tag);
}

RankedList rank_qlm_rm3(const Index& index, const Topic& topic, std::size_t depth,
                        const QLMParams& qlm, const RM3Params& rm3, const std::string& tag) {
  RankedList initial = rank_qlm(index, topic, depth, qlm, tag);
  if (initial.entries.empty()) return initial;
  std::map<std::string, double> model = rm3_expand(index, topic, initial, rm3, qlm);
  return rank_query_model(index, model, topic.topic_id, depth, qlm, tag);
}

}  // namespace semrank

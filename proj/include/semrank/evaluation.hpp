#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "semrank/corpus.hpp"
#include "semrank/ranking.hpp"

namespace semrank {

enum class GainFunction { binary, exponential };

struct MetricSpec {
  enum class Kind { map, ndcg } kind = Kind::map;
  std::optional<int> cutoff;  // required for ndcg
  GainFunction gain = GainFunction::binary;

  /// "map", "ndcg@20", "ndcg@10", ...
  static MetricSpec parse(const std::string& name);
  std::string name() const;
};

/// Average precision with graded judgments binarized at >= 1; unjudged
/// documents count as nonrelevant, unretrieved relevant documents contribute
/// 0. nullopt when the topic has no relevant documents (excluded upstream).
std::optional<double> average_precision(const RankedList& ranked, const Qrels& qrels,
                                        int topic_id);

/// Mean of per-topic AP over topics with at least one relevant document;
/// the number of excluded topics is reported through `excluded`.
double mean_average_precision(const std::vector<RankedList>& run, const Qrels& qrels,
                              std::size_t* excluded = nullptr);

std::optional<double> ndcg_at_k(const RankedList& ranked, const Qrels& qrels, int topic_id,
                                int k, GainFunction gain = GainFunction::binary);

/// Average precision over the top-k prefix, normalized by min(k, #relevant)
/// so a perfect prefix scores 1. Measures pseudo-feedback-set quality.
std::optional<double> ap_at_k(const RankedList& ranked, const Qrels& qrels, int topic_id,
                              int k);

/// Per-topic metric under `spec`; nullopt when undefined for the topic.
std::optional<double> topic_metric(const RankedList& ranked, const Qrels& qrels,
                                   const MetricSpec& spec);

/// Mean of the metric over evaluable topics; throws when none are.
double evaluate_run(const std::vector<RankedList>& run, const Qrels& qrels,
                    const MetricSpec& spec, std::size_t* excluded = nullptr);

struct FoldSplit {
  std::vector<int> train_topics;
  std::vector<int> test_topics;
  std::string rule;
};

/// Fold A trains on odd / tests on even topic numbers; fold B the reverse.
std::pair<FoldSplit, FoldSplit> parity_split(const std::vector<int>& topic_ids);

struct SweepGrid {
  std::vector<double> lambdas;
  std::vector<std::size_t> ks;

  /// "lo:hi:step" inclusive arithmetic grid.
  static std::vector<double> lambda_range(double lo, double hi, double step);
};

struct SweepPoint {
  double lambda = 0.0;
  std::size_t k = 0;
  double objective = 0.0;
};

struct SweepResult {
  SweepPoint best;
  std::vector<SweepPoint> table;  // every evaluated grid point, in grid order
};

/// Exhaustive grid evaluation; the argmax with ties broken toward smaller
/// lambda then smaller k. Deterministic: rerunning returns the same point.
SweepResult grid_search(const SweepGrid& grid,
                        const std::function<double(double, std::size_t)>& objective);

struct QualityRow {
  int topic_id = 0;
  double ap_at_k = 0.0;
  double improvement_pct = 0.0;
};

struct QualityStudy {
  std::vector<QualityRow> rows;
  double pearson_r = 0.0;
  bool r_defined = true;  // false when either axis has zero variance
  std::size_t excluded_zero_ap = 0;
  // Mean improvement at feedback quality < 0.1, in [0.1, 0.9], and > 0.9.
  double bucket_mean_low = 0.0, bucket_mean_mid = 0.0, bucket_mean_high = 0.0;
  std::size_t bucket_count_low = 0, bucket_count_mid = 0, bucket_count_high = 0;
};

/// Per-topic feedback quality (AP@k of the base run) against relative MAP
/// improvement of the reranked run, with the Pearson correlation of the two.
QualityStudy quality_correlation(const std::vector<RankedList>& base_run,
                                 const std::vector<RankedList>& reranked_run,
                                 const Qrels& qrels, int k);

double pearson_correlation(const std::vector<double>& x, const std::vector<double>& y,
                           bool* defined = nullptr);

struct TTestResult {
  double t = 0.0;
  double p = 1.0;  // two-sided
  std::size_t n = 0;
};

/// Paired two-sided t-test over per-topic metric deltas.
TTestResult paired_ttest(const std::vector<double>& a, const std::vector<double>& b);

/// TREC run format: "topic Q0 doc rank score tag", scores with 6 decimals.
void write_run(const std::vector<RankedList>& run, const std::filesystem::path& path);
void write_run(const std::vector<RankedList>& run, std::ostream& out);

/// Reads a run file, grouping by topic and re-sorting by rank. Rank gaps,
/// duplicate documents and score inversions are errors (with line numbers).
std::vector<RankedList> read_run(const std::filesystem::path& path);
std::vector<RankedList> read_run(std::istream& in);

}  // namespace semrank

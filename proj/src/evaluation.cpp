#include "semrank/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "semrank/errors.hpp"

namespace semrank {

MetricSpec MetricSpec::parse(const std::string& name) {
  MetricSpec spec;
  if (name == "map") {
    spec.kind = Kind::map;
    return spec;
  }
  if (name.rfind("ndcg@", 0) == 0) {
    spec.kind = Kind::ndcg;
    try {
      spec.cutoff = std::stoi(name.substr(5));
    } catch (const std::exception&) {
      throw DataError("bad metric cutoff in \"" + name + "\"");
    }
    if (*spec.cutoff < 1) throw DataError("metric cutoff must be >= 1");
    return spec;
  }
  throw DataError("unknown metric \"" + name + "\" (expected map or ndcg@k)");
}

std::string MetricSpec::name() const {
  if (kind == Kind::map) return "map";
  return "ndcg@" + std::to_string(cutoff.value_or(0));
}

std::optional<double> average_precision(const RankedList& ranked, const Qrels& qrels,
                                        int topic_id) {
  std::size_t num_relevant = qrels.num_relevant(topic_id);
  if (num_relevant == 0) return std::nullopt;
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < ranked.entries.size(); ++i) {
    if (qrels.relevant(topic_id, ranked.entries[i].doc_id)) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(i + 1);
    }
  }
  return sum / static_cast<double>(num_relevant);
}

double mean_average_precision(const std::vector<RankedList>& run, const Qrels& qrels,
                              std::size_t* excluded) {
  MetricSpec spec;
  spec.kind = MetricSpec::Kind::map;
  return evaluate_run(run, qrels, spec, excluded);
}

namespace {

double gain_of(int grade, GainFunction gain) {
  if (grade <= 0) return 0.0;
  if (gain == GainFunction::binary) return 1.0;
  return std::pow(2.0, grade) - 1.0;
}

}  // namespace

std::optional<double> ndcg_at_k(const RankedList& ranked, const Qrels& qrels, int topic_id,
                                int k, GainFunction gain) {
  if (k < 1) throw DataError("ndcg cutoff must be >= 1");
  std::vector<int> grades = qrels.positive_grades(topic_id);  // descending
  if (grades.empty()) return std::nullopt;

  double dcg = 0.0;
  std::size_t limit = std::min<std::size_t>(k, ranked.entries.size());
  for (std::size_t i = 0; i < limit; ++i) {
    auto grade = qrels.grade(topic_id, ranked.entries[i].doc_id);
    dcg += gain_of(grade.value_or(0), gain) / std::log2(static_cast<double>(i) + 2.0);
  }

  double idcg = 0.0;
  std::size_t ideal_limit = std::min<std::size_t>(k, grades.size());
  for (std::size_t i = 0; i < ideal_limit; ++i)
    idcg += gain_of(grades[i], gain) / std::log2(static_cast<double>(i) + 2.0);
  return dcg / idcg;
}

std::optional<double> ap_at_k(const RankedList& ranked, const Qrels& qrels, int topic_id,
                              int k) {
  if (k < 1) throw DataError("ap_at_k cutoff must be >= 1");
  std::size_t num_relevant = qrels.num_relevant(topic_id);
  if (num_relevant == 0) return std::nullopt;
  double sum = 0.0;
  std::size_t hits = 0;
  std::size_t limit = std::min<std::size_t>(k, ranked.entries.size());
  for (std::size_t i = 0; i < limit; ++i) {
    if (qrels.relevant(topic_id, ranked.entries[i].doc_id)) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(i + 1);
    }
  }
  return sum / static_cast<double>(std::min<std::size_t>(k, num_relevant));
}

std::optional<double> topic_metric(const RankedList& ranked, const Qrels& qrels,
                                   const MetricSpec& spec) {
  if (spec.kind == MetricSpec::Kind::map)
    return average_precision(ranked, qrels, ranked.topic_id);
  return ndcg_at_k(ranked, qrels, ranked.topic_id, spec.cutoff.value(), spec.gain);
}

double evaluate_run(const std::vector<RankedList>& run, const Qrels& qrels,
                    const MetricSpec& spec, std::size_t* excluded) {
  double sum = 0.0;
  std::size_t counted = 0;
  std::size_t skipped = 0;
  for (const RankedList& ranked : run) {
    auto value = topic_metric(ranked, qrels, spec);
    if (!value) {
      ++skipped;
      continue;
    }
    sum += *value;
    ++counted;
  }
  if (excluded) *excluded = skipped;
  if (counted == 0) throw DataError("no evaluable topics (no relevant documents judged)");
  return sum / static_cast<double>(counted);
}

std::pair<FoldSplit, FoldSplit> parity_split(const std::vector<int>& topic_ids) {
  std::set<int> unique(topic_ids.begin(), topic_ids.end());
  std::vector<int> odd;
  std::vector<int> even;
  for (int id : unique) ((id % 2 != 0) ? odd : even).push_back(id);
  if (odd.empty() || even.empty())
    throw DataError("parity split needs topics of both parities");
  FoldSplit fold_a{odd, even, "train:odd test:even"};
  FoldSplit fold_b{even, odd, "train:even test:odd"};
  return {fold_a, fold_b};
}

std::vector<double> SweepGrid::lambda_range(double lo, double hi, double step) {
  if (step <= 0.0) throw DataError("lambda grid step must be positive");
  if (hi < lo) throw DataError("lambda grid upper bound below lower bound");
  std::vector<double> values;
  auto count = static_cast<std::size_t>(std::llround((hi - lo) / step));
  values.reserve(count + 1);
  for (std::size_t i = 0; i <= count; ++i) values.push_back(lo + static_cast<double>(i) * step);
  return values;
}

SweepResult grid_search(const SweepGrid& grid,
                        const std::function<double(double, std::size_t)>& objective) {
  if (grid.lambdas.empty() || grid.ks.empty()) throw DataError("empty sweep grid");
  SweepResult result;
  bool first = true;
  // Ascending lambda then ascending k, keeping strict improvements only,
  // realizes the (smaller lambda, then smaller k) tie rule.
  for (double lambda : grid.lambdas) {
    for (std::size_t k : grid.ks) {
      double value = objective(lambda, k);
      result.table.push_back({lambda, k, value});
      if (first || value > result.best.objective) {
        result.best = {lambda, k, value};
        first = false;
      }
    }
  }
  return result;
}

double pearson_correlation(const std::vector<double>& x, const std::vector<double>& y,
                           bool* defined) {
  if (x.size() != y.size() || x.size() < 2)
    throw DataError("pearson correlation needs two same-length samples of size >= 2");
  double n = static_cast<double>(x.size());
  double mean_x = 0.0;
  double mean_y = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mean_x += x[i];
    mean_y += y[i];
  }
  mean_x /= n;
  mean_y /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double dx = x[i] - mean_x;
    double dy = y[i] - mean_y;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    if (defined) *defined = false;
    return 0.0;
  }
  if (defined) *defined = true;
  return sxy / std::sqrt(sxx * syy);
}

QualityStudy quality_correlation(const std::vector<RankedList>& base_run,
                                 const std::vector<RankedList>& reranked_run,
                                 const Qrels& qrels, int k) {
  std::map<int, const RankedList*> base;
  std::map<int, const RankedList*> reranked;
  for (const auto& list : base_run) base[list.topic_id] = &list;
  for (const auto& list : reranked_run) reranked[list.topic_id] = &list;

  QualityStudy study;
  for (const auto& [topic_id, base_list] : base) {
    auto it = reranked.find(topic_id);
    if (it == reranked.end())
      throw DataError("reranked run missing topic " + std::to_string(topic_id));
    auto ap_base = average_precision(*base_list, qrels, topic_id);
    auto quality = ap_at_k(*base_list, qrels, topic_id, k);
    if (!ap_base || *ap_base == 0.0) {
      ++study.excluded_zero_ap;
      continue;
    }
    auto ap_new = average_precision(*it->second, qrels, topic_id);
    double improvement = (*ap_new - *ap_base) / *ap_base * 100.0;
    study.rows.push_back({topic_id, *quality, improvement});
  }
  if (study.rows.size() < 2)
    throw DataError("quality correlation undefined with fewer than 2 evaluable topics");

  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& row : study.rows) {
    xs.push_back(row.ap_at_k);
    ys.push_back(row.improvement_pct);
    if (row.ap_at_k < 0.1) {
      study.bucket_mean_low += row.improvement_pct;
      ++study.bucket_count_low;
    } else if (row.ap_at_k > 0.9) {
      study.bucket_mean_high += row.improvement_pct;
      ++study.bucket_count_high;
    } else {
      study.bucket_mean_mid += row.improvement_pct;
      ++study.bucket_count_mid;
    }
  }
  if (study.bucket_count_low > 0) study.bucket_mean_low /= study.bucket_count_low;
  if (study.bucket_count_mid > 0) study.bucket_mean_mid /= study.bucket_count_mid;
  if (study.bucket_count_high > 0) study.bucket_mean_high /= study.bucket_count_high;
  study.pearson_r = pearson_correlation(xs, ys, &study.r_defined);
  return study;
}

namespace {

// Regularized incomplete beta via continued fraction (Lentz's method).
double betacf(double a, double b, double x) {
  constexpr int max_iterations = 200;
  constexpr double epsilon = 3.0e-14;
  constexpr double tiny = 1.0e-300;
  double qab = a + b;
  double qap = a + 1.0;
  double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= max_iterations; ++m) {
    int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < epsilon) break;
  }
  return h;
}

double regularized_incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                    a * std::log(x) + b * std::log(1.0 - x);
  double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

}  // namespace

TTestResult paired_ttest(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw DataError("paired t-test needs same-length samples");
  TTestResult result;
  result.n = a.size();
  if (result.n < 2) return result;  // t = 0, p = 1 by construction
  double mean = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) mean += a[i] - b[i];
  mean /= static_cast<double>(result.n);
  double variance = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = (a[i] - b[i]) - mean;
    variance += d * d;
  }
  variance /= static_cast<double>(result.n - 1);
  if (variance == 0.0) {
    result.t = 0.0;
    result.p = mean == 0.0 ? 1.0 : 0.0;
    return result;
  }
  double df = static_cast<double>(result.n - 1);
  result.t = mean / std::sqrt(variance / static_cast<double>(result.n));
  result.p = regularized_incomplete_beta(df / 2.0, 0.5, df / (df + result.t * result.t));
  return result;
}

void write_run(const std::vector<RankedList>& run, std::ostream& out) {
  char buffer[32];
  for (const RankedList& list : run) {
    for (const RunEntry& entry : list.entries) {
      std::snprintf(buffer, sizeof(buffer), "%.6f", entry.score);
      out << list.topic_id << " Q0 " << entry.doc_id << " " << entry.rank << " " << buffer
          << " " << list.tag << "\n";
    }
  }
}

void write_run(const std::vector<RankedList>& run, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write run file: " + path.string());
  write_run(run, out);
  if (!out) throw DataError("failed writing run file: " + path.string());
}

std::vector<RankedList> read_run(std::istream& in) {
  struct Raw {
    std::string doc_id;
    double score;
    std::uint32_t rank;
    std::size_t line;
  };
  std::map<int, std::vector<Raw>> by_topic;
  std::map<int, std::string> tags;
  std::vector<int> topic_order;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string topic, q0, doc, rank, score, tag, extra;
    if (!(fields >> topic)) continue;
    if (!(fields >> q0 >> doc >> rank >> score >> tag) || (fields >> extra))
      throw DataError("expected 6 columns at line " + std::to_string(line_no));
    int topic_id = 0;
    std::uint32_t rank_value = 0;
    double score_value = 0.0;
    try {
      topic_id = std::stoi(topic);
      rank_value = static_cast<std::uint32_t>(std::stoul(rank));
      score_value = std::stod(score);
    } catch (const std::exception&) {
      throw DataError("malformed run entry at line " + std::to_string(line_no));
    }
    if (by_topic.find(topic_id) == by_topic.end()) topic_order.push_back(topic_id);
    by_topic[topic_id].push_back({doc, score_value, rank_value, line_no});
    tags.emplace(topic_id, tag);
  }

  std::vector<RankedList> run;
  run.reserve(topic_order.size());
  for (int topic_id : topic_order) {
    auto& raw = by_topic[topic_id];
    std::sort(raw.begin(), raw.end(),
              [](const Raw& a, const Raw& b) { return a.rank < b.rank; });
    RankedList list;
    list.topic_id = topic_id;
    list.tag = tags[topic_id];
    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (raw[i].rank != i + 1)
        throw DataError("rank " + std::to_string(raw[i].rank) + " out of sequence at line " +
                        std::to_string(raw[i].line));
      if (!seen.insert(raw[i].doc_id).second)
        throw DataError("duplicate document " + raw[i].doc_id + " at line " +
                        std::to_string(raw[i].line));
      if (i > 0 && raw[i].score > raw[i - 1].score)
        throw DataError("score inversion at line " + std::to_string(raw[i].line));
      list.entries.push_back({raw[i].doc_id, raw[i].score, raw[i].rank});
    }
    run.push_back(std::move(list));
  }
  return run;
}

std::vector<RankedList> read_run(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open run file: " + path.string());
  return read_run(in);
}

}  // namespace semrank

// Batch experiment driver: index, rank, train-embeddings, rerank, eval,
// sweep and quality-study subcommands over TREC-style data.

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "semrank/config.hpp"
#include "semrank/corpus.hpp"
#include "semrank/embedding.hpp"
#include "semrank/errors.hpp"
#include "semrank/evaluation.hpp"
#include "semrank/index.hpp"
#include "semrank/ranking.hpp"
#include "semrank/rerank.hpp"

namespace {

using namespace semrank;

// Values settable from (lowest to highest) defaults, config file, command
// line; D2D_THREADS and D2D_SEED override everything.
struct Settings {
  std::string config_path;

  std::string stopwords_path;
  std::string stemmer = "porter";
  bool no_lowercase = false;

  BM25Params bm25;
  QLMParams qlm;
  RocchioParams rocchio;
  RM3Params rm3;

  int dim = 300;
  int window = 10;
  int negatives = 5;
  int epochs = 5;
  int min_count = 5;
  double lr = 0.025;

  double lambda = 0.35;
  std::size_t fb_k = 30;
  std::string doc_vec = "pv";
  std::string mode = "d2d";
  bool allow_zero_vectors = false;

  std::size_t depth = 1000;
  std::string tag;

  long threads = 0;  // 0 = hardware concurrency
  long seed = 1;
};

PipelineConfig pipeline_from(const Settings& settings) {
  PipelineConfig config;
  if (settings.stopwords_path.empty()) {
    const auto& words = standard_stopwords();
    config.stopwords.insert(words.begin(), words.end());
  } else {
    config.stopwords = load_stopwords(settings.stopwords_path);
  }
  if (settings.stemmer == "porter") {
    config.stemmer = Stemmer::porter;
  } else if (settings.stemmer == "none") {
    config.stemmer = Stemmer::none;
  } else {
    throw CLI::ValidationError("--stemmer", "expected porter or none");
  }
  config.lowercase = !settings.no_lowercase;
  return config;
}

DocFormat doc_format_from(const std::string& name) {
  if (name == "trec") return DocFormat::trec_sgml;
  if (name == "jsonl") return DocFormat::jsonl;
  throw CLI::ValidationError("--format", "expected trec or jsonl");
}

TopicFormat topic_format_from(const std::string& name) {
  if (name == "trec") return TopicFormat::trec_sgml;
  if (name == "tsv") return TopicFormat::tsv;
  throw CLI::ValidationError("--topic-format", "expected trec or tsv");
}

DocVectorBackend backend_from(const std::string& name) {
  if (name == "pv") return DocVectorBackend::pv;
  if (name == "add") return DocVectorBackend::add;
  if (name == "tfidf") return DocVectorBackend::tfidf_sparse;
  throw CLI::ValidationError("--doc-vec", "expected pv, add or tfidf");
}

RerankMode mode_from(const std::string& name) {
  if (name == "d2d") return RerankMode::d2d;
  if (name == "d2q") return RerankMode::d2q;
  throw CLI::ValidationError("--mode", "expected d2d or d2q");
}

std::vector<Document> load_documents(const std::string& spec_list, const std::string& format,
                                     const PipelineConfig& config) {
  std::vector<Document> docs;
  std::stringstream paths(spec_list);
  std::string path;
  while (std::getline(paths, path, ',')) {
    if (path.empty()) continue;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open corpus file: " + path);
    std::vector<Document> chunk = parse_trec_docs(in, doc_format_from(format), config);
    docs.insert(docs.end(), std::make_move_iterator(chunk.begin()),
                std::make_move_iterator(chunk.end()));
  }
  return docs;
}

std::vector<Topic> load_topics(const std::string& path, const std::string& format,
                               const PipelineConfig& config) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open topics file: " + path);
  return parse_topics(in, topic_format_from(format), config);
}

Qrels load_qrels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open qrels file: " + path);
  std::size_t overwrites = 0;
  Qrels qrels = parse_qrels(in, &overwrites);
  if (overwrites > 0)
    std::cerr << "warning: " << overwrites << " duplicate qrels entries overwritten\n";
  return qrels;
}

void emit(const std::filesystem::path& path) { std::cout << path.string() << "\n"; }

// Applies file-config values to options the command line left untouched,
// then environment overrides.
void apply_config_and_env(CLI::App& app, Settings& settings) {
  if (!settings.config_path.empty()) {
    KeyValueConfig config = KeyValueConfig::parse_file(settings.config_path);
    auto maybe = [&](const std::string& flag, const std::string& key, auto& slot) {
      CLI::Option* option = app.get_option_no_throw(flag);
      if (option != nullptr && option->count() > 0) return;  // flag wins
      if (auto value = config.get(key)) {
        std::stringstream stream(*value);
        stream >> slot;
        if (stream.fail())
          throw DataError("config value for " + key + " is malformed: " + *value);
      }
    };
    maybe("--stopwords", "pipeline.stopwords", settings.stopwords_path);
    maybe("--stemmer", "pipeline.stemmer", settings.stemmer);
    maybe("--k1", "bm25.k1", settings.bm25.k1);
    maybe("--k3", "bm25.k3", settings.bm25.k3);
    maybe("--b", "bm25.b", settings.bm25.b);
    maybe("--mu", "qlm.mu", settings.qlm.mu);
    maybe("--fb-docs", "prf.fb_docs", settings.rocchio.fb_docs);
    maybe("--fb-terms", "prf.fb_terms", settings.rocchio.fb_terms);
    maybe("--beta", "rocchio.beta", settings.rocchio.beta);
    maybe("--alpha", "rm3.alpha", settings.rm3.alpha);
    maybe("--dim", "embedding.dim", settings.dim);
    maybe("--window", "embedding.window", settings.window);
    maybe("--negatives", "embedding.negatives", settings.negatives);
    maybe("--epochs", "embedding.epochs", settings.epochs);
    maybe("--min-count", "embedding.min_count", settings.min_count);
    maybe("--lr", "embedding.lr", settings.lr);
    maybe("--lambda", "rerank.lambda", settings.lambda);
    maybe("--fb-k", "rerank.k", settings.fb_k);
    maybe("--doc-vec", "rerank.doc_vec", settings.doc_vec);
    maybe("--mode", "rerank.mode", settings.mode);
    maybe("--depth", "run.depth", settings.depth);
    maybe("--tag", "run.tag", settings.tag);
    maybe("--threads", "threads", settings.threads);
    maybe("--seed", "seed", settings.seed);
  }
  if (const char* env = std::getenv("D2D_THREADS")) settings.threads = std::stol(env);
  if (const char* env = std::getenv("D2D_SEED")) settings.seed = std::stol(env);
  settings.rm3.fb_docs = settings.rocchio.fb_docs;
  settings.rm3.fb_terms = settings.rocchio.fb_terms;
}

int effective_threads(const Settings& settings) {
  if (settings.threads > 0) return static_cast<int>(settings.threads);
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// ----- subcommand state ------------------------------------------------

struct IndexArgs {
  std::string docs;
  std::string format = "trec";
  std::string out;
};

struct RankArgs {
  std::string index_dir;
  std::string topics;
  std::string topic_format = "tsv";
  std::string model = "bm25";
  std::string prf = "none";
  std::string out;
};

struct TrainArgs {
  std::string docs;
  std::string format = "trec";
  std::string runs;
  std::size_t top_n = 1000;
  std::string mode = "pv";  // pv | skipgram
  std::string out;
};

struct RerankArgs {
  std::string run;
  std::string vectors_dir;
  std::string index_dir;
  std::string topics;
  std::string topic_format = "tsv";
  std::string out;
};

struct EvalArgs {
  std::string run;
  std::string qrels;
  std::string metric = "map";
  std::string per_topic;
};

struct SweepArgs {
  std::string run;
  std::string vectors_dir;
  std::string index_dir;
  std::string topics;
  std::string topic_format = "tsv";
  std::string qrels;
  std::string metric = "map";
  std::string lambda_grid = "0:1:0.01";
  std::string fbk_grid = "5,10,20,30,50";
  std::string folds = "parity";
  std::string out;
};

struct QualityArgs {
  std::string base;
  std::string reranked;
  std::string qrels;
  int k = 30;
  std::string out;
};

// ----- handlers ---------------------------------------------------------

int run_index(const Settings& settings, const IndexArgs& args) {
  PipelineConfig config = pipeline_from(settings);
  std::vector<Document> docs = load_documents(args.docs, args.format, config);
  Index index = Index::build(docs, config);
  index.save(args.out);
  emit(std::filesystem::path(args.out) / "index.bin");
  emit(std::filesystem::path(args.out) / "manifest.txt");
  std::cerr << "indexed " << index.stats().num_docs << " documents, "
            << index.vocabulary_size() << " terms\n";
  return 0;
}

RankedList rank_one(const Index& index, const Topic& topic, const Settings& settings,
                    const std::string& model, const std::string& prf,
                    const std::string& tag) {
  if (model == "bm25") {
    if (prf == "none") return rank_bm25(index, topic, settings.depth, settings.bm25, tag);
    if (prf == "rocchio")
      return rank_bm25_rocchio(index, topic, settings.depth, settings.bm25,
                               settings.rocchio, tag);
    throw CLI::ValidationError("--prf", "bm25 supports none or rocchio");
  }
  if (model == "qlm") {
    if (prf == "none") return rank_qlm(index, topic, settings.depth, settings.qlm, tag);
    if (prf == "rm3")
      return rank_qlm_rm3(index, topic, settings.depth, settings.qlm, settings.rm3, tag);
    throw CLI::ValidationError("--prf", "qlm supports none or rm3");
  }
  throw CLI::ValidationError("--model", "expected bm25 or qlm");
}

int run_rank(const Settings& settings, const RankArgs& args) {
  PipelineConfig config = pipeline_from(settings);
  Index index = Index::load(args.index_dir);
  if (index.pipeline_hash() != config.hash())
    std::cerr << "warning: pipeline configuration differs from the one used at indexing\n";
  std::vector<Topic> topics = load_topics(args.topics, args.topic_format, config);

  std::string tag = settings.tag;
  if (tag.empty()) {
    tag = args.model;
    if (args.prf != "none") tag += "_prf";
  }

  std::vector<RankedList> run(topics.size());
  int threads = std::min<int>(effective_threads(settings), static_cast<int>(topics.size()));
  threads = std::max(threads, 1);
  std::vector<std::thread> pool;
  std::atomic<std::size_t> cursor{0};
  std::vector<std::string> errors(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = cursor.fetch_add(1); i < topics.size();
             i = cursor.fetch_add(1))
          run[i] = rank_one(index, topics[i], settings, args.model, args.prf, tag);
      } catch (const std::exception& e) {
        errors[static_cast<std::size_t>(t)] = e.what();
      }
    });
  }
  for (auto& worker : pool) worker.join();
  for (const auto& error : errors)
    if (!error.empty()) throw DataError(error);

  for (const auto& list : run)
    if (!list.warning.empty())
      std::cerr << "warning: topic " << list.topic_id << ": " << list.warning << "\n";
  write_run(run, args.out);
  emit(args.out);
  return 0;
}

int run_train(const Settings& settings, const TrainArgs& args) {
  PipelineConfig config = pipeline_from(settings);
  std::vector<Document> docs = load_documents(args.docs, args.format, config);
  std::vector<RankedList> runs = read_run(args.runs);
  TrainingCorpus corpus = build_training_corpus(runs, docs, args.top_n, config);
  std::cerr << "training corpus: " << corpus.documents.size() << " documents\n";

  EmbeddingParams params;
  params.dim = settings.dim;
  params.window = settings.window;
  params.negatives = settings.negatives;
  params.epochs = settings.epochs;
  params.min_count = settings.min_count;
  params.initial_lr = settings.lr;
  params.seed = static_cast<std::uint64_t>(settings.seed);
  params.threads = effective_threads(settings);

  VectorStore store;
  if (args.mode == "pv") {
    store = train_paragraph_vectors(corpus, params);
  } else if (args.mode == "skipgram") {
    store = train_skipgram(corpus, params);
  } else {
    throw CLI::ValidationError("--mode", "expected pv or skipgram");
  }
  save_vectors(store, args.out);
  emit(std::filesystem::path(args.out) / "words.vec");
  emit(std::filesystem::path(args.out) / "docs.vec");
  return 0;
}

struct RerankResources {
  VectorStore vectors;
  std::optional<Index> index;
  std::map<int, Topic> topics;
  RerankParams params;
  RerankMode mode = RerankMode::d2d;
};

RerankResources load_rerank_resources(const Settings& settings, const std::string& vectors_dir,
                                      const std::string& index_dir, const std::string& topics,
                                      const std::string& topic_format) {
  RerankResources resources;
  resources.params.lambda = settings.lambda;
  resources.params.k = settings.fb_k;
  resources.params.backend = backend_from(settings.doc_vec);
  resources.params.allow_zero_vectors = settings.allow_zero_vectors;
  resources.mode = mode_from(settings.mode);

  bool needs_vectors = resources.params.backend != DocVectorBackend::tfidf_sparse;
  if (needs_vectors) {
    if (vectors_dir.empty())
      throw CLI::ValidationError("--vectors", "required for pv/add document vectors");
    resources.vectors = load_vectors(vectors_dir);
  }
  bool needs_index = resources.params.backend != DocVectorBackend::pv;
  if (needs_index) {
    if (index_dir.empty())
      throw CLI::ValidationError("--index", "required for add/tfidf document vectors");
    resources.index = Index::load(index_dir);
  }
  if (resources.mode == RerankMode::d2q) {
    if (topics.empty())
      throw CLI::ValidationError("--topics", "required for d2q mode");
    PipelineConfig config = pipeline_from(settings);
    for (Topic& topic : load_topics(topics, topic_format, config))
      resources.topics.emplace(topic.topic_id, std::move(topic));
  }
  return resources;
}

RankedList rerank_one(const RankedList& list, const RerankResources& resources,
                      const RerankParams& params) {
  RerankContext context;
  context.vectors = &resources.vectors;
  context.index = resources.index ? &*resources.index : nullptr;
  if (resources.mode == RerankMode::d2q) {
    auto it = resources.topics.find(list.topic_id);
    if (it == resources.topics.end())
      throw DataError("run topic " + std::to_string(list.topic_id) +
                      " missing from the topics file");
    context.topic = &it->second;
  }
  return rerank(list, context, params, resources.mode);
}

int run_rerank(const Settings& settings, const RerankArgs& args) {
  std::vector<RankedList> run = read_run(args.run);
  RerankResources resources = load_rerank_resources(settings, args.vectors_dir,
                                                    args.index_dir, args.topics,
                                                    args.topic_format);
  std::vector<RankedList> out;
  out.reserve(run.size());
  for (const RankedList& list : run) {
    RankedList reranked = rerank_one(list, resources, resources.params);
    if (!reranked.warning.empty())
      std::cerr << "warning: topic " << reranked.topic_id << ": " << reranked.warning
                << "\n";
    out.push_back(std::move(reranked));
  }
  write_run(out, args.out);
  emit(args.out);
  return 0;
}

int run_eval(const Settings&, const EvalArgs& args) {
  std::vector<RankedList> run = read_run(args.run);
  Qrels qrels = load_qrels(args.qrels);
  MetricSpec spec = MetricSpec::parse(args.metric);
  std::size_t excluded = 0;
  double value = evaluate_run(run, qrels, spec, &excluded);
  if (excluded > 0)
    std::cerr << "warning: " << excluded << " topics without relevant judgments excluded\n";
  std::printf("%s %.4f\n", spec.name().c_str(), value);
  if (!args.per_topic.empty()) {
    std::ofstream csv(args.per_topic, std::ios::trunc);
    csv << "topic_id,metric,value\n";
    csv.precision(10);
    for (const RankedList& list : run) {
      auto topic_value = topic_metric(list, qrels, spec);
      if (topic_value)
        csv << list.topic_id << "," << spec.name() << "," << *topic_value << "\n";
    }
    emit(args.per_topic);
  }
  return 0;
}

std::vector<double> parse_lambda_grid(const std::string& text) {
  double lo = 0.0;
  double hi = 1.0;
  double step = 0.01;
  if (std::sscanf(text.c_str(), "%lf:%lf:%lf", &lo, &hi, &step) != 3)
    throw CLI::ValidationError("--lambda-grid", "expected lo:hi:step");
  return SweepGrid::lambda_range(lo, hi, step);
}

std::vector<std::size_t> parse_fbk_grid(const std::string& text) {
  std::vector<std::size_t> values;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    if (item.empty()) continue;
    long v = std::stol(item);
    if (v < 1) throw CLI::ValidationError("--fbk-grid", "k values must be >= 1");
    values.push_back(static_cast<std::size_t>(v));
  }
  if (values.empty()) throw CLI::ValidationError("--fbk-grid", "empty grid");
  return values;
}

void write_sweep_csv(const std::filesystem::path& path, const SweepResult& result) {
  std::ofstream csv(path, std::ios::trunc);
  csv << "lambda,k,objective\n";
  csv.precision(10);
  for (const SweepPoint& point : result.table)
    csv << point.lambda << "," << point.k << "," << point.objective << "\n";
  emit(path);
}

int run_sweep(const Settings& settings, const SweepArgs& args) {
  std::vector<RankedList> base = read_run(args.run);
  Qrels qrels = load_qrels(args.qrels);
  MetricSpec metric = MetricSpec::parse(args.metric);
  RerankResources resources = load_rerank_resources(settings, args.vectors_dir,
                                                    args.index_dir, args.topics,
                                                    args.topic_format);
  SweepGrid grid;
  grid.lambdas = parse_lambda_grid(args.lambda_grid);
  grid.ks = parse_fbk_grid(args.fbk_grid);

  std::map<int, const RankedList*> by_topic;
  for (const RankedList& list : base) by_topic[list.topic_id] = &list;

  auto objective_over = [&](std::vector<int> topic_ids) {
    return [&resources, &qrels, &metric, &by_topic, topic_ids](double lambda,
                                                               std::size_t k) {
      RerankParams params = resources.params;
      params.lambda = lambda;
      params.k = k;
      std::vector<RankedList> reranked;
      reranked.reserve(topic_ids.size());
      for (int topic_id : topic_ids)
        reranked.push_back(rerank_one(*by_topic.at(topic_id), resources, params));
      return evaluate_run(reranked, qrels, metric);
    };
  };

  std::vector<int> all_topics;
  for (const auto& [topic_id, list] : by_topic) all_topics.push_back(topic_id);

  if (args.folds == "none") {
    SweepResult result = grid_search(grid, objective_over(all_topics));
    std::printf("lambda* %.4f k* %zu objective %.6f\n", result.best.lambda, result.best.k,
                result.best.objective);
    write_sweep_csv(args.out, result);
    return 0;
  }
  if (args.folds != "parity")
    throw CLI::ValidationError("--folds", "expected parity or none");

  auto [fold_a, fold_b] = parity_split(all_topics);
  std::vector<double> test_values;
  std::filesystem::path out(args.out);
  int fold_number = 1;
  for (const FoldSplit& fold : {fold_a, fold_b}) {
    SweepResult result = grid_search(grid, objective_over(fold.train_topics));
    std::printf("fold %d (%s): lambda* %.4f k* %zu train-objective %.6f\n", fold_number,
                fold.rule.c_str(), result.best.lambda, result.best.k,
                result.best.objective);
    RerankParams tuned = resources.params;
    tuned.lambda = result.best.lambda;
    tuned.k = result.best.k;
    for (int topic_id : fold.test_topics) {
      RankedList reranked = rerank_one(*by_topic.at(topic_id), resources, tuned);
      auto value = topic_metric(reranked, qrels, metric);
      if (value) test_values.push_back(*value);
    }
    std::filesystem::path fold_csv = out;
    fold_csv.replace_extension("fold" + std::to_string(fold_number) + ".csv");
    write_sweep_csv(fold_csv, result);
    ++fold_number;
  }
  if (test_values.empty()) throw DataError("no evaluable test topics in either fold");
  double mean = 0.0;
  for (double v : test_values) mean += v;
  mean /= static_cast<double>(test_values.size());
  std::printf("%s %.4f over %zu test topics\n", metric.name().c_str(), mean,
              test_values.size());
  return 0;
}

int run_quality(const Settings&, const QualityArgs& args) {
  std::vector<RankedList> base = read_run(args.base);
  std::vector<RankedList> reranked = read_run(args.reranked);
  Qrels qrels = load_qrels(args.qrels);
  QualityStudy study = quality_correlation(base, reranked, qrels, args.k);

  std::ofstream csv(args.out, std::ios::trunc);
  csv << "topic_id,ap_at_k,improvement_pct\n";
  csv.precision(10);
  for (const QualityRow& row : study.rows)
    csv << row.topic_id << "," << row.ap_at_k << "," << row.improvement_pct << "\n";
  emit(args.out);

  std::printf("pearson_r %.4f%s\n", study.pearson_r,
              study.r_defined ? "" : " (zero variance; reported as 0)");
  std::printf("bucket ap<0.1: mean %+.2f%% over %zu topics\n", study.bucket_mean_low,
              study.bucket_count_low);
  std::printf("bucket 0.1..0.9: mean %+.2f%% over %zu topics\n", study.bucket_mean_mid,
              study.bucket_count_mid);
  std::printf("bucket ap>0.9: mean %+.2f%% over %zu topics\n", study.bucket_mean_high,
              study.bucket_count_high);
  if (study.excluded_zero_ap > 0)
    std::printf("excluded %zu topics with zero baseline AP\n", study.excluded_zero_ap);
  return 0;
}

void add_common_options(CLI::App* cmd, Settings& settings) {
  cmd->add_option("--config", settings.config_path, "key=value configuration file");
  cmd->add_option("--stopwords", settings.stopwords_path, "stopword list file");
  cmd->add_option("--stemmer", settings.stemmer, "porter|none");
  cmd->add_flag("--no-lowercase", settings.no_lowercase, "keep original case");
  cmd->add_option("--threads", settings.threads, "worker threads (0 = all cores)");
  cmd->add_option("--seed", settings.seed, "seed for all randomized steps");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ad-hoc retrieval experiments with semantic re-ranking"};
  app.require_subcommand(1);

  Settings settings;
  IndexArgs index_args;
  RankArgs rank_args;
  TrainArgs train_args;
  RerankArgs rerank_args;
  EvalArgs eval_args;
  SweepArgs sweep_args;
  QualityArgs quality_args;

  CLI::App* cmd_index = app.add_subcommand("index", "build an inverted index");
  add_common_options(cmd_index, settings);
  cmd_index->add_option("--docs", index_args.docs, "corpus file(s), comma separated")
      ->required();
  cmd_index->add_option("--format", index_args.format, "trec|jsonl");
  cmd_index->add_option("--out", index_args.out, "index directory")->required();

  CLI::App* cmd_rank = app.add_subcommand("rank", "run a lexical ranking model");
  add_common_options(cmd_rank, settings);
  cmd_rank->add_option("--index", rank_args.index_dir, "index directory")->required();
  cmd_rank->add_option("--topics", rank_args.topics, "topics file")->required();
  cmd_rank->add_option("--topic-format", rank_args.topic_format, "trec|tsv");
  cmd_rank->add_option("--model", rank_args.model, "bm25|qlm");
  cmd_rank->add_option("--prf", rank_args.prf, "none|rocchio|rm3");
  cmd_rank->add_option("--depth", settings.depth, "ranking depth");
  cmd_rank->add_option("--tag", settings.tag, "run tag");
  cmd_rank->add_option("--k1", settings.bm25.k1, "BM25 k1");
  cmd_rank->add_option("--k3", settings.bm25.k3, "BM25 k3");
  cmd_rank->add_option("--b", settings.bm25.b, "BM25 b");
  cmd_rank->add_option("--mu", settings.qlm.mu, "Dirichlet mu");
  cmd_rank->add_option("--fb-docs", settings.rocchio.fb_docs, "PRF feedback documents");
  cmd_rank->add_option("--fb-terms", settings.rocchio.fb_terms, "PRF expansion terms");
  cmd_rank->add_option("--beta", settings.rocchio.beta, "Rocchio expansion weight");
  cmd_rank->add_option("--alpha", settings.rm3.alpha, "RM3 original-model weight");
  cmd_rank->add_option("--out", rank_args.out, "output run file")->required();

  CLI::App* cmd_train = app.add_subcommand("train-embeddings",
                                           "train word/document embeddings");
  add_common_options(cmd_train, settings);
  cmd_train->add_option("--docs", train_args.docs, "corpus file(s)")->required();
  cmd_train->add_option("--format", train_args.format, "trec|jsonl");
  cmd_train->add_option("--runs", train_args.runs, "run file defining the top-n pool")
      ->required();
  cmd_train->add_option("--top-n", train_args.top_n, "pool depth per topic");
  cmd_train->add_option("--mode", train_args.mode, "pv|skipgram");
  cmd_train->add_option("--dim", settings.dim, "embedding dimensions");
  cmd_train->add_option("--window", settings.window, "context window");
  cmd_train->add_option("--negatives", settings.negatives, "negative samples per pair");
  cmd_train->add_option("--epochs", settings.epochs, "training epochs");
  cmd_train->add_option("--min-count", settings.min_count, "vocabulary frequency floor");
  cmd_train->add_option("--lr", settings.lr, "initial learning rate");
  cmd_train->add_option("--out", train_args.out, "vector directory")->required();

  CLI::App* cmd_rerank = app.add_subcommand("rerank", "semantic re-ranking of a run");
  add_common_options(cmd_rerank, settings);
  cmd_rerank->add_option("--run", rerank_args.run, "baseline run file")->required();
  cmd_rerank->add_option("--vectors", rerank_args.vectors_dir, "vector directory");
  cmd_rerank->add_option("--index", rerank_args.index_dir, "index directory");
  cmd_rerank->add_option("--topics", rerank_args.topics, "topics file (d2q mode)");
  cmd_rerank->add_option("--topic-format", rerank_args.topic_format, "trec|tsv");
  cmd_rerank->add_option("--lambda", settings.lambda, "baseline interpolation weight");
  cmd_rerank->add_option("--fb-k", settings.fb_k, "pseudo feedback set size");
  cmd_rerank->add_option("--doc-vec", settings.doc_vec, "pv|add|tfidf");
  cmd_rerank->add_option("--mode", settings.mode, "d2d|d2q");
  cmd_rerank->add_flag("--allow-zero-vectors", settings.allow_zero_vectors,
                       "score missing vectors as zero vectors");
  cmd_rerank->add_option("--out", rerank_args.out, "output run file")->required();

  CLI::App* cmd_eval = app.add_subcommand("eval", "evaluate a run against qrels");
  add_common_options(cmd_eval, settings);
  cmd_eval->add_option("--run", eval_args.run, "run file")->required();
  cmd_eval->add_option("--qrels", eval_args.qrels, "qrels file")->required();
  cmd_eval->add_option("--metric", eval_args.metric, "map|ndcg@k");
  cmd_eval->add_option("--per-topic", eval_args.per_topic, "per-topic CSV output");

  CLI::App* cmd_sweep = app.add_subcommand("sweep", "grid search over lambda and k");
  add_common_options(cmd_sweep, settings);
  cmd_sweep->add_option("--run", sweep_args.run, "baseline run file")->required();
  cmd_sweep->add_option("--vectors", sweep_args.vectors_dir, "vector directory");
  cmd_sweep->add_option("--index", sweep_args.index_dir, "index directory");
  cmd_sweep->add_option("--topics", sweep_args.topics, "topics file (d2q mode)");
  cmd_sweep->add_option("--topic-format", sweep_args.topic_format, "trec|tsv");
  cmd_sweep->add_option("--qrels", sweep_args.qrels, "qrels file")->required();
  cmd_sweep->add_option("--metric", sweep_args.metric, "tuning objective");
  cmd_sweep->add_option("--lambda-grid", sweep_args.lambda_grid, "lo:hi:step");
  cmd_sweep->add_option("--fbk-grid", sweep_args.fbk_grid, "comma-separated k values");
  cmd_sweep->add_option("--folds", sweep_args.folds, "parity|none");
  cmd_sweep->add_option("--doc-vec", settings.doc_vec, "pv|add|tfidf");
  cmd_sweep->add_option("--mode", settings.mode, "d2d|d2q");
  cmd_sweep->add_flag("--allow-zero-vectors", settings.allow_zero_vectors,
                      "score missing vectors as zero vectors");
  cmd_sweep->add_option("--out", sweep_args.out, "sweep table CSV")->required();

  CLI::App* cmd_quality = app.add_subcommand("quality-study",
                                             "feedback-quality correlation study");
  add_common_options(cmd_quality, settings);
  cmd_quality->add_option("--base", quality_args.base, "baseline run file")->required();
  cmd_quality->add_option("--reranked", quality_args.reranked, "re-ranked run file")
      ->required();
  cmd_quality->add_option("--qrels", quality_args.qrels, "qrels file")->required();
  cmd_quality->add_option("--k", quality_args.k, "feedback prefix for AP@k");
  cmd_quality->add_option("--out", quality_args.out, "quality-study CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;  // usage errors are exit status 1
  }

  try {
    CLI::App* active = app.get_subcommands().front();
    apply_config_and_env(*active, settings);
    if (active == cmd_index) return run_index(settings, index_args);
    if (active == cmd_rank) return run_rank(settings, rank_args);
    if (active == cmd_train) return run_train(settings, train_args);
    if (active == cmd_rerank) return run_rerank(settings, rerank_args);
    if (active == cmd_eval) return run_eval(settings, eval_args);
    if (active == cmd_sweep) return run_sweep(settings, sweep_args);
    if (active == cmd_quality) return run_quality(settings, quality_args);
    return 1;
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

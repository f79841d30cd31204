#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "noveltyrank/corpus.hpp"
#include "noveltyrank/digest.hpp"
#include "noveltyrank/embeddings.hpp"
#include "noveltyrank/error.hpp"
#include "noveltyrank/fusion.hpp"
#include "noveltyrank/heads/checkpoint.hpp"
#include "noveltyrank/heads/train.hpp"
#include "noveltyrank/judge.hpp"
#include "noveltyrank/metrics.hpp"
#include "noveltyrank/pairgen.hpp"
#include "noveltyrank/service.hpp"
#include "noveltyrank/simindex.hpp"

namespace noveltyrank::cli {

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

struct Options {
  std::string corpus;
  std::string embeddings;
  std::string channel = "proximity";
  std::string cutoff = corpus::kDefaultCutoff.to_string();
  std::size_t k = simindex::kDefaultTopK;
  std::size_t ratio = pairgen::kDefaultNegativesPerPositive;
  std::uint64_t seed = 42;
  std::string task;
  std::optional<std::size_t> epochs;
  std::optional<double> lr;
  std::optional<std::size_t> batch;
  std::vector<std::string> checkpoints;
  std::string pairs;
  std::string out;
  std::string format = "table";
  std::string endpoint;
  std::string listen = "127.0.0.1:8080";

  std::string neighbors;
  std::string features;
  std::string decisions;
  std::string audit;
  std::string model = "judge";
  std::string token;
  std::string system_prompt_file;
  std::string domain_report;
  std::string embedder;
  std::string static_dir;
  std::string version;
  std::size_t max_in_flight = 4;
  bool dense = false;
  bool swap = false;
  bool json_errors = false;

  const std::string& checkpoint_out() const {
    static const std::string none;
    return checkpoints.empty() ? none : checkpoints.front();
  }
};

class UsageError : public Error {
 public:
  using Error::Error;
};

metrics::ReportFormat report_format(const Options& o) {
  if (o.format == "jsonl") return metrics::ReportFormat::jsonl;
  if (o.format == "table") return metrics::ReportFormat::table;
  throw UsageError("--format must be 'table' or 'jsonl'");
}

void require(const std::string& value, std::string_view flag) {
  if (value.empty()) throw UsageError(std::string(flag) + " is required");
}

corpus::SplitResult load_split(const Options& o) {
  require(o.corpus, "--corpus");
  return corpus::temporal_split(corpus::load_corpus_file(o.corpus), Date::parse(o.cutoff));
}

embeddings::EmbeddingStore load_channel(const Options& o, embeddings::Channel channel) {
  require(o.embeddings, "--embeddings");
  const auto paths = embeddings::channel_paths(o.embeddings, channel);
  return embeddings::load_embeddings(paths.manifest, paths.matrix, channel);
}

std::ofstream open_out(const std::string& path) {
  if (const auto parent = fs::path(path).parent_path(); !parent.empty()) fs::create_directories(parent);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write '" + path + "'");
  return out;
}

void emit(const Options& o, const std::string& text) {
  if (o.out.empty()) {
    std::cout << text;
  } else {
    open_out(o.out) << text;
  }
}

std::string stats_text(const std::string& name, const corpus::CorpusStats& s, metrics::ReportFormat fmt) {
  json j = {{"split", name}, {"total", s.total}, {"positives", s.positives}, {"positive_ratio", s.positive_ratio()}};
  if (s.date_min) j["date_min"] = s.date_min->to_string();
  if (s.date_max) j["date_max"] = s.date_max->to_string();
  json per = json::object();
  for (const auto& [d, c] : s.per_domain) per[std::string(corpus::to_string(d))] = {c.positives, c.negatives};
  j["per_domain"] = per;
  if (fmt == metrics::ReportFormat::jsonl) return j.dump() + "\n";
  std::ostringstream os;
  os << name << ": total=" << s.total << " positives=" << s.positives << " ratio=" << s.positive_ratio();
  if (s.date_min) os << " dates=" << s.date_min->to_string() << ".." << s.date_max->to_string();
  os << "\n";
  for (const auto& [d, c] : s.per_domain) {
    os << "  " << corpus::to_string(d) << ": " << c.positives << " pos / " << c.negatives << " neg\n";
  }
  return os.str();
}

int cmd_ingest(const Options& o) {
  require(o.corpus, "--corpus");
  const auto fmt = report_format(o);
  const auto all = corpus::load_corpus_file(o.corpus);
  const auto split = corpus::temporal_split(all, Date::parse(o.cutoff));
  std::string text = stats_text("corpus", corpus::corpus_stats(all), fmt) +
                     stats_text("train", corpus::corpus_stats(split.train), fmt) +
                     stats_text("test", corpus::corpus_stats(split.test), fmt);
  if (o.out.empty()) {
    std::cout << text;
    return 0;
  }
  fs::create_directories(o.out);
  corpus::write_corpus_file(all, o.out + "/corpus.jsonl");
  corpus::write_corpus_file(split.train, o.out + "/train.jsonl");
  corpus::write_corpus_file(split.test, o.out + "/test.jsonl");
  open_out(o.out + "/stats.txt") << text;
  std::cout << text;
  return 0;
}

json neighbors_json(const simindex::NeighborList& list) {
  json arr = json::array();
  for (const auto& n : list.entries) arr.push_back({{"id", n.id}, {"cosine", n.cosine}});
  return {{"id", list.query_id}, {"k", list.k_requested}, {"neighbors", arr}};
}

simindex::NeighborList neighbors_from_json(const json& j) {
  simindex::NeighborList list;
  list.query_id = j.at("id").get<std::string>();
  list.k_requested = j.at("k").get<std::size_t>();
  for (const auto& n : j.at("neighbors")) list.entries.push_back({n.at("id").get<std::string>(), n.at("cosine").get<double>()});
  return list;
}

embeddings::Channel index_channel(const Options& o) {
  const auto ch = embeddings::parse_channel(o.channel);
  if (!ch) throw UsageError("--channel must be 'classification' or 'proximity'");
  if (*ch != embeddings::Channel::proximity) throw UsageError("the prior index is built over the proximity channel");
  return *ch;
}

int cmd_index(const Options& o) {
  require(o.corpus, "--corpus");
  require(o.out, "--out");
  const auto corpus = corpus::load_corpus_file(o.corpus);
  const auto store = load_channel(o, index_channel(o));
  const auto index = simindex::PriorIndex::build(corpus, store);
  auto out = open_out(o.out);
  std::size_t empty = 0;
  for (const auto& id : corpus.ordering()) {
    const auto list = index.query(id, o.k);
    if (list.entries.empty()) ++empty;
    out << neighbors_json(list).dump() << '\n';
  }
  std::cout << "indexed " << index.size() << " papers (dim " << index.dim() << "), k=" << o.k << ", " << empty
            << " without prior neighbors\n";
  return 0;
}

std::map<std::string, simindex::NeighborList> read_neighbors(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open neighbors file '" + path + "'");
  std::map<std::string, simindex::NeighborList> out;
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (line.empty()) continue;
    try {
      auto list = neighbors_from_json(json::parse(line));
      out.emplace(list.query_id, std::move(list));
    } catch (const json::exception& e) {
      throw ParseError(path + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

int cmd_featurize(const Options& o) {
  require(o.corpus, "--corpus");
  require(o.out, "--out");
  const auto corpus = corpus::load_corpus_file(o.corpus);
  const auto cls = load_channel(o, embeddings::Channel::classification);
  const auto prox = load_channel(o, embeddings::Channel::proximity);
  if (cls.dim() != prox.dim()) throw ValidationError("classification and proximity channels differ in dimension");

  std::map<std::string, simindex::NeighborList> lists;
  if (!o.neighbors.empty()) {
    lists = read_neighbors(o.neighbors);
  } else {
    const auto index = simindex::PriorIndex::build(corpus, prox);
    for (const auto& id : corpus.ordering()) lists.emplace(id, index.query(id, o.k));
  }

  fs::create_directories(o.out);
  auto sim_out = open_out(o.out + "/similarity.jsonl");
  std::map<std::string, simindex::SimilarityFeatures> similarity;
  for (const auto& id : corpus.ordering()) {
    auto it = lists.find(id);
    if (it == lists.end()) throw NotFoundError("neighbors file has no entry for paper '" + id + "'");
    auto sim = simindex::similarity_features(it->second, prox);
    sim_out << json{{"id", id},
                    {"max_sim", sim.max_sim},
                    {"avg_sim", sim.avg_sim},
                    {"neighbor_count", sim.neighbor_count()},
                    {"neighbor_ids", sim.neighbor_ids},
                    {"neighbor_cosines", sim.neighbor_cosines},
                    {"report", simindex::render_similarity_report(corpus.at(id), it->second, corpus)}}
                   .dump()
            << '\n';
    similarity.emplace(id, std::move(sim));
  }
  const auto recipe = fusion::FusionRecipe::default_recipe(prox.dim());
  fusion::FeatureSet set{recipe, fusion::batch_assemble(corpus, {&cls, &prox, nullptr}, similarity, recipe)};
  fusion::save_features(set, o.out);
  std::cout << "featurized " << set.vectors.size() << " papers, width " << recipe.expected_dim() << ", recipe "
            << recipe.hash() << "\n";
  return 0;
}

int cmd_pairs(const Options& o) {
  require(o.out, "--out");
  const auto split = load_split(o);
  const auto set = o.dense ? pairgen::dense_eval_pairs(split.test) : pairgen::sample_training_pairs(split.train, o.ratio, o.seed);
  pairgen::write_pairs_file(set, o.out);
  std::cout << (o.dense ? "dense eval" : "training") << " pairs: " << set.pairs.size();
  if (set.skipped_positives > 0) std::cout << " (" << set.skipped_positives << " positives without same-domain negatives)";
  std::cout << "\n";
  return 0;
}

heads::Task parse_task_flag(const std::string& name) {
  const auto task = heads::parse_task(name);
  if (!task) throw UsageError("--task must be 'classify' or 'rank'");
  return *task;
}

const fusion::FeatureVector& feature_of(const fusion::FeatureSet& set, const std::string& id) {
  auto it = set.vectors.find(id);
  if (it == set.vectors.end()) throw NotFoundError("no feature vector for paper '" + id + "'");
  return it->second;
}

int cmd_train(const Options& o) {
  require(o.features, "--features");
  require(o.checkpoint_out(), "--checkpoint");
  const auto task = parse_task_flag(o.task);
  auto cfg = task == heads::Task::classify ? heads::TrainConfig::classification_defaults()
                                           : heads::TrainConfig::ranking_defaults();
  cfg.seed = o.seed;
  if (o.epochs) cfg.epochs = *o.epochs;
  if (o.lr) cfg.learning_rate = *o.lr;
  if (o.batch) cfg.batch_size = *o.batch;
  cfg.validate();

  const auto features = fusion::load_features(o.features);
  const std::size_t dim = features.recipe.expected_dim();
  heads::MlpHead head = task == heads::Task::classify ? heads::init_classifier(dim, cfg.seed) : heads::init_ranker(dim, cfg.seed);
  auto state = heads::OptimizerState<float>::for_head(head);
  heads::TrainHistory history;

  if (task == heads::Task::classify) {
    const auto split = load_split(o);
    std::vector<heads::LabeledExample> data;
    for (const auto* rec : split.train.ordered_records()) data.push_back({&feature_of(features, rec->id), rec->label});
    history = heads::train_classifier(head, data, cfg, features.recipe, state);
  } else {
    require(o.pairs, "--pairs");
    const auto set = pairgen::read_pairs_file(o.pairs);
    std::vector<heads::PairExample> data;
    for (const auto& p : set.pairs) data.push_back({&feature_of(features, p.a_id), &feature_of(features, p.b_id), p.gold});
    history = heads::train_ranker(head, data, cfg, features.recipe, state);
  }

  heads::save_checkpoint({task, std::move(head), features.recipe, cfg.seed, cfg, std::move(state)}, o.checkpoint_out());
  for (std::size_t e = 0; e < history.epoch_loss.size(); ++e) {
    std::cout << "epoch " << (e + 1) << " loss " << history.epoch_loss[e] << "\n";
  }
  std::cout << "optimizer steps " << history.optimizer_steps << ", checkpoint " << o.checkpoint_out() << "\n";
  return 0;
}

json decision_json(const pairgen::ComparisonPair& p, const std::optional<pairgen::Slot>& predicted, bool inconsistent) {
  return {{"a_id", p.a_id},
          {"b_id", p.b_id},
          {"gold", pairgen::to_string(p.gold)},
          {"predicted", predicted ? json(pairgen::to_string(*predicted)) : json(nullptr)},
          {"domain", corpus::to_string(p.domain)},
          {"inconsistent", inconsistent}};
}

metrics::PairDecision decision_from_json(const json& j) {
  metrics::PairDecision d;
  d.gold = pairgen::parse_slot(j.at("gold").get<std::string>()).value();
  if (!j.at("predicted").is_null()) {
    const auto slot = pairgen::parse_slot(j["predicted"].get<std::string>());
    if (!slot) throw ParseError("bad predicted slot '" + j["predicted"].get<std::string>() + "'");
    d.predicted = slot;
  }
  if (j.contains("domain")) d.domain = corpus::parse_domain(j["domain"].get<std::string>());
  d.inconsistent = j.value("inconsistent", false);
  return d;
}

int cmd_eval(const Options& o) {
  require(o.features, "--features");
  if (o.checkpoints.size() != 1) throw UsageError("eval takes exactly one --checkpoint");
  const auto fmt = report_format(o);
  auto ckpt = heads::load_checkpoint(o.checkpoints.front());
  const auto features = fusion::load_features(o.features);
  if (!(features.recipe == ckpt.recipe)) {
    throw RecipeMismatchError("features recipe " + features.recipe.hash() + " does not match checkpoint recipe " +
                              ckpt.recipe.hash());
  }
  ckpt.head.set_mode(heads::HeadMode::infer);
  const auto split = load_split(o);

  if (ckpt.task == heads::Task::classify) {
    std::map<std::string, int> predictions, labels;
    for (const auto* rec : split.test.ordered_records()) {
      predictions[rec->id] = heads::predict_class(ckpt.head, feature_of(features, rec->id).values).label;
      labels[rec->id] = rec->label;
    }
    if (labels.empty()) throw ValidationError("test split is empty at cutoff " + o.cutoff);
    const auto counts = metrics::confusion(predictions, labels);
    emit(o, metrics::format_classification(counts, metrics::classification_metrics(counts), fmt));
    return 0;
  }

  const auto set = o.pairs.empty() ? pairgen::dense_eval_pairs(split.test) : pairgen::read_pairs_file(o.pairs);
  std::vector<metrics::PairDecision> decisions;
  std::optional<std::ofstream> dec_out;
  if (!o.decisions.empty()) dec_out = open_out(o.decisions);
  for (const auto& p : set.pairs) {
    const float sa = heads::predict_score(ckpt.head, feature_of(features, p.a_id).values);
    const float sb = heads::predict_score(ckpt.head, feature_of(features, p.b_id).values);
    const auto predicted = sa >= sb ? pairgen::Slot::A : pairgen::Slot::B;
    decisions.push_back({p.gold, predicted, p.domain, false});
    if (dec_out) *dec_out << decision_json(p, predicted, false).dump() << '\n';
  }
  emit(o, metrics::format_agreement(metrics::pairwise_agreement(decisions), fmt));
  return 0;
}

std::map<std::string, simindex::SimilarityFeatures> read_similarity(const std::string& dir,
                                                                    std::map<std::string, std::string>* reports) {
  const std::string path = dir + "/similarity.jsonl";
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open '" + path + "'");
  std::map<std::string, simindex::SimilarityFeatures> out;
  for (std::string line; std::getline(in, line);) {
    if (line.empty()) continue;
    const auto j = json::parse(line);
    simindex::SimilarityFeatures f;
    f.max_sim = j.at("max_sim").get<double>();
    f.avg_sim = j.at("avg_sim").get<double>();
    f.neighbor_ids = j.at("neighbor_ids").get<std::vector<std::string>>();
    f.neighbor_cosines = j.at("neighbor_cosines").get<std::vector<double>>();
    const auto id = j.at("id").get<std::string>();
    if (reports != nullptr) (*reports)[id] = j.value("report", std::string());
    out.emplace(id, std::move(f));
  }
  return out;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int cmd_judge(const Options& o) {
  require(o.corpus, "--corpus");
  require(o.features, "--features");
  require(o.pairs, "--pairs");
  require(o.endpoint, "--endpoint");
  const auto fmt = report_format(o);
  const auto corpus = corpus::load_corpus_file(o.corpus);
  const auto similarity = read_similarity(o.features, nullptr);
  const auto set = pairgen::read_pairs_file(o.pairs);

  judge::HttpJudgeEndpoint endpoint({o.endpoint, o.model, o.token});
  judge::JudgeOptions options;
  options.swap_ensemble = o.swap;
  if (!o.system_prompt_file.empty()) options.pairwise_system_override = read_text(o.system_prompt_file);
  const auto outcomes = judge::judge_pairs(endpoint, set.pairs, {&corpus, &similarity}, options, o.max_in_flight);

  std::optional<std::ofstream> audit_out, dec_out;
  if (!o.audit.empty()) audit_out = open_out(o.audit);
  if (!o.decisions.empty()) dec_out = open_out(o.decisions);
  std::vector<metrics::PairDecision> decisions;
  std::size_t failures = 0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto& p = set.pairs[i];
    const auto& r = outcomes[i];
    std::optional<pairgen::Slot> predicted;
    bool inconsistent = false;
    if (r.verdict) {
      predicted = r.verdict->decision;
      inconsistent = r.verdict->inconsistent;
      if (audit_out) {
        for (const auto& a : r.verdict->audit) *audit_out << judge::to_json(a).dump() << '\n';
      }
    } else {
      ++failures;
      spdlog::error("pair {}|{}: {}", p.a_id, p.b_id, r.error);
      if (audit_out) *audit_out << json{{"pair", p.a_id + "|" + p.b_id}, {"error", r.error}}.dump() << '\n';
    }
    decisions.push_back({p.gold, predicted, p.domain, inconsistent});
    if (dec_out) *dec_out << decision_json(p, predicted, inconsistent).dump() << '\n';
  }
  if (decisions.empty()) throw ValidationError("pair file is empty");
  emit(o, metrics::format_agreement(metrics::pairwise_agreement(decisions), fmt));
  if (failures > 0) {
    spdlog::error("{} of {} pairs failed", failures, decisions.size());
    return 1;
  }
  return 0;
}

std::pair<std::string, int> parse_listen(const std::string& listen) {
  const auto colon = listen.rfind(':');
  if (colon == std::string::npos) throw UsageError("--listen must be host:port");
  int port = 0;
  try {
    port = std::stoi(listen.substr(colon + 1));
  } catch (const std::exception&) {
    throw UsageError("--listen port is not a number");
  }
  if (port < 0 || port > 65535) throw UsageError("--listen port out of range");
  return {listen.substr(0, colon), port};
}

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop = true; }

int cmd_serve(const Options& o) {
  require(o.corpus, "--corpus");
  require(o.embeddings, "--embeddings");
  if (o.checkpoints.empty()) throw UsageError("serve needs at least one --checkpoint");
  service::SnapshotPaths paths;
  paths.corpus = o.corpus;
  paths.embeddings_dir = o.embeddings;
  paths.domain_report = o.domain_report;
  paths.version = o.version;
  for (const auto& path : o.checkpoints) {
    const auto task = heads::load_checkpoint(path).task;
    (task == heads::Task::classify ? paths.classify_checkpoint : paths.rank_checkpoint) = path;
  }
  const auto [host, port] = parse_listen(o.listen);
  service::NoveltyService svc(service::load_snapshot(paths),
                              o.embedder.empty() ? service::Embedder{} : service::http_embedder(o.embedder));
  service::HttpServer server(svc, {host, port, o.static_dir});
  g_stop = false;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  const int bound = server.start();
  const auto health = svc.health().body;
  std::cout << "serving " << health["papers"] << " papers on " << host << ":" << bound << " (version "
            << health["version"].get<std::string>() << ", recipe " << health["recipe_hash"].get<std::string>() << ")"
            << std::endl;
  while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(200));
  server.stop();
  return 0;
}

int cmd_report(const Options& o) {
  require(o.decisions, "--decisions");
  const auto fmt = report_format(o);
  const auto split = load_split(o);
  std::ifstream in(o.decisions);
  if (!in) throw NotFoundError("cannot open decisions file '" + o.decisions + "'");
  std::vector<metrics::PairDecision> decisions;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) decisions.push_back(decision_from_json(json::parse(line)));
  }
  emit(o, metrics::format_domain_rows(metrics::domain_breakdown(decisions, corpus::corpus_stats(split.train)), fmt));
  return 0;
}

void print_error(const Options& o, std::string_view code, const std::string& message) {
  if (o.json_errors) {
    std::cerr << json{{"error", {{"code", code}, {"message", message}}}}.dump() << std::endl;
  } else {
    std::cerr << "error: " << message << std::endl;
  }
}

std::string error_code(const std::exception& e) {
  if (dynamic_cast<const ParseError*>(&e)) return "parse_error";
  if (dynamic_cast<const NotFoundError*>(&e)) return "not_found";
  if (dynamic_cast<const RecipeMismatchError*>(&e)) return "recipe_mismatch";
  if (dynamic_cast<const ValidationError*>(&e)) return "validation_error";
  if (dynamic_cast<const ChecksumError*>(&e)) return "checksum_error";
  if (dynamic_cast<const TransportError*>(&e)) return "transport_error";
  return "error";
}

bool truthy(std::string_view v) { return v == "1" || v == "true" || v == "yes" || v == "on"; }

// Turns NOVELTYRANK_<SUB>_<FLAG> variables into arguments for options the
// command line leaves unset, so they outrank values from --config.
std::vector<std::string> with_env_args(const CLI::App& app, std::vector<std::string> args) {
  auto sub_at = std::find_if(args.begin(), args.end(), [&](const std::string& a) {
    for (const auto* s : app.get_subcommands({})) {
      if (s->get_name() == a) return true;
    }
    return false;
  });
  if (sub_at == args.end()) return args;
  const auto* sub = app.get_subcommand(*sub_at);
  const std::vector<std::string> given(sub_at + 1, args.end());
  std::vector<std::string> extra;
  for (const auto* opt : sub->get_options()) {
    const auto& env = opt->get_envname();
    if (env.empty() || env == "NOVELTYRANK_CONFIG") continue;
    const char* value = std::getenv(env.c_str());
    if (value == nullptr) continue;
    const std::string flag = "--" + opt->get_single_name();
    const bool on_command_line = std::any_of(given.begin(), given.end(), [&](const std::string& a) {
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
    if (on_command_line) continue;
    if (opt->get_expected_max() == 0) {
      if (truthy(value)) extra.push_back(flag);
    } else {
      extra.push_back(flag);
      extra.push_back(value);
    }
  }
  args.insert(sub_at + 1, extra.begin(), extra.end());
  return args;
}

}  // namespace

int run(int argc, const char* const* argv) {
  Options o;
  CLI::App app{"Novelty estimation pipeline for research papers", "noveltyrank"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "TOML config file with one [subcommand] section per subcommand")
      ->envname("NOVELTYRANK_CONFIG");
  app.add_flag("--json-errors", o.json_errors, "Print errors as JSON on stderr");

  auto add_corpus = [&](CLI::App* s) { s->add_option("--corpus", o.corpus, "Corpus JSONL file"); };
  auto add_cutoff = [&](CLI::App* s) { s->add_option("--cutoff", o.cutoff, "Temporal split date (YYYY-MM-DD)")->capture_default_str(); };
  auto add_seed = [&](CLI::App* s) { s->add_option("--seed", o.seed, "Random seed")->capture_default_str(); };
  auto add_embeddings = [&](CLI::App* s) { s->add_option("--embeddings", o.embeddings, "Embedding directory"); };
  auto add_out = [&](CLI::App* s, const std::string& what) { s->add_option("--out", o.out, what); };
  auto add_format = [&](CLI::App* s) {
    s->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"table", "jsonl"}))->capture_default_str();
  };

  auto* ingest = app.add_subcommand("ingest", "Validate a corpus and print split statistics");
  add_corpus(ingest), add_cutoff(ingest), add_seed(ingest), add_format(ingest);
  add_out(ingest, "Directory for normalized corpus, train/test splits and stats");

  auto* index = app.add_subcommand("index", "Build the prior-neighbor index and export top-k lists");
  add_corpus(index), add_embeddings(index), add_seed(index);
  index->add_option("--channel", o.channel, "Embedding channel to index")->capture_default_str();
  index->add_option("--k", o.k, "Neighbors per paper")->capture_default_str()->check(CLI::PositiveNumber);
  add_out(index, "Neighbors JSONL file");

  auto* featurize = app.add_subcommand("featurize", "Compute similarity features and fused feature vectors");
  add_corpus(featurize), add_embeddings(featurize), add_seed(featurize);
  featurize->add_option("--neighbors", o.neighbors, "Neighbors JSONL from `index` (recomputed when absent)");
  featurize->add_option("--k", o.k, "Neighbors per paper when recomputing")->capture_default_str()->check(CLI::PositiveNumber);
  add_out(featurize, "Feature directory");

  auto* pairs = app.add_subcommand("pairs", "Generate comparison pairs");
  add_corpus(pairs), add_cutoff(pairs), add_seed(pairs);
  pairs->add_option("--ratio", o.ratio, "Negatives per positive")->capture_default_str()->check(CLI::PositiveNumber);
  pairs->add_flag("--dense", o.dense, "Dense evaluation pairs over the test split");
  add_out(pairs, "Pair file");

  auto* train = app.add_subcommand("train", "Train a classification or ranking head");
  add_corpus(train), add_cutoff(train), add_seed(train);
  train->add_option("--task", o.task, "classify or rank")->required()->check(CLI::IsMember({"classify", "rank"}));
  train->add_option("--features", o.features, "Feature directory from `featurize`");
  train->add_option("--pairs", o.pairs, "Training pair file (rank)");
  train->add_option("--epochs", o.epochs, "Epochs (default 5)");
  train->add_option("--lr", o.lr, "Peak learning rate (default 2e-5 classify, 1e-5 rank)");
  train->add_option("--batch", o.batch, "Batch size (default 32 classify, 64 rank)");
  train->add_option("--checkpoint", o.checkpoints, "Output checkpoint path")->expected(1);

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on the test split");
  add_corpus(eval), add_cutoff(eval), add_seed(eval), add_format(eval);
  eval->add_option("--checkpoint", o.checkpoints, "Checkpoint to evaluate")->expected(1);
  eval->add_option("--features", o.features, "Feature directory");
  eval->add_option("--pairs", o.pairs, "Evaluation pair file (rank; dense test pairs when absent)");
  eval->add_option("--decisions", o.decisions, "Write per-pair decisions JSONL (rank)");
  add_out(eval, "Metrics output file (stdout when absent)");

  auto* judge = app.add_subcommand("judge", "Query an external judge endpoint over a pair file");
  add_corpus(judge), add_seed(judge), add_format(judge);
  judge->add_option("--features", o.features, "Feature directory holding similarity.jsonl");
  judge->add_option("--pairs", o.pairs, "Pair file");
  judge->add_option("--endpoint", o.endpoint, "Judge URL");
  judge->add_option("--model", o.model, "Model name sent to the endpoint")->capture_default_str();
  judge->add_option("--token", o.token, "Bearer token")->envname("NOVELTYRANK_JUDGE_TOKEN");
  judge->add_flag("--swap", o.swap, "Query both slot orders and flag disagreement");
  judge->add_option("--max-in-flight", o.max_in_flight, "Concurrent requests")->capture_default_str()->check(CLI::PositiveNumber);
  judge->add_option("--system-prompt-file", o.system_prompt_file, "Replacement pairwise system prompt");
  judge->add_option("--audit", o.audit, "Audit JSONL output");
  judge->add_option("--decisions", o.decisions, "Per-pair decisions JSONL output");
  add_out(judge, "Agreement output file (stdout when absent)");

  auto* serve = app.add_subcommand("serve", "Serve the HTTP API over a model snapshot");
  add_corpus(serve), add_embeddings(serve), add_seed(serve);
  serve->add_option("--checkpoint", o.checkpoints, "Checkpoint(s); the task is read from each file")->expected(1, 2);
  serve->add_option("--listen", o.listen, "host:port")->capture_default_str();
  serve->add_option("--domains", o.domain_report, "Domain report JSONL from `report --format jsonl`");
  serve->add_option("--embedder", o.embedder, "External embedder URL for text-only requests");
  serve->add_option("--static", o.static_dir, "Directory of static UI files");
  serve->add_option("--version", o.version, "Snapshot version tag (checkpoint digest when absent)");

  auto* report = app.add_subcommand("report", "Per-domain agreement breakdown");
  add_corpus(report), add_cutoff(report), add_seed(report), add_format(report);
  report->add_option("--decisions", o.decisions, "Decisions JSONL from `eval` or `judge`");
  add_out(report, "Output file (stdout when absent)");

  for (auto* sub : app.get_subcommands({})) {
    for (auto* opt : sub->get_options()) {
      const auto name = opt->get_single_name();
      if (name == "help" || !opt->get_envname().empty() || opt->get_configurable() == false) continue;
      std::string env = "NOVELTYRANK_" + sub->get_name() + "_" + name;
      std::transform(env.begin(), env.end(), env.begin(), [](unsigned char c) {
        return c == '-' ? '_' : static_cast<char>(std::toupper(c));
      });
      opt->envname(env);
    }
  }

  std::vector<std::string> args(argv + std::min(argc, 1), argv + argc);
  args = with_env_args(app, std::move(args));
  std::reverse(args.begin(), args.end());

  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    std::cout << "noveltyrank 0.1.0\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    print_error(o, "usage", e.what());
    std::cerr << app.help();
    return 2;
  }

  auto* sub = app.get_subcommands().front();
  const std::string digest = sha256_hex(sub->get_name() + "\n" + app.config_to_str(true, false)).substr(0, 16);
  std::cout << "seed=" << o.seed << " config_digest=" << digest << std::endl;

  try {
    const auto& name = sub->get_name();
    if (name == "ingest") return cmd_ingest(o);
    if (name == "index") return cmd_index(o);
    if (name == "featurize") return cmd_featurize(o);
    if (name == "pairs") return cmd_pairs(o);
    if (name == "train") return cmd_train(o);
    if (name == "eval") return cmd_eval(o);
    if (name == "judge") return cmd_judge(o);
    if (name == "serve") return cmd_serve(o);
    if (name == "report") return cmd_report(o);
  } catch (const UsageError& e) {
    print_error(o, "usage", e.what());
    std::cerr << sub->help();
    return 2;
  } catch (const std::exception& e) {
    print_error(o, error_code(e), e.what());
    return 1;
  }
  return 2;
}

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"noveltyrank"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace noveltyrank::cli

#include "noveltyrank/service.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <thread>

#include <spdlog/spdlog.h>

#include "binary_io.hpp"
#include "http.hpp"
#include "noveltyrank/digest.hpp"
#include "noveltyrank/error.hpp"
#include "noveltyrank/heads/train.hpp"

namespace noveltyrank::service {

using json = nlohmann::json;
using embeddings::Channel;
using fusion::FeaturePart;

namespace {

void check_store(const fusion::FusionRecipe& recipe, FeaturePart part, const embeddings::EmbeddingStore* store,
                 std::string_view name) {
  for (const auto& p : recipe.parts()) {
    if (p.part != part) continue;
    if (store == nullptr) throw ValidationError("recipe needs the " + std::string(name) + " channel, which is not loaded");
    if (store->dim() != p.dim) {
      throw RecipeMismatchError("recipe expects " + std::string(name) + " dim " + std::to_string(p.dim) + ", store has " +
                                std::to_string(store->dim()));
    }
  }
}

/// Resolved inputs for one paper in a request.
struct Subject {
  std::string id;
  bool known = false;
  Date published;
  std::optional<corpus::Domain> domain;
  std::vector<float> classification;
  std::vector<float> proximity;
};

struct Scored {
  simindex::NeighborList neighbors;
  simindex::SimilarityFeatures similarity;
  fusion::FeatureVector features;
};

class RequestError : public std::exception {
 public:
  explicit RequestError(Response r) : response(std::move(r)) {}
  const char* what() const noexcept override { return "request error"; }
  Response response;
};

[[noreturn]] void fail(int status, std::string_view code, std::string message, json details = json::object()) {
  throw RequestError(error_response(status, code, message, std::move(details)));
}

std::vector<float> read_vector(const json& j, std::string_view field, std::size_t dim) {
  if (!j.is_array()) fail(422, "invalid_request", "embeddings." + std::string(field) + " must be an array");
  if (j.size() != dim) {
    fail(422, "wrong_dimension",
         "embeddings." + std::string(field) + " has " + std::to_string(j.size()) + " values, expected " +
             std::to_string(dim),
         {{"field", field}, {"expected", dim}, {"actual", j.size()}});
  }
  std::vector<float> out;
  out.reserve(dim);
  for (const auto& v : j) {
    if (!v.is_number()) fail(422, "invalid_request", "embeddings." + std::string(field) + " must hold numbers");
    const float f = v.get<float>();
    if (!std::isfinite(f)) fail(422, "invalid_request", "embeddings." + std::string(field) + " holds a non-finite value");
    out.push_back(f);
  }
  return out;
}

Subject resolve_id(const ModelSnapshot& snap, const std::string& id) {
  const auto* rec = snap.corpus.find(id);
  if (rec == nullptr || !snap.proximity.contains(id)) {
    fail(404, "not_found", "unknown paper '" + id + "'", {{"id", id}});
  }
  Subject s{id, true, rec->published, rec->domain, {}, {}};
  const auto prox = snap.proximity.vector(id);
  s.proximity.assign(prox.begin(), prox.end());
  if (snap.classification && snap.classification->contains(id)) {
    const auto cls = snap.classification->vector(id);
    s.classification.assign(cls.begin(), cls.end());
  }
  return s;
}

Subject resolve(const ModelSnapshot& snap, const json& ref, const Embedder& embedder) {
  if (ref.is_string()) return resolve_id(snap, ref.get<std::string>());
  if (!ref.is_object()) fail(422, "invalid_request", "paper reference must be an id string or an object");
  if (ref.contains("paper_id") && !ref.contains("embeddings")) {
    if (!ref["paper_id"].is_string()) fail(422, "invalid_request", "paper_id must be a string");
    return resolve_id(snap, ref["paper_id"].get<std::string>());
  }
  Subject s;
  s.id = ref.value("id", ref.value("paper_id", std::string("<payload>")));
  if (!ref.contains("date") || !ref["date"].is_string()) fail(422, "invalid_request", "payload needs a 'date' string");
  try {
    s.published = Date::parse(ref["date"].get<std::string>());
  } catch (const Error& e) {
    fail(422, "invalid_request", e.what());
  }
  if (!ref.contains("domain") || !ref["domain"].is_string()) fail(422, "invalid_request", "payload needs a 'domain' string");
  s.domain = corpus::parse_domain(ref["domain"].get<std::string>());
  if (!s.domain) fail(422, "invalid_request", "unknown domain '" + ref["domain"].get<std::string>() + "'");

  const auto cls_dim = snap.classification ? snap.classification->dim() : 0;
  if (ref.contains("embeddings")) {
    const auto& e = ref["embeddings"];
    if (!e.is_object() || !e.contains("proximity")) {
      fail(422, "invalid_request", "embeddings must be an object with at least 'proximity'");
    }
    s.proximity = read_vector(e["proximity"], "proximity", snap.proximity.dim());
    if (e.contains("classification")) s.classification = read_vector(e["classification"], "classification", cls_dim);
  } else if (embedder) {
    if (!ref.contains("title") || !ref.contains("abstract")) {
      fail(422, "invalid_request", "payload needs embeddings, or title and abstract for the embedder");
    }
    EmbedResult r;
    try {
      r = embedder(ref["title"].get<std::string>(), ref["abstract"].get<std::string>());
    } catch (const std::exception& ex) {
      fail(502, "embedder_failed", ex.what());
    }
    s.proximity = read_vector(json(r.proximity), "proximity", snap.proximity.dim());
    if (!r.classification.empty()) s.classification = read_vector(json(r.classification), "classification", cls_dim);
  } else {
    fail(422, "invalid_request", "payload carries no embeddings and no embedder is configured");
  }
  return s;
}

Scored featurize(const ModelSnapshot& snap, const Subject& s, std::size_t k = simindex::kDefaultTopK) {
  Scored out;
  out.neighbors = snap.index.query_vector(s.proximity, s.published, k, s.id);
  out.similarity = simindex::similarity_features(out.neighbors, snap.proximity);
  fusion::PartInputs inputs;
  inputs.classification = s.classification;
  inputs.proximity = s.proximity;
  inputs.similarity = &out.similarity;
  try {
    out.features = fusion::assemble_from_parts(s.id, inputs, snap.recipe);
  } catch (const NotFoundError& e) {
    fail(422, "missing_input", e.what(), {{"id", s.id}});
  } catch (const ValidationError& e) {
    fail(422, "invalid_request", e.what(), {{"id", s.id}});
  }
  return out;
}

json neighbors_json(const ModelSnapshot& snap, const simindex::NeighborList& list) {
  json arr = json::array();
  for (const auto& n : list.entries) {
    const auto& rec = snap.corpus.at(n.id);
    arr.push_back({{"id", n.id}, {"title", rec.title}, {"cosine", n.cosine}, {"published", rec.published.to_string()}});
  }
  return arr;
}

void check_request_recipe(const ModelSnapshot& snap, const json& request) {
  if (!request.contains("recipe_hash")) return;
  const auto& h = request["recipe_hash"];
  if (!h.is_string() || h.get<std::string>() != snap.recipe.hash()) {
    fail(409, "recipe_mismatch", "request recipe does not match the served recipe",
         {{"expected", snap.recipe.hash()}, {"actual", h}});
  }
}

const heads::Checkpoint& rank_head(const ModelSnapshot& snap) {
  if (!snap.rank_head) fail(503, "head_unavailable", "no ranking head is loaded");
  return *snap.rank_head;
}

const json& require_object(const json& request) {
  if (!request.is_object()) fail(422, "invalid_request", "request body must be a JSON object");
  return request;
}

template <typename Fn>
Response guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const RequestError& e) {
    return e.response;
  } catch (const NotFoundError& e) {
    return error_response(404, "not_found", e.what());
  } catch (const RecipeMismatchError& e) {
    return error_response(409, "recipe_mismatch", e.what());
  } catch (const ValidationError& e) {
    return error_response(422, "invalid_request", e.what());
  } catch (const json::exception& e) {
    return error_response(422, "invalid_request", e.what());
  } catch (const std::exception& e) {
    spdlog::error("request failed: {}", e.what());
    return error_response(500, "internal", e.what());
  }
}

std::string version_from(const std::vector<std::string>& files) {
  std::string blob;
  for (const auto& f : files) {
    if (f.empty()) continue;
    const auto bytes = detail::read_file_bytes(f);
    blob.append(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  }
  return sha256_hex(blob).substr(0, 12);
}

}  // namespace

Response error_response(int status, std::string_view code, std::string_view message, json details) {
  return {status, {{"error", {{"code", code}, {"message", message}, {"details", std::move(details)}}}}};
}

std::shared_ptr<const ModelSnapshot> make_snapshot(SnapshotParts parts) {
  if (!parts.classify_head && !parts.rank_head) throw ValidationError("snapshot needs at least one head");
  if (parts.proximity.channel() != Channel::proximity) throw ValidationError("snapshot proximity store has the wrong channel");
  const fusion::FusionRecipe recipe = parts.classify_head ? parts.classify_head->recipe : parts.rank_head->recipe;
  if (parts.classify_head && parts.rank_head && !(parts.classify_head->recipe == parts.rank_head->recipe)) {
    throw RecipeMismatchError("classify head recipe " + parts.classify_head->recipe.hash() + " differs from rank head recipe " +
                              parts.rank_head->recipe.hash());
  }
  if (parts.classify_head && parts.classify_head->task != heads::Task::classify) {
    throw ValidationError("classify checkpoint holds a " + std::string(heads::to_string(parts.classify_head->task)) + " head");
  }
  if (parts.rank_head && parts.rank_head->task != heads::Task::rank) {
    throw ValidationError("rank checkpoint holds a " + std::string(heads::to_string(parts.rank_head->task)) + " head");
  }
  check_store(recipe, FeaturePart::classification_embedding, parts.classification ? &*parts.classification : nullptr,
              "classification");
  check_store(recipe, FeaturePart::proximity_embedding, &parts.proximity, "proximity");
  check_store(recipe, FeaturePart::aggregated_neighbors, &parts.proximity, "proximity");
  if (recipe.offset_of(FeaturePart::external_text_embedding)) {
    throw ValidationError("the service cannot serve recipes with an external text embedding part");
  }
  auto index = simindex::PriorIndex::build(parts.corpus, parts.proximity);
  for (auto* ckpt : {&parts.classify_head, &parts.rank_head}) {
    if (*ckpt) (*ckpt)->head.set_mode(heads::HeadMode::infer);
  }
  return std::make_shared<const ModelSnapshot>(ModelSnapshot{
      std::move(parts.corpus), std::move(parts.classification), std::move(parts.proximity), std::move(index), recipe,
      std::move(parts.classify_head), std::move(parts.rank_head), std::move(parts.version),
      std::move(parts.domain_report)});
}

std::shared_ptr<const ModelSnapshot> load_snapshot(const SnapshotPaths& paths) {
  if (paths.classify_checkpoint.empty() && paths.rank_checkpoint.empty()) {
    throw ValidationError("snapshot needs a classify or rank checkpoint");
  }
  auto corpus = corpus::load_corpus_file(paths.corpus);
  const auto prox_paths = embeddings::channel_paths(paths.embeddings_dir, Channel::proximity);
  auto proximity = embeddings::load_embeddings(prox_paths.manifest, prox_paths.matrix, Channel::proximity);
  std::optional<embeddings::EmbeddingStore> classification;
  const auto cls_paths = embeddings::channel_paths(paths.embeddings_dir, Channel::classification);
  if (std::ifstream(cls_paths.matrix).good()) {
    classification = embeddings::load_embeddings(cls_paths.manifest, cls_paths.matrix, Channel::classification);
  }
  std::optional<heads::Checkpoint> classify, rank;
  if (!paths.classify_checkpoint.empty()) classify = heads::load_checkpoint(paths.classify_checkpoint);
  if (!paths.rank_checkpoint.empty()) rank = heads::load_checkpoint(paths.rank_checkpoint);

  json report = json::array();
  if (!paths.domain_report.empty()) {
    std::ifstream in(paths.domain_report);
    if (!in) throw NotFoundError("cannot open domain report '" + paths.domain_report + "'");
    for (std::string line; std::getline(in, line);) {
      if (!line.empty()) report.push_back(json::parse(line));
    }
  }
  std::string version =
      paths.version.empty() ? version_from({paths.classify_checkpoint, paths.rank_checkpoint}) : paths.version;
  return make_snapshot({std::move(corpus), std::move(classification), std::move(proximity), std::move(classify),
                        std::move(rank), std::move(version), std::move(report)});
}

Embedder http_embedder(const std::string& url) {
  const auto scheme_end = url.find("://");
  const auto path_start = scheme_end == std::string::npos ? std::string::npos : url.find('/', scheme_end + 3);
  const std::string base = path_start == std::string::npos ? url : url.substr(0, path_start);
  const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);
  return [base, path](const std::string& title, const std::string& abstract) {
    httplib::Client client(base);
    client.set_read_timeout(60, 0);
    auto res = client.Post(path, json{{"title", title}, {"abstract", abstract}}.dump(), "application/json");
    if (!res) throw TransportError("embedder " + base + path + ": " + httplib::to_string(res.error()));
    if (res->status != 200) throw TransportError("embedder returned HTTP " + std::to_string(res->status));
    const auto body = json::parse(res->body);
    EmbedResult r;
    r.proximity = body.at("proximity").get<std::vector<float>>();
    if (body.contains("classification")) r.classification = body["classification"].get<std::vector<float>>();
    return r;
  };
}

NoveltyService::NoveltyService(std::shared_ptr<const ModelSnapshot> snapshot, Embedder embedder)
    : snapshot_(std::move(snapshot)), embedder_(std::move(embedder)) {
  if (!snapshot_) throw ValidationError("service needs a snapshot");
}

void NoveltyService::publish(std::shared_ptr<const ModelSnapshot> snapshot) {
  if (!snapshot) throw ValidationError("cannot publish an empty snapshot");
  std::lock_guard lock(mutex_);
  snapshot_ = std::move(snapshot);
}

std::shared_ptr<const ModelSnapshot> NoveltyService::snapshot() const { return current(); }

std::shared_ptr<const ModelSnapshot> NoveltyService::current() const {
  std::lock_guard lock(mutex_);
  return snapshot_;
}

Response NoveltyService::health() const {
  const auto snap = current();
  return {200,
          {{"status", "ok"},
           {"version", snap->version},
           {"recipe_hash", snap->recipe.hash()},
           {"recipe", snap->recipe.serialize()},
           {"papers", snap->corpus.size()},
           {"heads", {{"classify", snap->classify_head.has_value()}, {"rank", snap->rank_head.has_value()}}}}};
}

Response NoveltyService::score(const json& request) const {
  return guarded([&] {
    const auto snap = current();
    require_object(request);
    check_request_recipe(*snap, request);
    const json ref = request.contains("paper_id") && !request.contains("embeddings") ? request["paper_id"] : request;
    const Subject subject = resolve(*snap, ref, embedder_);
    const Scored scored = featurize(*snap, subject);
    json body = {{"paper_id", subject.id},
                 {"max_sim", scored.similarity.max_sim},
                 {"avg_sim", scored.similarity.avg_sim},
                 {"neighbors", neighbors_json(*snap, scored.neighbors)},
                 {"recipe_hash", snap->recipe.hash()},
                 {"version", snap->version}};
    if (snap->rank_head) body["score"] = heads::predict_score(snap->rank_head->head, scored.features.values);
    if (snap->classify_head) {
      const auto p = heads::predict_class(snap->classify_head->head, scored.features.values);
      body["label"] = p.label;
      body["probabilities"] = p.probabilities;
    }
    return Response{200, std::move(body)};
  });
}

Response NoveltyService::compare(const json& request) const {
  return guarded([&] {
    const auto snap = current();
    require_object(request);
    check_request_recipe(*snap, request);
    if (!request.contains("a") || !request.contains("b")) fail(422, "invalid_request", "compare needs 'a' and 'b'");
    const auto& head = rank_head(*snap).head;
    const Subject a = resolve(*snap, request["a"], embedder_);
    const Subject b = resolve(*snap, request["b"], embedder_);
    const float sa = heads::predict_score(head, featurize(*snap, a).features.values);
    const float sb = heads::predict_score(head, featurize(*snap, b).features.values);
    const bool tie = sa == sb;
    return Response{200,
                    {{"a", a.id},
                     {"b", b.id},
                     {"winner", sa >= sb ? "A" : "B"},
                     {"score_a", sa},
                     {"score_b", sb},
                     {"tie", tie},
                     {"recipe_hash", snap->recipe.hash()}}};
  });
}

Response NoveltyService::similar(const json& request) const {
  return guarded([&] {
    const auto snap = current();
    require_object(request);
    if (!request.contains("paper_id") || !request["paper_id"].is_string()) {
      fail(422, "invalid_request", "similar needs a 'paper_id' string");
    }
    std::size_t k = simindex::kDefaultTopK;
    if (request.contains("k")) {
      const auto& kj = request["k"];
      if (!kj.is_number_integer() || kj.get<long long>() < 1) fail(422, "invalid_request", "k must be a positive integer");
      k = kj.get<std::size_t>();
    }
    const Subject s = resolve_id(*snap, request["paper_id"].get<std::string>());
    const auto list = snap->index.query_vector(s.proximity, s.published, k, s.id);
    const auto sim = simindex::similarity_features(list, snap->proximity);
    return Response{200,
                    {{"paper_id", s.id},
                     {"k", k},
                     {"neighbors", neighbors_json(*snap, list)},
                     {"max_sim", sim.max_sim},
                     {"avg_sim", sim.avg_sim},
                     {"report", simindex::render_similarity_report(snap->corpus.at(s.id), list, snap->corpus)}}};
  });
}

Response NoveltyService::rank(const json& request) const {
  return guarded([&] {
    const auto snap = current();
    require_object(request);
    check_request_recipe(*snap, request);
    if (!request.contains("candidates") || !request["candidates"].is_array() || request["candidates"].empty()) {
      fail(422, "invalid_request", "rank needs a non-empty 'candidates' array of ids");
    }
    const auto& head = rank_head(*snap).head;
    std::vector<std::string> ids;
    json unknown = json::array();
    for (const auto& c : request["candidates"]) {
      if (!c.is_string()) fail(422, "invalid_request", "candidates must be id strings");
      const auto id = c.get<std::string>();
      if (!snap->corpus.contains(id) || !snap->proximity.contains(id)) {
        unknown.push_back(id);
      } else {
        ids.push_back(id);
      }
    }
    if (!unknown.empty()) {
      fail(404, "not_found", std::to_string(unknown.size()) + " unknown candidate(s)", {{"unknown_ids", unknown}});
    }
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    std::vector<std::pair<std::string, float>> scored;
    for (const auto& id : ids) {
      scored.emplace_back(id, heads::predict_score(head, featurize(*snap, resolve_id(*snap, id)).features.values));
    }
    std::stable_sort(scored.begin(), scored.end(), [](const auto& x, const auto& y) {
      if (x.second != y.second) return x.second > y.second;
      return x.first < y.first;
    });
    json ranking = json::array();
    for (std::size_t i = 0; i < scored.size(); ++i) {
      const auto& rec = snap->corpus.at(scored[i].first);
      ranking.push_back({{"rank", i + 1}, {"id", scored[i].first}, {"title", rec.title}, {"score", scored[i].second}});
    }
    return Response{200, {{"ranking", std::move(ranking)}, {"recipe_hash", snap->recipe.hash()}}};
  });
}

Response NoveltyService::domains() const {
  const auto snap = current();
  const auto stats = corpus::corpus_stats(snap->corpus);
  json counts = json::array();
  for (const auto& [domain, c] : stats.per_domain) {
    counts.push_back({{"domain", corpus::to_string(domain)}, {"positives", c.positives}, {"negatives", c.negatives}});
  }
  json recent = json::array();
  const auto order = snap->corpus.ordering();
  const std::size_t n = std::min<std::size_t>(20, order.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto& rec = snap->corpus.at(order[order.size() - 1 - i]);
    recent.push_back({{"id", rec.id},
                      {"title", rec.title},
                      {"domain", corpus::to_string(rec.domain)},
                      {"published", rec.published.to_string()}});
  }
  return {200, {{"rows", snap->domain_report}, {"corpus", counts}, {"recent", recent}, {"version", snap->version}}};
}

Response NoveltyService::dispatch(std::string_view method, std::string_view path, std::string_view body) const {
  if (method == "GET" && path == "/v1/health") return health();
  if (method == "GET" && path == "/v1/domains") return domains();
  using Handler = Response (NoveltyService::*)(const json&) const;
  Handler handler = nullptr;
  if (path == "/v1/score") handler = &NoveltyService::score;
  if (path == "/v1/compare") handler = &NoveltyService::compare;
  if (path == "/v1/similar") handler = &NoveltyService::similar;
  if (path == "/v1/rank") handler = &NoveltyService::rank;
  if (handler == nullptr) {
    if (path == "/v1/health" || path == "/v1/domains") return error_response(405, "method_not_allowed", "use GET");
    return error_response(404, "not_found", "no route for " + std::string(path));
  }
  if (method != "POST") return error_response(405, "method_not_allowed", "use POST");
  json request;
  try {
    request = json::parse(body);
  } catch (const json::parse_error& e) {
    return error_response(422, "malformed_json", e.what());
  }
  return (this->*handler)(request);
}

struct HttpServer::Impl {
  Impl(NoveltyService& svc, ServerOptions opts) : service(svc), options(std::move(opts)) {}
  NoveltyService& service;
  ServerOptions options;
  httplib::Server server;
  std::thread thread;
};

HttpServer::HttpServer(NoveltyService& service, ServerOptions options)
    : impl_(std::make_unique<Impl>(service, std::move(options))) {
  auto handle = [this](const httplib::Request& req, httplib::Response& res) {
    const Response r = impl_->service.dispatch(req.method, req.path, req.body);
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  for (const char* route : {"/v1/health", "/v1/domains", "/v1/score", "/v1/compare", "/v1/similar", "/v1/rank"}) {
    impl_->server.Get(route, handle);
    impl_->server.Post(route, handle);
  }
  if (!impl_->options.static_dir.empty() && !impl_->server.set_mount_point("/", impl_->options.static_dir)) {
    throw NotFoundError("static directory '" + impl_->options.static_dir + "' does not exist");
  }
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::start() {
  auto& s = impl_->server;
  if (impl_->options.port == 0) {
    port_ = s.bind_to_any_port(impl_->options.host);
  } else {
    port_ = s.bind_to_port(impl_->options.host, impl_->options.port) ? impl_->options.port : -1;
  }
  if (port_ < 0) throw TransportError("cannot bind " + impl_->options.host + ":" + std::to_string(impl_->options.port));
  impl_->thread = std::thread([&s] { s.listen_after_bind(); });
  s.wait_until_ready();
  return port_;
}

void HttpServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable() && impl_->thread.get_id() != std::this_thread::get_id()) impl_->thread.join();
}

}  // namespace noveltyrank::service

#include "noveltyrank/synth.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <vector>

#include "noveltyrank/error.hpp"
#include "noveltyrank/rng.hpp"

namespace noveltyrank::synth {

namespace {

constexpr std::array<corpus::Domain, 6> kStudyDomains = {corpus::Domain::AI,  corpus::Domain::ML,
                                                         corpus::Domain::CV,  corpus::Domain::Robotics,
                                                         corpus::Domain::NLP, corpus::Domain::Cryptography};

std::string category_for(corpus::Domain d) {
  switch (d) {
    case corpus::Domain::AI: return "cs.AI";
    case corpus::Domain::ML: return "cs.LG";
    case corpus::Domain::CV: return "cs.CV";
    case corpus::Domain::Robotics: return "cs.RO";
    case corpus::Domain::NLP: return "cs.CL";
    case corpus::Domain::Cryptography: return "cs.CR";
    case corpus::Domain::Other: return "cs.DL";
  }
  return "cs.DL";
}

std::vector<float> gaussian(Rng& rng, std::size_t dim, double scale) {
  std::vector<float> v(dim);
  for (auto& x : v) x = static_cast<float>(scale * rng.normal());
  return v;
}

}  // namespace

SynthBundle generate(const SynthConfig& cfg) {
  if (cfg.papers == 0 || cfg.dim == 0) throw ValidationError("synthetic corpus needs papers > 0 and dim > 0");
  if (cfg.end < cfg.start) throw ValidationError("synthetic date range is empty");
  Rng rng(cfg.seed);
  const std::size_t n_domains = kStudyDomains.size() + 1;

  std::vector<std::vector<float>> cls_centers, prox_centers;
  for (std::size_t d = 0; d < n_domains; ++d) {
    cls_centers.push_back(gaussian(rng, cfg.dim, 1.0));
    prox_centers.push_back(gaussian(rng, cfg.dim, 1.0));
  }
  auto direction = gaussian(rng, cfg.dim, 1.0);
  double norm = 0.0;
  for (float x : direction) norm += double(x) * x;
  norm = std::sqrt(norm);
  for (auto& x : direction) x = static_cast<float>(x / norm);

  const auto span_days = static_cast<std::uint64_t>(cfg.end.serial() - cfg.start.serial() + 1);
  std::vector<corpus::PaperRecord> records;
  SynthBundle bundle{{}, embeddings::EmbeddingStore(embeddings::Channel::classification, cfg.dim),
                     embeddings::EmbeddingStore(embeddings::Channel::proximity, cfg.dim)};
  std::vector<std::vector<float>> proximity_rows;

  for (std::size_t i = 0; i < cfg.papers; ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "syn-%05zu", i);
    const bool other = rng.uniform() < cfg.other_rate;
    const std::size_t d = other ? kStudyDomains.size() : static_cast<std::size_t>(rng.below(kStudyDomains.size()));
    const corpus::Domain domain = other ? corpus::Domain::Other : kStudyDomains[d];
    const int label = rng.uniform() < cfg.positive_rate ? 1 : 0;
    const Date published = Date::from_serial(cfg.start.serial() + static_cast<int>(rng.below(span_days)));

    auto cls = gaussian(rng, cfg.dim, cfg.noise);
    const double shift = label == 1 ? cfg.separation : -cfg.separation;
    for (std::size_t j = 0; j < cfg.dim; ++j) {
      cls[j] += cls_centers[d][j] + static_cast<float>(shift * direction[j]);
    }

    std::vector<float> prox;
    if (!proximity_rows.empty() && rng.uniform() < cfg.duplicate_rate) {
      prox = proximity_rows[rng.below(proximity_rows.size())];
      const float scale = rng.coin() ? 2.0f : 0.5f;
      for (auto& x : prox) x *= scale;
    } else {
      prox = gaussian(rng, cfg.dim, cfg.noise * (label == 1 ? 1.5 : 1.0));
      for (std::size_t j = 0; j < cfg.dim; ++j) prox[j] += prox_centers[d][j];
    }

    corpus::PaperRecord rec;
    rec.id = id;
    rec.title = "Synthetic study " + std::string(id) + " in " + std::string(corpus::to_string(domain));
    rec.abstract = "A synthetic abstract for " + std::string(id) + ". Label " + std::to_string(label) +
                   " drawn for pipeline testing.";
    rec.domain = domain;
    rec.published = published;
    rec.label = label;
    rec.categories = {category_for(domain)};
    records.push_back(std::move(rec));

    bundle.classification.add(id, cls);
    bundle.proximity.add(id, prox);
    proximity_rows.push_back(std::move(prox));
  }
  bundle.corpus = corpus::Corpus::from_records(std::move(records));
  return bundle;
}

void write_bundle(const SynthBundle& bundle, const std::string& dir) {
  const std::filesystem::path root(dir);
  std::filesystem::create_directories(root / "embeddings");
  corpus::write_corpus_file(bundle.corpus, (root / "corpus.jsonl").string());
  for (const auto* store : {&bundle.classification, &bundle.proximity}) {
    const auto paths = embeddings::channel_paths((root / "embeddings").string(), store->channel());
    embeddings::save_embeddings(*store, paths.manifest, paths.matrix);
  }
}

}  // namespace noveltyrank::synth

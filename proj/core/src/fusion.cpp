#include "noveltyrank/fusion.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "binary_io.hpp"
#include "noveltyrank/digest.hpp"
#include "noveltyrank/embeddings.hpp"
#include "noveltyrank/error.hpp"

namespace noveltyrank::fusion {

using json = nlohmann::json;

namespace {

constexpr std::array<std::string_view, 6> kPartNames = {
    "classification_embedding", "proximity_embedding", "aggregated_neighbors",
    "max_sim",                  "avg_sim",             "external_text_embedding",
};

bool is_scalar(FeaturePart p) { return p == FeaturePart::max_sim || p == FeaturePart::avg_sim; }

template <typename T>
void append_checked(std::vector<float>& out, std::span<const T> src, std::size_t dim, FeaturePart part,
                    std::string_view paper_id) {
  if (src.empty()) {
    throw NotFoundError("missing feature part '" + std::string(to_string(part)) + "' for paper '" +
                        std::string(paper_id) + "'");
  }
  if (src.size() != dim) {
    throw ValidationError("feature part '" + std::string(to_string(part)) + "' for paper '" + std::string(paper_id) +
                          "' has width " + std::to_string(src.size()) + ", recipe expects " + std::to_string(dim));
  }
  for (T v : src) {
    const float f = static_cast<float>(v);
    if (!std::isfinite(f)) {
      throw ValidationError("non-finite value in part '" + std::string(to_string(part)) + "' for paper '" +
                            std::string(paper_id) + "'");
    }
    out.push_back(f);
  }
}

}  // namespace

std::string_view to_string(FeaturePart part) { return kPartNames[static_cast<std::size_t>(part)]; }

std::optional<FeaturePart> parse_part(std::string_view name) {
  for (std::size_t i = 0; i < kPartNames.size(); ++i) {
    if (kPartNames[i] == name) return static_cast<FeaturePart>(i);
  }
  return std::nullopt;
}

FusionRecipe::FusionRecipe(std::vector<RecipePart> parts) : parts_(std::move(parts)) {
  if (parts_.empty()) throw ValidationError("fusion recipe must have at least one part");
  std::set<FeaturePart> seen;
  for (const auto& p : parts_) {
    if (!seen.insert(p.part).second) {
      throw ValidationError("fusion recipe repeats part '" + std::string(to_string(p.part)) + "'");
    }
    if (p.dim == 0) throw ValidationError("fusion recipe part '" + std::string(to_string(p.part)) + "' has zero width");
    if (is_scalar(p.part) && p.dim != 1) {
      throw ValidationError("scalar part '" + std::string(to_string(p.part)) + "' must have width 1");
    }
    expected_dim_ += p.dim;
  }
  hash_ = sha256_hex(serialize()).substr(0, 16);
}

FusionRecipe FusionRecipe::default_recipe(std::size_t embedding_dim) {
  return FusionRecipe({{FeaturePart::classification_embedding, embedding_dim},
                       {FeaturePart::proximity_embedding, embedding_dim},
                       {FeaturePart::aggregated_neighbors, embedding_dim},
                       {FeaturePart::max_sim, 1},
                       {FeaturePart::avg_sim, 1}});
}

std::optional<std::size_t> FusionRecipe::offset_of(FeaturePart part) const {
  std::size_t offset = 0;
  for (const auto& p : parts_) {
    if (p.part == part) return offset;
    offset += p.dim;
  }
  return std::nullopt;
}

std::string FusionRecipe::serialize() const {
  std::string out;
  for (const auto& p : parts_) {
    if (!out.empty()) out += ',';
    out += to_string(p.part);
    out += ':';
    out += std::to_string(p.dim);
  }
  return out;
}

FusionRecipe FusionRecipe::parse(std::string_view text) {
  std::vector<RecipePart> parts;
  while (!text.empty()) {
    const auto comma = text.find(',');
    const std::string_view item = text.substr(0, comma);
    text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
    const auto colon = item.find(':');
    if (colon == std::string_view::npos) throw ParseError("recipe item '" + std::string(item) + "' lacks ':dim'");
    auto part = parse_part(item.substr(0, colon));
    if (!part) throw ParseError("unknown recipe part '" + std::string(item.substr(0, colon)) + "'");
    std::size_t dim = 0;
    const auto digits = item.substr(colon + 1);
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), dim);
    if (ec != std::errc{} || ptr != digits.data() + digits.size()) {
      throw ParseError("bad width in recipe item '" + std::string(item) + "'");
    }
    parts.push_back({*part, dim});
  }
  return FusionRecipe(std::move(parts));
}

FeatureVector assemble_from_parts(std::string_view paper_id, const PartInputs& inputs, const FusionRecipe& recipe) {
  FeatureVector fv{std::string(paper_id), {}, recipe.hash()};
  fv.values.reserve(recipe.expected_dim());
  for (const auto& p : recipe.parts()) {
    switch (p.part) {
      case FeaturePart::classification_embedding:
        append_checked(fv.values, inputs.classification, p.dim, p.part, paper_id);
        break;
      case FeaturePart::proximity_embedding:
        append_checked(fv.values, inputs.proximity, p.dim, p.part, paper_id);
        break;
      case FeaturePart::external_text_embedding:
        append_checked(fv.values, inputs.external_text, p.dim, p.part, paper_id);
        break;
      case FeaturePart::aggregated_neighbors:
      case FeaturePart::max_sim:
      case FeaturePart::avg_sim: {
        if (inputs.similarity == nullptr) {
          throw NotFoundError("missing similarity features (part '" + std::string(to_string(p.part)) +
                              "') for paper '" + std::string(paper_id) + "'");
        }
        const auto& sim = *inputs.similarity;
        if (p.part == FeaturePart::aggregated_neighbors) {
          append_checked(fv.values, std::span<const double>(sim.aggregated_embedding), p.dim, p.part, paper_id);
        } else {
          const double v = p.part == FeaturePart::max_sim ? sim.max_sim : sim.avg_sim;
          append_checked(fv.values, std::span<const double>(&v, 1), 1, p.part, paper_id);
        }
        break;
      }
    }
  }
  return fv;
}

FeatureVector assemble_features(std::string_view paper_id, const FeatureSources& sources,
                                const simindex::SimilarityFeatures& similarity, const FusionRecipe& recipe) {
  auto lookup = [&](const embeddings::EmbeddingStore* store) -> std::span<const float> {
    if (store == nullptr) return {};
    const float* v = store->find(paper_id);
    return v ? std::span<const float>(v, store->dim()) : std::span<const float>{};
  };
  PartInputs in{lookup(sources.classification), lookup(sources.proximity), lookup(sources.external_text),
                &similarity};
  return assemble_from_parts(paper_id, in, recipe);
}

std::map<std::string, FeatureVector> batch_assemble(const corpus::Corpus& corpus, const FeatureSources& sources,
                                                    const std::map<std::string, simindex::SimilarityFeatures>& similarity,
                                                    const FusionRecipe& recipe) {
  std::map<std::string, FeatureVector> out;
  for (const auto& id : corpus.ordering()) {
    auto it = similarity.find(id);
    if (it == similarity.end()) throw NotFoundError("no similarity features for paper '" + id + "'");
    out.emplace(id, assemble_features(id, sources, it->second, recipe));
  }
  return out;
}

void check_recipe(const FeatureVector& features, const FusionRecipe& recipe) {
  if (features.recipe_hash != recipe.hash()) {
    throw RecipeMismatchError("feature vector for '" + features.paper_id + "' has recipe hash " +
                              features.recipe_hash + ", model expects " + recipe.hash());
  }
  if (features.values.size() != recipe.expected_dim()) {
    throw RecipeMismatchError("feature vector for '" + features.paper_id + "' has width " +
                              std::to_string(features.values.size()) + ", recipe expects " +
                              std::to_string(recipe.expected_dim()));
  }
}

void to_json(json& j, const FusionRecipe& recipe) {
  json parts = json::array();
  for (const auto& p : recipe.parts()) parts.push_back({{"part", to_string(p.part)}, {"dim", p.dim}});
  j = json{{"parts", parts}, {"expected_dim", recipe.expected_dim()}, {"hash", recipe.hash()}};
}

FusionRecipe recipe_from_json(const json& j) {
  std::vector<RecipePart> parts;
  for (const auto& p : j.at("parts")) {
    auto part = parse_part(p.at("part").get<std::string>());
    if (!part) throw ParseError("unknown recipe part '" + p.at("part").get<std::string>() + "'");
    parts.push_back({*part, p.at("dim").get<std::size_t>()});
  }
  FusionRecipe recipe(std::move(parts));
  if (j.contains("hash") && j["hash"].get<std::string>() != recipe.hash()) {
    throw RecipeMismatchError("serialized recipe hash does not match its parts");
  }
  return recipe;
}

void save_features(const FeatureSet& set, const std::string& dir) {
  const std::size_t dim = set.recipe.expected_dim();
  detail::ByteWriter w;
  w.raw(std::string_view(embeddings::kMatrixMagic, 4));
  w.u32(embeddings::kMatrixVersion);
  w.u64(set.vectors.size());
  w.u32(static_cast<std::uint32_t>(dim));
  for (const auto& [id, fv] : set.vectors) {
    check_recipe(fv, set.recipe);
    for (float v : fv.values) w.f32(v);
  }
  detail::write_file_bytes(dir + "/features.nvr", w.bytes());

  std::ofstream mf(dir + "/features.manifest.jsonl", std::ios::trunc);
  if (!mf) throw Error("cannot write '" + dir + "/features.manifest.jsonl'");
  std::size_t row = 0;
  for (const auto& [id, fv] : set.vectors) mf << json{{"id", id}, {"row", row++}}.dump() << '\n';

  std::ofstream rf(dir + "/recipe.json", std::ios::trunc);
  if (!rf) throw Error("cannot write '" + dir + "/recipe.json'");
  json rj;
  to_json(rj, set.recipe);
  rf << rj.dump(2) << '\n';
}

FeatureSet load_features(const std::string& dir) {
  std::ifstream rf(dir + "/recipe.json");
  if (!rf) throw NotFoundError("cannot open '" + dir + "/recipe.json'");
  FeatureSet set{recipe_from_json(json::parse(rf)), {}};

  const auto bytes = detail::read_file_bytes(dir + "/features.nvr");
  detail::ByteReader in(bytes);
  if (in.raw(4) != std::string_view(embeddings::kMatrixMagic, 4)) throw ParseError(dir + "/features.nvr: bad magic");
  if (in.u32() != embeddings::kMatrixVersion) throw ParseError(dir + "/features.nvr: unsupported version");
  const std::uint64_t n = in.u64();
  const std::uint32_t dim = in.u32();
  if (dim != set.recipe.expected_dim()) {
    throw RecipeMismatchError(dir + "/features.nvr: width " + std::to_string(dim) + ", recipe expects " +
                              std::to_string(set.recipe.expected_dim()));
  }
  if (in.remaining() != n * dim * sizeof(float)) throw ParseError(dir + "/features.nvr: truncated payload");

  std::ifstream mf(dir + "/features.manifest.jsonl");
  if (!mf) throw NotFoundError("cannot open '" + dir + "/features.manifest.jsonl'");
  std::vector<std::string> ids(n);
  std::size_t count = 0;
  for (std::string line; std::getline(mf, line);) {
    if (line.empty()) continue;
    const auto obj = json::parse(line);
    const auto row = obj.at("row").get<std::uint64_t>();
    if (row >= n || !ids[row].empty()) throw ParseError(dir + "/features.manifest.jsonl: bad row " + std::to_string(row));
    ids[row] = obj.at("id").get<std::string>();
    ++count;
  }
  if (count != n) throw ParseError(dir + "/features.manifest.jsonl: row count does not match matrix");
  for (std::uint64_t r = 0; r < n; ++r) {
    FeatureVector fv{ids[r], std::vector<float>(dim), set.recipe.hash()};
    for (auto& v : fv.values) v = in.f32();
    set.vectors.emplace(ids[r], std::move(fv));
  }
  return set;
}

}  // namespace noveltyrank::fusion

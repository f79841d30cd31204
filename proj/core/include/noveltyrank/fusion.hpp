#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "noveltyrank/corpus.hpp"
#include "noveltyrank/embeddings.hpp"
#include "noveltyrank/simindex.hpp"

namespace noveltyrank::fusion {

enum class FeaturePart {
  classification_embedding,
  proximity_embedding,
  aggregated_neighbors,
  max_sim,
  avg_sim,
  external_text_embedding,
};

std::string_view to_string(FeaturePart part);
std::optional<FeaturePart> parse_part(std::string_view name);

struct RecipePart {
  FeaturePart part;
  std::size_t dim;
  bool operator==(const RecipePart&) const = default;
};

/// Ordered list of feature sources concatenated into a head input.
class FusionRecipe {
 public:
  /// Throws ValidationError for empty recipes, scalar parts with dim != 1,
  /// or repeated parts.
  explicit FusionRecipe(std::vector<RecipePart> parts);

  /// classification + proximity + aggregated_neighbors + max_sim + avg_sim;
  /// 2306 wide at the default 768-dim embeddings.
  static FusionRecipe default_recipe(std::size_t embedding_dim = embeddings::kDefaultDim);

  const std::vector<RecipePart>& parts() const { return parts_; }
  std::size_t expected_dim() const { return expected_dim_; }

  /// Offset of `part` in the fused vector, if present.
  std::optional<std::size_t> offset_of(FeaturePart part) const;

  /// Canonical text form, e.g. `classification_embedding:768,...,avg_sim:1`.
  std::string serialize() const;
  static FusionRecipe parse(std::string_view text);

  /// First 16 hex chars of SHA-256 over `serialize()`.
  const std::string& hash() const { return hash_; }

  bool operator==(const FusionRecipe& other) const { return parts_ == other.parts_; }

 private:
  std::vector<RecipePart> parts_;
  std::size_t expected_dim_ = 0;
  std::string hash_;
};

struct FeatureVector {
  std::string paper_id;
  std::vector<float> values;
  std::string recipe_hash;
};

/// Raw per-part inputs for one paper. Spans may be empty when the recipe
/// does not use the corresponding part.
struct PartInputs {
  std::span<const float> classification;
  std::span<const float> proximity;
  std::span<const float> external_text;
  const simindex::SimilarityFeatures* similarity = nullptr;
};

/// Concatenates parts in recipe order. Throws NotFoundError for a missing
/// source and ValidationError for wrong widths or non-finite values.
FeatureVector assemble_from_parts(std::string_view paper_id, const PartInputs& inputs, const FusionRecipe& recipe);

struct FeatureSources {
  const embeddings::EmbeddingStore* classification = nullptr;
  const embeddings::EmbeddingStore* proximity = nullptr;
  const embeddings::EmbeddingStore* external_text = nullptr;
};

FeatureVector assemble_features(std::string_view paper_id, const FeatureSources& sources,
                                const simindex::SimilarityFeatures& similarity, const FusionRecipe& recipe);

/// One FeatureVector per corpus id; errors carry the offending paper id.
std::map<std::string, FeatureVector> batch_assemble(const corpus::Corpus& corpus, const FeatureSources& sources,
                                                    const std::map<std::string, simindex::SimilarityFeatures>& similarity,
                                                    const FusionRecipe& recipe);

/// Throws RecipeMismatchError when `features` was not produced by `recipe`.
void check_recipe(const FeatureVector& features, const FusionRecipe& recipe);

struct FeatureSet {
  FusionRecipe recipe;
  std::map<std::string, FeatureVector> vectors;
};

/// Writes `<dir>/features.nvr` (embedding matrix layout), `<dir>/features.manifest.jsonl`
/// and `<dir>/recipe.json`.
void save_features(const FeatureSet& set, const std::string& dir);
/// Throws RecipeMismatchError when the stored hash disagrees with the stored recipe.
FeatureSet load_features(const std::string& dir);

void to_json(nlohmann::json& j, const FusionRecipe& recipe);
FusionRecipe recipe_from_json(const nlohmann::json& j);

}  // namespace noveltyrank::fusion

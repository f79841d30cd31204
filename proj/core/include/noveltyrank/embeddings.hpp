#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace noveltyrank::embeddings {

enum class Channel { classification, proximity };

std::string_view to_string(Channel channel);
std::optional<Channel> parse_channel(std::string_view name);

inline constexpr std::size_t kDefaultDim = 768;

/// Id-addressable row-major float matrix for one embedding channel.
///
/// Rows are kept in insertion order, which is also the on-disk row order
/// recorded in the manifest. Zero and non-finite vectors are rejected.
class EmbeddingStore {
 public:
  EmbeddingStore(Channel channel, std::size_t dim);

  void add(std::string id, std::span<const float> vector);

  std::span<const float> vector(std::string_view id) const;
  const float* find(std::string_view id) const;
  bool contains(std::string_view id) const { return find(id) != nullptr; }

  std::span<const float> row(std::size_t index) const { return {data_.data() + index * dim_, dim_}; }

  Channel channel() const { return channel_; }
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return manifest_.size(); }
  const std::vector<std::string>& manifest() const { return manifest_; }

 private:
  Channel channel_;
  std::size_t dim_;
  std::vector<std::string> manifest_;
  std::unordered_map<std::string, std::size_t> row_of_;
  std::vector<float> data_;
};

inline constexpr char kMatrixMagic[4] = {'N', 'V', 'R', '1'};
inline constexpr std::uint32_t kMatrixVersion = 1;

/// Manifest: line-delimited `{"id":..., "row":...}` with rows 0..n-1.
/// Matrix: magic `NVR1`, version u32, n u64, dim u32, then n*dim f32, all little-endian.
EmbeddingStore load_embeddings(const std::string& manifest_path, const std::string& matrix_path, Channel channel);
void save_embeddings(const EmbeddingStore& store, const std::string& manifest_path, const std::string& matrix_path);

/// `<dir>/<channel>.manifest.jsonl` and `<dir>/<channel>.nvr`.
struct ChannelPaths {
  std::string manifest;
  std::string matrix;
};
ChannelPaths channel_paths(const std::string& dir, Channel channel);

}  // namespace noveltyrank::embeddings

#include "noveltyrank/embeddings.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "binary_io.hpp"
#include "noveltyrank/error.hpp"

namespace noveltyrank::embeddings {

using json = nlohmann::json;

std::string_view to_string(Channel channel) {
  return channel == Channel::classification ? "classification" : "proximity";
}

std::optional<Channel> parse_channel(std::string_view name) {
  if (name == "classification") return Channel::classification;
  if (name == "proximity") return Channel::proximity;
  return std::nullopt;
}

EmbeddingStore::EmbeddingStore(Channel channel, std::size_t dim) : channel_(channel), dim_(dim) {
  if (dim == 0) throw ValidationError("embedding dimension must be positive");
}

void EmbeddingStore::add(std::string id, std::span<const float> vector) {
  if (vector.size() != dim_) {
    throw ValidationError("embedding '" + id + "' has length " + std::to_string(vector.size()) + ", expected " +
                          std::to_string(dim_));
  }
  bool nonzero = false;
  for (float v : vector) {
    if (!std::isfinite(v)) throw ValidationError("embedding '" + id + "' has a non-finite entry");
    nonzero = nonzero || v != 0.0f;
  }
  if (!nonzero) throw ValidationError("embedding '" + id + "' is all-zero (cosine undefined)");
  if (row_of_.contains(id)) throw ValidationError("duplicate embedding id '" + id + "'");
  row_of_.emplace(id, manifest_.size());
  manifest_.push_back(std::move(id));
  data_.insert(data_.end(), vector.begin(), vector.end());
}

const float* EmbeddingStore::find(std::string_view id) const {
  auto it = row_of_.find(std::string(id));
  return it == row_of_.end() ? nullptr : data_.data() + it->second * dim_;
}

std::span<const float> EmbeddingStore::vector(std::string_view id) const {
  if (const float* p = find(id)) return {p, dim_};
  throw NotFoundError("no " + std::string(to_string(channel_)) + " embedding for '" + std::string(id) + "'");
}

EmbeddingStore load_embeddings(const std::string& manifest_path, const std::string& matrix_path, Channel channel) {
  const auto bytes = detail::read_file_bytes(matrix_path);
  detail::ByteReader in(bytes);
  if (in.raw(4) != std::string_view(kMatrixMagic, 4)) throw ParseError(matrix_path + ": bad magic, expected NVR1");
  if (const auto version = in.u32(); version != kMatrixVersion) {
    throw ParseError(matrix_path + ": unsupported format version " + std::to_string(version));
  }
  const std::uint64_t n = in.u64();
  const std::uint32_t dim = in.u32();
  if (dim == 0) throw ParseError(matrix_path + ": zero dimension");
  if (in.remaining() != n * dim * sizeof(float)) {
    throw ParseError(matrix_path + ": payload size does not match n=" + std::to_string(n) +
                     " dim=" + std::to_string(dim));
  }

  std::ifstream mf(manifest_path);
  if (!mf) throw NotFoundError("cannot open manifest '" + manifest_path + "'");
  std::vector<std::string> ids(n);
  std::vector<bool> seen(n, false);
  std::string line;
  std::size_t line_no = 0;
  std::size_t count = 0;
  while (std::getline(mf, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(manifest_path + " line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!obj.contains("id") || !obj["id"].is_string() || !obj.contains("row") || !obj["row"].is_number_unsigned()) {
      throw ParseError(manifest_path + " line " + std::to_string(line_no) + ": expected {\"id\": string, \"row\": int}");
    }
    const auto row = obj["row"].get<std::uint64_t>();
    if (row >= n || seen[row]) {
      throw ParseError(manifest_path + " line " + std::to_string(line_no) + ": row " + std::to_string(row) +
                       " out of range or repeated");
    }
    seen[row] = true;
    ids[row] = obj["id"].get<std::string>();
    ++count;
  }
  if (count != n) {
    throw ParseError(manifest_path + ": manifest lists " + std::to_string(count) + " rows, matrix holds " +
                     std::to_string(n));
  }

  EmbeddingStore store(channel, dim);
  std::vector<float> buf(dim);
  for (std::uint64_t r = 0; r < n; ++r) {
    for (auto& v : buf) v = in.f32();
    store.add(std::move(ids[r]), buf);
  }
  return store;
}

void save_embeddings(const EmbeddingStore& store, const std::string& manifest_path, const std::string& matrix_path) {
  detail::ByteWriter w;
  w.raw(std::string_view(kMatrixMagic, 4));
  w.u32(kMatrixVersion);
  w.u64(store.size());
  w.u32(static_cast<std::uint32_t>(store.dim()));
  for (std::size_t r = 0; r < store.size(); ++r) {
    for (float v : store.row(r)) w.f32(v);
  }
  detail::write_file_bytes(matrix_path, w.bytes());

  std::ofstream mf(manifest_path, std::ios::trunc);
  if (!mf) throw Error("cannot write manifest '" + manifest_path + "'");
  for (std::size_t r = 0; r < store.size(); ++r) {
    mf << json{{"id", store.manifest()[r]}, {"row", r}}.dump() << '\n';
  }
}

ChannelPaths channel_paths(const std::string& dir, Channel channel) {
  const std::string base = dir + "/" + std::string(to_string(channel));
  return {base + ".manifest.jsonl", base + ".nvr"};
}

}  // namespace noveltyrank::embeddings

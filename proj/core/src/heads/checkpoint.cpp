#include "noveltyrank/heads/checkpoint.hpp"

#include <nlohmann/json.hpp>

#include "binary_io.hpp"
#include "noveltyrank/digest.hpp"
#include "noveltyrank/error.hpp"

namespace noveltyrank::heads {

using json = nlohmann::json;

namespace {

// Offset of the checksum field is only known after the variable-length header.
std::uint32_t checksum_excluding(std::span<const std::uint8_t> bytes, std::size_t field_offset) {
  std::vector<std::uint8_t> copy(bytes.begin(), bytes.end());
  copy.erase(copy.begin() + static_cast<std::ptrdiff_t>(field_offset),
             copy.begin() + static_cast<std::ptrdiff_t>(field_offset + 4));
  return crc32(copy);
}

}  // namespace

std::string_view to_string(Task task) { return task == Task::classify ? "classify" : "rank"; }

std::optional<Task> parse_task(std::string_view name) {
  if (name == "classify") return Task::classify;
  if (name == "rank") return Task::rank;
  return std::nullopt;
}

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& ckpt) {
  detail::ByteWriter w;
  w.raw(std::string_view(kCheckpointMagic, 4));
  w.u32(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(ckpt.task));
  const auto& sizes = ckpt.head.layer_sizes();
  w.u32(static_cast<std::uint32_t>(sizes.size()));
  for (auto s : sizes) w.u32(static_cast<std::uint32_t>(s));
  w.f64(ckpt.head.dropout_rate());
  w.str(ckpt.recipe.serialize());
  w.u64(ckpt.seed);
  w.str(json(ckpt.config).dump());
  const bool has_opt = ckpt.optimizer.has_value() && !ckpt.optimizer->empty();
  w.u8(has_opt ? 1 : 0);
  w.u64(has_opt ? ckpt.optimizer->step : 0);
  const std::size_t params = ckpt.head.parameter_count();
  w.u64(has_opt ? 3 * params : params);
  const std::size_t checksum_at = w.bytes().size();
  w.u32(0);

  ckpt.head.for_each_tensor([&](std::span<const float> t) {
    for (float v : t) w.f32(v);
  });
  if (has_opt) {
    for (const auto* moments : {&ckpt.optimizer->first_moment, &ckpt.optimizer->second_moment}) {
      for (const auto& t : *moments) {
        for (float v : t) w.f32(v);
      }
    }
  }

  const std::uint32_t crc = checksum_excluding(w.bytes(), checksum_at);
  for (int i = 0; i < 4; ++i) w.bytes()[checksum_at + i] = static_cast<std::uint8_t>(crc >> (8 * i));
  return std::move(w.bytes());
}

Checkpoint deserialize_checkpoint(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes);
  if (r.raw(4) != std::string_view(kCheckpointMagic, 4)) throw ParseError("checkpoint: bad magic, expected NVRM");
  if (const auto version = r.u32(); version != kCheckpointVersion) {
    throw ParseError("checkpoint: unsupported version " + std::to_string(version));
  }
  const auto task_raw = r.u32();
  if (task_raw > 1) throw ParseError("checkpoint: unknown task " + std::to_string(task_raw));
  const auto n_sizes = r.u32();
  if (n_sizes < 2 || n_sizes > 64) throw ParseError("checkpoint: implausible layer count");
  std::vector<std::size_t> sizes;
  for (std::uint32_t i = 0; i < n_sizes; ++i) sizes.push_back(r.u32());
  const double dropout = r.f64();
  const std::string recipe_text = r.str();
  const std::uint64_t seed = r.u64();
  const std::string config_text = r.str();
  const bool has_opt = r.u8() != 0;
  const std::uint64_t opt_step = r.u64();
  const std::uint64_t payload_floats = r.u64();
  const std::size_t checksum_at = r.position();
  const std::uint32_t stored_crc = r.u32();

  if (checksum_excluding(bytes, checksum_at) != stored_crc) throw ChecksumError("checkpoint: checksum mismatch");

  MlpHead head(sizes, dropout);
  const std::size_t params = head.parameter_count();
  if (payload_floats != (has_opt ? 3 * params : params) || r.remaining() != payload_floats * sizeof(float)) {
    throw ParseError("checkpoint: payload size does not match declared layers");
  }

  TrainConfig config;
  try {
    config = json::parse(config_text).get<TrainConfig>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("checkpoint: bad train config: ") + e.what());
  }

  head.for_each_tensor([&](std::span<float> t) {
    for (float& v : t) v = r.f32();
  });
  std::optional<OptimizerState<float>> opt;
  if (has_opt) {
    opt = OptimizerState<float>::for_head(head);
    opt->step = opt_step;
    for (auto* moments : {&opt->first_moment, &opt->second_moment}) {
      for (auto& t : *moments) {
        for (float& v : t) v = r.f32();
      }
    }
  }
  return Checkpoint{static_cast<Task>(task_raw), std::move(head), fusion::FusionRecipe::parse(recipe_text), seed,
                    config, std::move(opt)};
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  detail::write_file_bytes(path, serialize_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::string& path) { return deserialize_checkpoint(detail::read_file_bytes(path)); }

}  // namespace noveltyrank::heads

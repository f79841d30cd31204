#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "noveltyrank/fusion.hpp"
#include "noveltyrank/heads/mlp.hpp"
#include "noveltyrank/heads/optim.hpp"

namespace noveltyrank::heads {

enum class Task : std::uint32_t { classify = 0, rank = 1 };

std::string_view to_string(Task task);
std::optional<Task> parse_task(std::string_view name);

struct Checkpoint {
  Task task;
  MlpHead head;
  fusion::FusionRecipe recipe;
  std::uint64_t seed = 0;
  TrainConfig config;
  std::optional<OptimizerState<float>> optimizer;
};

inline constexpr char kCheckpointMagic[4] = {'N', 'V', 'R', 'M'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Layout (little-endian):
///   "NVRM", version u32, task u32, layer count u32, sizes u32..., dropout f64,
///   recipe (u32 length + text), seed u64, train config (u32 length + JSON),
///   has_optimizer u8, optimizer step u64, payload float count u64,
///   crc32 u32 over every other byte of the file,
///   payload f32: per layer weights row-major then bias, optionally followed by
///   first then second moments in the same order.
std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& ckpt);

/// Throws ParseError on bad magic/version/layout and ChecksumError when the
/// stored crc32 does not match.
Checkpoint deserialize_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace noveltyrank::heads

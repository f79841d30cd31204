#pragma once

#include <array>
#include <string_view>

namespace testsupport {

/// Reported binary-classification test rows: accuracy, precision, recall, F1.
struct Table1Row {
  std::string_view model;
  double accuracy;
  double precision;
  double recall;
  double f1;
};

inline constexpr std::array<Table1Row, 4> kTable1 = {{
    {"GPT-5.1", 0.242, 0.120, 0.986, 0.215},
    {"SFT Qwen3-4B", 0.627, 0.194, 0.632, 0.297},
    {"DPO Qwen3-4B", 0.612, 0.205, 0.735, 0.321},
    {"Fine-tuned SciBert", 0.744, 0.187, 0.313, 0.234},
}};

inline constexpr std::size_t kTable1Total = 10889;
inline constexpr std::size_t kTable1Positives = 1358;

}  // namespace testsupport

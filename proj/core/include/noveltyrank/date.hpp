#pragma once

#include <chrono>
#include <compare>
#include <string>
#include <string_view>

namespace noveltyrank {

/// Calendar day (UTC, no time of day).
class Date {
 public:
  constexpr Date() = default;
  constexpr explicit Date(std::chrono::sys_days day) : day_(day) {}
  constexpr Date(int year, unsigned month, unsigned day)
      : day_(std::chrono::year_month_day{std::chrono::year{year}, std::chrono::month{month},
                                         std::chrono::day{day}}) {}

  /// Strict `YYYY-MM-DD`; throws ParseError otherwise.
  static Date parse(std::string_view text);

  constexpr std::chrono::sys_days days() const { return day_; }
  static constexpr Date from_serial(int serial) { return Date(std::chrono::sys_days{std::chrono::days{serial}}); }
  constexpr int serial() const { return static_cast<int>(day_.time_since_epoch().count()); }
  std::string to_string() const;

  constexpr auto operator<=>(const Date&) const = default;

 private:
  std::chrono::sys_days day_{};
};

}  // namespace noveltyrank

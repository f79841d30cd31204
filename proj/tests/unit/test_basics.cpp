#include <gtest/gtest.h>

#include <set>
#include <string>
#include <vector>

#include "noveltyrank/date.hpp"
#include "noveltyrank/digest.hpp"
#include "noveltyrank/error.hpp"
#include "noveltyrank/rng.hpp"

using namespace noveltyrank;

TEST(Date, ParsesAndFormats) {
  const Date d = Date::parse("2025-03-15");
  EXPECT_EQ(d, Date(2025, 3, 15));
  EXPECT_EQ(d.to_string(), "2025-03-15");
  EXPECT_LT(Date::parse("2025-03-15"), Date::parse("2025-03-16"));
  EXPECT_EQ(Date::from_serial(d.serial()), d);
}

TEST(Date, RejectsMalformed) {
  for (const char* bad : {"2025-3-15", "2025-02-30", "15-03-2025", "2025-03-15T00:00", "", "2025-13-01"}) {
    EXPECT_THROW(Date::parse(bad), ParseError) << bad;
  }
}

TEST(Rng, SameSeedSameStream) {
  Rng a(7), b(7);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next(), b.next());
}

TEST(Rng, BelowStaysInRangeAndCoversIt) {
  Rng rng(1);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 2000; ++i) {
    const auto v = rng.below(7);
    ASSERT_LT(v, 7u);
    seen.insert(v);
  }
  EXPECT_EQ(seen.size(), 7u);
}

TEST(Rng, UniformInUnitInterval) {
  Rng rng(3);
  double sum = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 10000, 0.5, 0.02);
}

TEST(Rng, ShuffleIsAPermutation) {
  Rng rng(11);
  std::vector<int> v(50);
  for (int i = 0; i < 50; ++i) v[i] = i;
  rng.shuffle(std::span<int>(v));
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 50; ++i) EXPECT_EQ(sorted[i], i);
}

TEST(Rng, DerivedSeedsDiffer) {
  EXPECT_NE(Rng::derive_seed(42, 1), Rng::derive_seed(42, 2));
  EXPECT_EQ(Rng::derive_seed(42, 1), Rng::derive_seed(42, 1));
}

TEST(Digest, Sha256KnownVectors) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(Digest, Crc32KnownVector) {
  const std::string s = "123456789";
  EXPECT_EQ(crc32({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()}), 0xCBF43926u);
}

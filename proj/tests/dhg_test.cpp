#include "dhla/dhg.hpp"

#include <gtest/gtest.h>

#include <array>
#include <random>
#include <vector>

#include "dhla/errors.hpp"
#include "test_support.hpp"

namespace dhla {
namespace {

using testing::chi_square;
using testing::chi_square_critical_01;

std::vector<std::uint32_t> forward(const Dhg& dhg, HostKey a) {
  std::vector<std::uint32_t> t(dhg.params().r);
  dhg.indices(a, t);
  return t;
}

TEST(DhgParams, PublishedDefaults) {
  const DhgParams p;
  EXPECT_EQ(p.g, 1024u);
  EXPECT_EQ(p.r, 5u);
  EXPECT_EQ(p.alpha, 6u);
  EXPECT_EQ(p.k, 14u);
  EXPECT_EQ(p.key_width, 32u);
  EXPECT_FALSE(p.violation().has_value());
}

TEST(DhgParams, AlphaAboveKNamesTheInequality) {
  DhgParams p;
  p.alpha = 15;
  p.r = 4;
  const auto v = p.violation();
  ASSERT_TRUE(v.has_value());
  EXPECT_NE(v->find("alpha <= k"), std::string::npos) << *v;
  EXPECT_THROW(p.validate(), ConfigError);
}

TEST(DhgParams, CoverageBoundNamesTheInequality) {
  DhgParams p;
  p.alpha = 5;  // 3*5 + 14 = 29 < 32
  const auto v = p.violation();
  ASSERT_TRUE(v.has_value());
  EXPECT_NE(v->find("(r-2)*alpha + k >= W"), std::string::npos) << *v;
}

TEST(DhgParams, OtherLimits) {
  DhgParams p;
  p.r = 2;
  EXPECT_TRUE(p.violation());
  p = {};
  p.g = 1000;
  EXPECT_TRUE(p.violation());
  p = {};
  p.k = 31;
  EXPECT_TRUE(p.violation());
  p = {};
  p.key_width = 33;
  EXPECT_TRUE(p.violation());
  p = {};
  p.alpha = 0;
  EXPECT_TRUE(p.violation());
}

TEST(Dhg, Deterministic) {
  const Dhg a{DhgParams{}}, b{DhgParams{}};
  for (std::uint32_t v : {0u, 1u, 0xdeadbeefu, 0xffffffffu}) {
    EXPECT_EQ(a.dh0(HostKey{v}), b.dh0(HostKey{v}));
    EXPECT_EQ(a.h1(HostKey{v}), b.h1(HostKey{v}));
    EXPECT_LT(a.dh0(HostKey{v}), 1u << 14);
    EXPECT_LT(a.h1(HostKey{v}), 1024u);
  }
}

TEST(Dhg, Dh0IsUniform) {
  const Dhg dhg{DhgParams{}};
  std::mt19937_64 rng(1);
  constexpr std::size_t kKeys = 1'000'000;
  std::vector<std::uint64_t> bins(1u << 14);
  for (std::size_t i = 0; i < kKeys; ++i) ++bins[dhg.dh0(HostKey{static_cast<std::uint32_t>(rng())})];
  const double stat = chi_square(bins, static_cast<double>(kKeys) / bins.size());
  EXPECT_LT(stat, chi_square_critical_01(bins.size() - 1.0));
}

TEST(Dhg, SeedChangesMapping) {
  DhgParams p1, p2;
  p2.seed_dh0 = p1.seed_dh0 + 1;
  const Dhg a(p1), b(p2);
  std::mt19937_64 rng(2);
  int changed = 0;
  constexpr int kKeys = 10'000;
  for (int i = 0; i < kKeys; ++i) {
    const HostKey key{static_cast<std::uint32_t>(rng())};
    changed += a.dh0(key) != b.dh0(key);
  }
  EXPECT_GE(changed, kKeys * 99 / 100);
}

TEST(Dhg, ZeroKeyMapsEveryArrayToAnchor) {
  const Dhg dhg{DhgParams{}};
  for (std::uint32_t i = 1; i < 5; ++i) EXPECT_EQ(dhg.dh(i, HostKey{0}), dhg.dh0(HostKey{0}));
}

TEST(Dhg, XorWithAnchorYieldsKeyBlock) {
  const Dhg dhg{DhgParams{}};
  std::mt19937_64 rng(3);
  for (int n = 0; n < 10'000; ++n) {
    const HostKey a{static_cast<std::uint32_t>(rng())};
    for (std::uint32_t i = 1; i < 5; ++i) {
      ASSERT_EQ(dhg.dh(i, a) ^ dhg.dh0(a), (a.value >> ((i - 1) * 6)) % (1u << 14));
      ASSERT_EQ(Dhg::recover_block(dhg.dh0(a), dhg.dh(i, a)), dhg.block(i, a));
    }
  }
  EXPECT_EQ(Dhg::recover_block(1234, 1234), 0u);
}

TEST(Dhg, DhiOutputsAreUniform) {
  const Dhg dhg{DhgParams{}};
  std::mt19937_64 rng(4);
  constexpr std::size_t kKeys = 1'000'000;
  for (std::uint32_t i = 1; i < 5; ++i) {
    std::vector<std::uint64_t> bins(1u << 14);
    for (std::size_t n = 0; n < kKeys; ++n) ++bins[dhg.dh(i, HostKey{static_cast<std::uint32_t>(rng())})];
    EXPECT_LT(chi_square(bins, static_cast<double>(kKeys) / bins.size()),
              chi_square_critical_01(bins.size() - 1.0))
        << "array " << i;
  }
}

TEST(Dhg, ExhaustiveReconstructionAtSixteenBits) {
  DhgParams p;
  p.key_width = 16;
  p.k = 8;
  p.alpha = 4;
  p.r = 4;
  const Dhg dhg(p);
  for (std::uint32_t v = 0; v < (1u << 16); ++v) {
    const HostKey a{v};
    const auto t = forward(dhg, a);
    for (std::uint32_t i = 1; i < p.r; ++i) {
      ASSERT_EQ(Dhg::recover_block(t[0], t[i]), (v >> ((i - 1) * 4)) & 0xff);
    }
    const auto back = dhg.reconstruct_key(t);
    ASSERT_TRUE(back.has_value()) << v;
    ASSERT_EQ(back->value, v);
  }
}

TEST(Dhg, RandomReconstructionAtDefaultParams) {
  const Dhg dhg{DhgParams{}};
  std::mt19937_64 rng(5);
  for (int n = 0; n < 100'000; ++n) {
    const HostKey a{static_cast<std::uint32_t>(rng())};
    const auto back = dhg.reconstruct_key(forward(dhg, a));
    ASSERT_TRUE(back.has_value());
    ASSERT_EQ(*back, a);
  }
}

TEST(Dhg, TopBlockTruncation) {
  // (5-2)*5 + 8 = 23 > W = 20: the last block carries three bits above W.
  DhgParams p;
  p.key_width = 20;
  p.k = 8;
  p.alpha = 5;
  p.g = 64;
  const Dhg dhg(p);
  std::mt19937_64 rng(6);
  for (int n = 0; n < 20'000; ++n) {
    const HostKey a{static_cast<std::uint32_t>(rng()) & 0xfffffu};
    auto t = forward(dhg, a);
    ASSERT_EQ(dhg.reconstruct_key(t), a);
    // Flipping a bit that lies above W in the top block must be rejected.
    t[4] ^= 0x80;
    ASSERT_FALSE(dhg.assemble(t).has_value());
  }
}

TEST(Dhg, OverlapViolationRejected) {
  const Dhg dhg{DhgParams{}};
  auto t = forward(dhg, HostKey{0x0a0b0c0d});
  // Bit 13 of BL(1) is key bit 13, which BL(2) also carries (as its bit 7).
  t[1] ^= 1u << 13;
  EXPECT_FALSE(dhg.assemble(t).has_value());
  EXPECT_FALSE(dhg.reconstruct_key(t).has_value());
}

TEST(Dhg, AnchorMismatchRejected) {
  const Dhg dhg{DhgParams{}};
  const HostKey a{0xc0a80101};
  auto t = forward(dhg, a);
  // XOR the same mask into every index: blocks are unchanged, anchor is not.
  for (auto& x : t) x ^= 0x155;
  ASSERT_TRUE(dhg.assemble(t).has_value());
  EXPECT_EQ(*dhg.assemble(t), a.value);
  EXPECT_FALSE(dhg.reconstruct_key(t).has_value());
}

TEST(Dhg, WrongTupleLengthIsConfigError) {
  const Dhg dhg{DhgParams{}};
  std::vector<std::uint32_t> t(4);
  EXPECT_THROW((void)dhg.reconstruct_key(t), ConfigError);
}

// Random tuples survive the r-2 overlap checks with probability
// 2^-(r-2)(k-alpha); the anchor check only lowers that further.
void expect_false_acceptance_bound(const DhgParams& p, std::uint64_t seed, bool anchor_check) {
  const Dhg dhg(p);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::uint32_t> idx(0, (1u << p.k) - 1);
  constexpr int kTuples = 100'000;
  int accepted = 0;
  std::vector<std::uint32_t> t(p.r);
  for (int n = 0; n < kTuples; ++n) {
    for (auto& x : t) x = idx(rng);
    accepted += anchor_check ? dhg.reconstruct_key(t).has_value() : dhg.assemble(t).has_value();
  }
  const double bound = 4.0 * std::ldexp(1.0, -static_cast<int>((p.r - 2) * (p.k - p.alpha)));
  EXPECT_LE(static_cast<double>(accepted) / kTuples, bound)
      << accepted << " of " << kTuples << " accepted";
}

TEST(Dhg, FalseAcceptanceAtDefaultParams) {
  expect_false_acceptance_bound(DhgParams{}, 7, true);
}

TEST(Dhg, FalseAcceptanceOverlapOnlyAtReducedParams) {
  // 2^-6 per tuple: enough acceptances for the bound to bite.
  expect_false_acceptance_bound(testing::small_params(), 8, false);
  expect_false_acceptance_bound(testing::small_params(), 9, true);
}

TEST(Dhg, AcceptedTuplesAreConsistent) {
  // Tiny parameters so random tuples are accepted often enough to check.
  DhgParams p;
  p.key_width = 8;
  p.k = 4;
  p.alpha = 2;
  p.r = 4;
  p.g = 64;
  const Dhg dhg(p);
  std::mt19937_64 rng(10);
  int accepted = 0;
  std::vector<std::uint32_t> t(p.r);
  for (int n = 0; n < 100'000; ++n) {
    for (auto& x : t) x = static_cast<std::uint32_t>(rng() & 0xf);
    if (auto key = dhg.reconstruct_key(t)) {
      ++accepted;
      for (std::uint32_t i = 0; i < p.r; ++i) ASSERT_EQ(dhg.dh(i, *key), t[i]);
    }
  }
  EXPECT_GT(accepted, 0);
}

TEST(Dhg, H1IsUniform) {
  const Dhg dhg{DhgParams{}};
  std::mt19937_64 rng(11);
  constexpr std::size_t kKeys = 1'000'000;
  std::vector<std::uint64_t> bins(1024);
  for (std::size_t i = 0; i < kKeys; ++i) ++bins[dhg.h1(HostKey{static_cast<std::uint32_t>(rng())})];
  EXPECT_LT(chi_square(bins, static_cast<double>(kKeys) / bins.size()), chi_square_critical_01(1023));
}

TEST(Dhg, H1IndependentOfDh0) {
  // 32 x 32 contingency table over the top five bits of each hash.
  const Dhg dhg{DhgParams{}};
  std::mt19937_64 rng(12);
  constexpr std::size_t kKeys = 1'000'000;
  std::array<std::array<std::uint64_t, 32>, 32> cell{};
  for (std::size_t n = 0; n < kKeys; ++n) {
    const HostKey key{static_cast<std::uint32_t>(rng())};
    ++cell[dhg.h1(key) >> 5][dhg.dh0(key) >> 9];
  }
  std::array<double, 32> row{}, col{};
  for (int i = 0; i < 32; ++i) {
    for (int j = 0; j < 32; ++j) {
      row[i] += static_cast<double>(cell[i][j]);
      col[j] += static_cast<double>(cell[i][j]);
    }
  }
  double stat = 0.0;
  for (int i = 0; i < 32; ++i) {
    for (int j = 0; j < 32; ++j) {
      const double e = row[i] * col[j] / kKeys;
      const double d = static_cast<double>(cell[i][j]) - e;
      stat += d * d / e;
    }
  }
  EXPECT_LT(stat, chi_square_critical_01(31.0 * 31.0));
}

}  // namespace
}  // namespace dhla

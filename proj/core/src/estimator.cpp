#include "dhla/estimator.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <cmath>
#include <string>

#include "dhla/errors.hpp"

namespace dhla {

namespace {

void check_width(std::uint32_t g) {
  if (g < 64 || !is_power_of_two(g)) {
    throw ConfigError("estimator width g=" + std::to_string(g) +
                      " must be a power of two and at least 64");
  }
}

void check_same(const LinearEstimator& a, const LinearEstimator& b) {
  if (a.size() != b.size()) {
    throw ConfigError("estimator widths differ: " + std::to_string(a.size()) + " vs " +
                      std::to_string(b.size()));
  }
}

}  // namespace

Estimate linear_count(std::uint64_t zeros, std::uint64_t bits) {
  Estimate e;
  if (zeros == 0) {
    zeros = 1;
    e.saturated = true;
  }
  const double g = static_cast<double>(bits);
  e.value = -g * std::log(static_cast<double>(zeros) / g);
  // -0.0 for the empty case reads badly in reports.
  if (e.value == 0.0) e.value = 0.0;
  return e;
}

std::uint64_t zero_count(std::span<const std::uint64_t> words) noexcept {
  std::uint64_t ones = 0;
  for (std::uint64_t w : words) ones += static_cast<std::uint64_t>(std::popcount(w));
  return words.size() * 64 - ones;
}

LinearEstimator::LinearEstimator(std::uint32_t g) : g_(g) {
  check_width(g);
  words_.assign(g / 64, 0);
}

LinearEstimator::LinearEstimator(std::uint32_t g, std::span<const std::uint64_t> words) : g_(g) {
  check_width(g);
  if (words.size() != g / 64) {
    throw ConfigError("estimator of g=" + std::to_string(g) + " needs " +
                      std::to_string(g / 64) + " words, got " + std::to_string(words.size()));
  }
  words_.assign(words.begin(), words.end());
}

void LinearEstimator::insert(std::uint32_t opposite_hash) noexcept {
  assert(opposite_hash < g_);
  words_[opposite_hash >> 6] |= std::uint64_t{1} << (opposite_hash & 63);
}

bool LinearEstimator::test(std::uint32_t index) const noexcept {
  assert(index < g_);
  return (words_[index >> 6] >> (index & 63)) & 1;
}

void LinearEstimator::reset() noexcept { std::fill(words_.begin(), words_.end(), 0); }

std::uint64_t LinearEstimator::zero_count() const noexcept { return dhla::zero_count(words_); }

Estimate LinearEstimator::raw_estimate() const { return linear_count(zero_count(), g_); }

LinearEstimator intersect(const LinearEstimator& a, const LinearEstimator& b) {
  check_same(a, b);
  std::vector<std::uint64_t> out(a.words().begin(), a.words().end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] &= b.words()[i];
  return LinearEstimator(a.size(), out);
}

LinearEstimator unite(const LinearEstimator& a, const LinearEstimator& b) {
  check_same(a, b);
  std::vector<std::uint64_t> out(a.words().begin(), a.words().end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] |= b.words()[i];
  return LinearEstimator(a.size(), out);
}

}  // namespace dhla

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace dhla {

/// Result of evaluating a zero count through the linear-counting formula.
/// `saturated` is set when no zero bits remained and one was substituted.
struct Estimate {
  double value = 0.0;
  bool saturated = false;
};

/// -g * ln(zeros / g), substituting zeros = 1 when the vector is full.
[[nodiscard]] Estimate linear_count(std::uint64_t zeros, std::uint64_t bits);

/// Zero bits in a packed little-endian word range.
[[nodiscard]] std::uint64_t zero_count(std::span<const std::uint64_t> words) noexcept;

/// A g-bit linear estimator. g is a power of two and at least 64 so the
/// estimator occupies whole 64-bit words; bit b lives in word b/64 at
/// position b%64.
class LinearEstimator {
 public:
  explicit LinearEstimator(std::uint32_t g);
  LinearEstimator(std::uint32_t g, std::span<const std::uint64_t> words);

  /// Sets bit `opposite_hash`. Index must be < g (asserted).
  void insert(std::uint32_t opposite_hash) noexcept;
  [[nodiscard]] bool test(std::uint32_t index) const noexcept;
  void reset() noexcept;

  [[nodiscard]] std::uint32_t size() const noexcept { return g_; }
  [[nodiscard]] std::uint64_t zero_count() const noexcept;
  [[nodiscard]] std::uint64_t one_count() const noexcept { return g_ - zero_count(); }
  [[nodiscard]] Estimate raw_estimate() const;

  [[nodiscard]] std::span<const std::uint64_t> words() const noexcept { return words_; }

  friend bool operator==(const LinearEstimator&, const LinearEstimator&) = default;

 private:
  std::uint32_t g_;
  std::vector<std::uint64_t> words_;
};

/// Bitwise AND. Throws ConfigError when sizes differ.
[[nodiscard]] LinearEstimator intersect(const LinearEstimator& a, const LinearEstimator& b);
/// Bitwise OR. Throws ConfigError when sizes differ.
[[nodiscard]] LinearEstimator unite(const LinearEstimator& a, const LinearEstimator& b);

[[nodiscard]] constexpr bool is_power_of_two(std::uint64_t v) noexcept {
  return v != 0 && (v & (v - 1)) == 0;
}

}  // namespace dhla

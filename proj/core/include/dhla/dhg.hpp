#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>

namespace dhla {

/// A host address in host-integer form (IPv4: a.b.c.d -> a<<24 | b<<16 | c<<8 | d).
struct HostKey {
  std::uint32_t value = 0;

  friend constexpr auto operator<=>(HostKey, HostKey) = default;
};

/// Shape and seeds of the double-direction hash group and of the sketch it
/// indexes. Defaults are the published parameter set.
struct DhgParams {
  std::uint32_t r = 5;       // estimator arrays
  std::uint32_t g = 1024;    // bits per estimator
  std::uint32_t k = 14;      // log2(estimators per array)
  std::uint32_t alpha = 6;   // block stride in key bits
  std::uint32_t key_width = 32;
  std::uint64_t seed_dh0 = 0x243f6a8885a308d3ULL;
  std::uint64_t seed_h1 = 0x13198a2e03707344ULL;

  /// Empty when valid, otherwise names the first violated constraint.
  [[nodiscard]] std::optional<std::string> violation() const;
  /// Throws ConfigError carrying violation().
  void validate() const;

  [[nodiscard]] std::uint32_t estimators_per_array() const noexcept { return 1u << k; }
  [[nodiscard]] std::uint64_t total_bits() const noexcept {
    return std::uint64_t{r} * estimators_per_array() * g;
  }
  [[nodiscard]] std::string describe() const;

  friend bool operator==(const DhgParams&, const DhgParams&) = default;
};

/// 64-bit finalizer from splitmix64; a bijection with full avalanche.
[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// The hash group for one parameter set.
///
/// dh(0, a) is a seeded pseudorandom map onto [0, 2^k). For 1 <= i < r,
/// dh(i, a) XORs that value with the k-bit block of `a` starting at bit
/// (i-1)*alpha, so the block comes back out as dh(0, a) ^ dh(i, a).
/// Neighbouring blocks overlap in k - alpha bits, which is what lets
/// restoration discard most wrong index combinations before touching the key.
class Dhg {
 public:
  explicit Dhg(const DhgParams& params);

  [[nodiscard]] const DhgParams& params() const noexcept { return p_; }

  [[nodiscard]] std::uint32_t dh0(HostKey a) const noexcept {
    return static_cast<std::uint32_t>(mix64(a.value ^ dh0_key_) >> (64 - p_.k));
  }

  /// Index of `a` in array i. i == 0 is dh0. Requires i < r (asserted).
  [[nodiscard]] std::uint32_t dh(std::uint32_t i, HostKey a) const noexcept;

  /// Bit of the opposite host inside an estimator, in [0, g).
  [[nodiscard]] std::uint32_t h1(HostKey b) const noexcept {
    return static_cast<std::uint32_t>(mix64(b.value ^ h1_key_) >> (64 - g_log2_));
  }

  /// Fills out[0..r) with dh(0..r-1, a). `out.size()` must be r.
  void indices(HostKey a, std::span<std::uint32_t> out) const noexcept;

  /// The k-bit key block carried by array i, given the anchor index from array 0.
  [[nodiscard]] static constexpr std::uint32_t recover_block(std::uint32_t cl0,
                                                             std::uint32_t cli) noexcept {
    return cl0 ^ cli;
  }

  /// The block of `a` that array i (>= 1) encodes.
  [[nodiscard]] std::uint32_t block(std::uint32_t i, HostKey a) const noexcept;

  /// Append block i (>= 1) to a partial key covering bits [0, k + (i-2)*alpha).
  /// For i == 1 the partial is replaced. Returns false when the overlap with
  /// the bits already present disagrees, or when the block would set bits at or
  /// above key_width. `partial` is only meaningful on success.
  [[nodiscard]] bool extend(std::uint64_t& partial, std::uint32_t i,
                            std::uint32_t block) const noexcept;

  /// Overlap-checked concatenation of all blocks of a full index tuple
  /// (tuple[0] is the anchor). No dh0 check.
  [[nodiscard]] std::optional<std::uint64_t> assemble(std::span<const std::uint32_t> tuple) const;

  /// assemble() followed by the anchor check dh0(key) == tuple[0].
  [[nodiscard]] std::optional<HostKey> reconstruct_key(std::span<const std::uint32_t> tuple) const;

 private:
  DhgParams p_;
  std::uint64_t dh0_key_;
  std::uint64_t h1_key_;
  std::uint32_t g_log2_;
  std::uint32_t k_mask_;
};

}  // namespace dhla

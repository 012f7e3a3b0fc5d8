#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dhla/dhg.hpp"
#include "dhla/estimator.hpp"

namespace dhla {

/// r arrays of 2^k linear estimators, indexed by the hash group.
///
/// Storage is one contiguous block of r * 2^k * g bits: array i, estimator j,
/// bit b is bit b of the (i * 2^k + j)-th g-bit slot. Nothing grows with the
/// stream; the allocation is fixed at construction.
///
/// update() may be called from any number of threads at once. Everything else
/// is for a sealed window, after all writers have finished.
class Dhla {
 public:
  explicit Dhla(const DhgParams& params, std::uint64_t window_id = 0);

  [[nodiscard]] const DhgParams& params() const noexcept { return dhg_.params(); }
  [[nodiscard]] const Dhg& hashes() const noexcept { return dhg_; }

  [[nodiscard]] std::uint64_t window_id() const noexcept { return window_id_; }
  void set_window_id(std::uint64_t id) noexcept { window_id_ = id; }

  /// Record that `candidate` talked to `opposite`: sets bit h1(opposite) in
  /// estimator dh(i, candidate) of every array i.
  void update(HostKey candidate, HostKey opposite) noexcept;

  void reset() noexcept;

  [[nodiscard]] std::span<const std::uint64_t> estimator(std::uint32_t i,
                                                         std::uint32_t j) const noexcept;
  [[nodiscard]] LinearEstimator extract(std::uint32_t i, std::uint32_t j) const;
  [[nodiscard]] std::uint64_t zero_count(std::uint32_t i, std::uint32_t j) const noexcept {
    return dhla::zero_count(estimator(i, j));
  }
  /// Zero bits across all of array i.
  [[nodiscard]] std::uint64_t array_zero_count(std::uint32_t i) const noexcept;

  [[nodiscard]] std::size_t payload_bytes() const noexcept { return words_.size() * 8; }
  [[nodiscard]] std::span<const std::uint64_t> words() const noexcept { return words_; }
  [[nodiscard]] std::span<std::uint64_t> mutable_words() noexcept { return words_; }

  /// Bitwise OR of `other` into this sketch. Throws ConfigError unless
  /// parameters and seeds match exactly.
  void merge_from(const Dhla& other);

  /// Bit-level equality; window ids are not compared.
  [[nodiscard]] bool same_bits(const Dhla& other) const noexcept {
    return params() == other.params() && words_ == other.words_;
  }

 private:
  std::uint64_t window_id_;
  Dhg dhg_;
  std::uint32_t words_per_estimator_;
  std::vector<std::uint64_t> words_;
};

[[nodiscard]] Dhla merge(const Dhla& a, const Dhla& b);

/// Zero-count bound below which an estimator's raw estimate exceeds theta:
/// g * exp(-theta / g).
[[nodiscard]] double hot_threshold(std::uint32_t g, std::uint32_t theta) noexcept;

/// Per-array lists of hot estimator indices, ascending.
struct HotSet {
  double zmin = 0.0;
  std::vector<std::vector<std::uint32_t>> arrays;
};

[[nodiscard]] HotSet hot_sets(const Dhla& sketch, std::uint32_t theta, unsigned workers = 1);

/// Distinct (candidate, opposite) flows in the window, from the average of
/// per-array linear counts over all r * 2^k * g bits.
[[nodiscard]] Estimate estimate_flow_count(const Dhla& sketch);

/// Probability that an arbitrary sketch bit is set after w flows:
/// 1 - exp(-w / (g * 2^k)).
[[nodiscard]] double bit_set_probability(const DhgParams& params, double w) noexcept;

/// Zeros in the AND of the host's r estimators.
[[nodiscard]] std::uint64_t shared_zero_count(const Dhla& sketch, HostKey host);

/// Cardinality of `host` from its shared zero count, discounting bits that
/// other hosts are expected to have set in all r estimators:
/// -g * ln(SZ / (g * (1 - psi^r))). Clamped at 0; saturated when SZ == 0.
[[nodiscard]] Estimate corrected_cardinality(const Dhla& sketch, HostKey host, double psi);

}  // namespace dhla

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "dhla/restore.hpp"
#include "dhla/trace.hpp"

namespace dhla {

/// Exact distinct-opposite count per candidate host for one window.
struct GroundTruth {
  std::unordered_map<std::uint32_t, std::uint64_t> counts;

  [[nodiscard]] std::uint64_t count(HostKey h) const {
    auto it = counts.find(h.value);
    return it == counts.end() ? 0 : it->second;
  }
  /// Hosts with count >= theta, ascending.
  [[nodiscard]] std::vector<HostKey> super_points(std::uint64_t theta) const;

  friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

/// Hash-free exact count: sorts the (candidate, opposite) pairs and counts
/// distinct runs. `d` must be src or dst.
[[nodiscard]] GroundTruth exact_oracle(std::span<const TraceRecord> records, Direction d);

/// Detection quality for one window. Rates are nullopt when there are no
/// true super points.
struct EvalMetrics {
  std::uint64_t window_id = 0;
  std::size_t n = 0;           // true super points
  std::size_t reported = 0;    // N'
  std::size_t false_pos = 0;   // N+
  std::size_t false_neg = 0;   // N-
  std::optional<double> fpr;
  std::optional<double> fnr;
  std::optional<double> tfr;
  /// Mean |estimate - truth| / truth over correctly reported hosts.
  std::optional<double> mean_rel_err;
};

[[nodiscard]] EvalMetrics evaluate(std::span<const SuperPointReport> reports,
                                   const GroundTruth& truth, std::uint64_t theta);

}  // namespace dhla

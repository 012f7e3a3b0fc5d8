#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "dhla/dhg.hpp"
#include "dhla/sketch.hpp"

namespace dhla {

/// One reconstructed host whose corrected cardinality reached theta.
struct SuperPointReport {
  HostKey host;
  double estimate = 0.0;
  bool saturated = false;
};

/// Low key bits rebuilt so far, tagged with the array-0 index they were
/// decoded against. After stage m (m >= 2) `bits` holds k + (m-1)*alpha bits.
struct CandidatePartialIp {
  std::uint64_t bits = 0;
  std::uint32_t anchor = 0;
};

struct RestoreOptions {
  std::uint32_t theta = 1024;
  /// Partials allowed in a stage buffer before the restore aborts.
  std::size_t max_candidates = std::size_t{1} << 20;
  unsigned workers = 1;
};

struct RestoreStats {
  std::vector<std::size_t> hot_sizes;
  /// Buffer occupancy after each stage; the last entry counts full keys.
  std::vector<std::size_t> stage_sizes;
  std::size_t candidates = 0;  // distinct verified keys before the theta filter
  Estimate flow_count;
  double psi = 0.0;
};

/// Every distinct key whose index tuple lies entirely inside `hot`, passes
/// the block overlap checks and maps back to its anchor. Ascending order.
/// Throws CapacityError if a stage produces more than max_candidates partials.
[[nodiscard]] std::vector<HostKey> restore_candidates(const Dhla& sketch, const HotSet& hot,
                                                      const RestoreOptions& options,
                                                      RestoreStats* stats = nullptr);

/// Full restore: hot sets, incremental candidate expansion, corrected
/// cardinality and the theta filter. Sorted by descending estimate, then by
/// ascending host.
[[nodiscard]] std::vector<SuperPointReport> restore_superpoints(const Dhla& sketch,
                                                                const RestoreOptions& options,
                                                                RestoreStats* stats = nullptr);

}  // namespace dhla

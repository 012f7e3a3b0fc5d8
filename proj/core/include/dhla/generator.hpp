#pragma once

#include <cstdint>
#include <vector>

#include "dhla/oracle.hpp"
#include "dhla/trace.hpp"

namespace dhla {

/// Synthetic single-window traffic. Background hosts draw their cardinality
/// from a truncated power law P(c) ~ c^-background_exponent on
/// [1, background_max_cardinality]; planted super points draw uniformly from
/// [super_min_cardinality, super_max_cardinality]. Measured hosts appear as
/// the source address.
struct GeneratorConfig {
  std::uint64_t background_hosts = 0;
  std::uint64_t background_max_cardinality = 256;
  double background_exponent = 2.0;
  std::uint64_t super_points = 0;
  std::uint64_t super_min_cardinality = 2048;
  std::uint64_t super_max_cardinality = 8192;
  /// Every distinct flow is emitted this many times.
  std::uint32_t duplicate_factor = 1;
  std::uint32_t window_start = 0;
  std::uint32_t window_seconds = 300;

  /// Throws ConfigError for infeasible configurations.
  void validate() const;
};

struct GeneratedTrace {
  /// Shuffled, with nondecreasing timestamps inside the window.
  std::vector<TraceRecord> records;
  /// Source-direction truth.
  GroundTruth truth;
  std::vector<HostKey> planted;
};

[[nodiscard]] GeneratedTrace generate_trace(const GeneratorConfig& config, std::uint64_t seed);

}  // namespace dhla

#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>

#include "dhla/sketch.hpp"

namespace dhla {

// Layout (all integers little-endian):
//   "DHLA" | u16 version | u16 r | u32 g | u16 k | u16 alpha | u16 W
//   | u64 seed_dh0 | u64 seed_h1 | u64 window_id | payload
// Payload: arrays 0..r-1, estimators 0..2^k-1, g/8 bytes each; estimator bit
// b is bit (b % 8) of byte b / 8.
inline constexpr std::uint16_t kSnapshotVersion = 1;
inline constexpr std::size_t kSnapshotHeaderBytes = 42;

void write_snapshot(const Dhla& sketch, std::ostream& out);
/// Throws ParseError on bad magic, version, parameters or a short payload.
[[nodiscard]] Dhla read_snapshot(std::istream& in);

void save_snapshot(const Dhla& sketch, const std::filesystem::path& path);
[[nodiscard]] Dhla load_snapshot(const std::filesystem::path& path);

}  // namespace dhla

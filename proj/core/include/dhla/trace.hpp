#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dhla/dhg.hpp"

namespace dhla {

/// One observed packet: capture time and the two addresses.
struct TraceRecord {
  std::uint32_t timestamp = 0;
  HostKey src;
  HostKey dst;

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

// File layout: "IPPR" | u16 version (LE) | u64 record count (LE) | records.
// Each record is 12 bytes: u32 timestamp LE, u32 src BE, u32 dst BE.
inline constexpr std::uint16_t kTraceVersion = 1;
inline constexpr std::size_t kTraceHeaderBytes = 14;
inline constexpr std::size_t kTraceRecordBytes = 12;

void write_trace(std::ostream& out, std::span<const TraceRecord> records);
void save_trace(const std::filesystem::path& path, std::span<const TraceRecord> records);

/// Sequential reader. The header is validated on construction; a record
/// count that disagrees with the data surfaces as a ParseError from next().
class TraceReader {
 public:
  explicit TraceReader(std::istream& in);

  [[nodiscard]] std::uint64_t count() const noexcept { return count_; }
  [[nodiscard]] std::uint64_t remaining() const noexcept { return count_ - read_; }

  /// Next record, or nullopt once `count()` records have been read.
  std::optional<TraceRecord> next();

 private:
  std::istream& in_;
  std::uint64_t count_ = 0;
  std::uint64_t read_ = 0;
};

[[nodiscard]] std::vector<TraceRecord> read_trace(std::istream& in);
[[nodiscard]] std::vector<TraceRecord> load_trace(const std::filesystem::path& path);

/// "a.b.c.d" for a host-integer key.
[[nodiscard]] std::string to_dotted_quad(HostKey key);
/// Parses "a.b.c.d"; nullopt on anything else.
[[nodiscard]] std::optional<HostKey> parse_dotted_quad(const std::string& text);

}  // namespace dhla

namespace dhla {

/// Which address of a record is the measured (candidate) host. `both` runs
/// one sketch per direction.
enum class Direction { src, dst, both };

[[nodiscard]] const char* to_string(Direction d) noexcept;
[[nodiscard]] std::optional<Direction> parse_direction(const std::string& text);

/// src and dst for `both`, otherwise the direction itself.
[[nodiscard]] std::vector<Direction> expand(Direction d);

/// (candidate, opposite) for a single direction. `d` must not be `both`.
struct HostPair {
  HostKey candidate;
  HostKey opposite;

  friend bool operator==(const HostPair&, const HostPair&) = default;
};

[[nodiscard]] inline HostPair orient(const TraceRecord& rec, Direction d) noexcept {
  return d == Direction::dst ? HostPair{rec.dst, rec.src} : HostPair{rec.src, rec.dst};
}

}  // namespace dhla

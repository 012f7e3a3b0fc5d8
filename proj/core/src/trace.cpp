#include "dhla/trace.hpp"

#include <array>
#include <charconv>
#include <cstring>
#include <istream>
#include <ostream>

#include "dhla/errors.hpp"

namespace dhla {

namespace {

void put_le(char* p, std::uint64_t v, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) p[i] = static_cast<char>((v >> (8 * i)) & 0xff);
}

void put_be32(char* p, std::uint32_t v) {
  for (std::size_t i = 0; i < 4; ++i) p[i] = static_cast<char>((v >> (8 * (3 - i))) & 0xff);
}

std::uint64_t get_le(const unsigned char* p, std::size_t n) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < n; ++i) v |= std::uint64_t{p[i]} << (8 * i);
  return v;
}

std::uint32_t get_be32(const unsigned char* p) {
  return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) |
         std::uint32_t{p[3]};
}

}  // namespace

void write_trace(std::ostream& out, std::span<const TraceRecord> records) {
  std::array<char, kTraceHeaderBytes> header{};
  std::memcpy(header.data(), "IPPR", 4);
  put_le(header.data() + 4, kTraceVersion, 2);
  put_le(header.data() + 6, records.size(), 8);
  out.write(header.data(), header.size());

  std::vector<char> buf;
  constexpr std::size_t kChunk = 4096;
  buf.resize(kChunk * kTraceRecordBytes);
  for (std::size_t base = 0; base < records.size(); base += kChunk) {
    const std::size_t n = std::min(kChunk, records.size() - base);
    for (std::size_t i = 0; i < n; ++i) {
      const TraceRecord& rec = records[base + i];
      char* p = buf.data() + i * kTraceRecordBytes;
      put_le(p, rec.timestamp, 4);
      put_be32(p + 4, rec.src.value);
      put_be32(p + 8, rec.dst.value);
    }
    out.write(buf.data(), static_cast<std::streamsize>(n * kTraceRecordBytes));
  }
  if (!out) throw std::runtime_error("failed writing trace");
}

void save_trace(const std::filesystem::path& path, std::span<const TraceRecord> records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_trace(out, records);
}

TraceReader::TraceReader(std::istream& in) : in_(in) {
  std::array<unsigned char, kTraceHeaderBytes> header{};
  in_.read(reinterpret_cast<char*>(header.data()), header.size());
  const auto got = static_cast<std::uint64_t>(in_.gcount());
  if (got < 4 || std::memcmp(header.data(), "IPPR", 4) != 0) {
    throw ParseError("bad trace magic", 0);
  }
  if (got != header.size()) throw ParseError("trace header truncated", got);
  const auto version = get_le(header.data() + 4, 2);
  if (version != kTraceVersion) {
    throw ParseError("unsupported trace version " + std::to_string(version), 4);
  }
  count_ = get_le(header.data() + 6, 8);
}

std::optional<TraceRecord> TraceReader::next() {
  if (read_ == count_) return std::nullopt;
  std::array<unsigned char, kTraceRecordBytes> raw{};
  in_.read(reinterpret_cast<char*>(raw.data()), raw.size());
  if (static_cast<std::size_t>(in_.gcount()) != raw.size()) {
    throw ParseError("trace truncated: header promises " + std::to_string(count_) +
                         " records, record " + std::to_string(read_) + " is incomplete",
                     kTraceHeaderBytes + read_ * kTraceRecordBytes +
                         static_cast<std::uint64_t>(in_.gcount()));
  }
  ++read_;
  return TraceRecord{static_cast<std::uint32_t>(get_le(raw.data(), 4)), HostKey{get_be32(raw.data() + 4)},
                     HostKey{get_be32(raw.data() + 8)}};
}

std::vector<TraceRecord> read_trace(std::istream& in) {
  TraceReader reader(in);
  std::vector<TraceRecord> out;
  // The count is untrusted; cap the up-front reservation.
  out.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(reader.count(), 1u << 24)));
  while (auto rec = reader.next()) out.push_back(*rec);
  if (in.peek() != std::char_traits<char>::eof()) {
    throw ParseError("trailing bytes after " + std::to_string(reader.count()) + " records",
                     kTraceHeaderBytes + reader.count() * kTraceRecordBytes);
  }
  return out;
}

std::vector<TraceRecord> load_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_trace(in);
}

std::string to_dotted_quad(HostKey key) {
  const std::uint32_t v = key.value;
  return std::to_string(v >> 24) + '.' + std::to_string((v >> 16) & 0xff) + '.' +
         std::to_string((v >> 8) & 0xff) + '.' + std::to_string(v & 0xff);
}

std::optional<HostKey> parse_dotted_quad(const std::string& text) {
  std::uint32_t value = 0;
  const char* p = text.data();
  const char* end = text.data() + text.size();
  for (int octet = 0; octet < 4; ++octet) {
    if (octet > 0) {
      if (p == end || *p != '.') return std::nullopt;
      ++p;
    }
    unsigned part = 0;
    auto [next, ec] = std::from_chars(p, end, part);
    if (ec != std::errc{} || next == p || next - p > 3 || part > 255) return std::nullopt;
    value = (value << 8) | part;
    p = next;
  }
  if (p != end) return std::nullopt;
  return HostKey{value};
}

}  // namespace dhla

namespace dhla {

const char* to_string(Direction d) noexcept {
  switch (d) {
    case Direction::src:
      return "src";
    case Direction::dst:
      return "dst";
    case Direction::both:
      return "both";
  }
  return "?";
}

std::optional<Direction> parse_direction(const std::string& text) {
  if (text == "src") return Direction::src;
  if (text == "dst") return Direction::dst;
  if (text == "both") return Direction::both;
  return std::nullopt;
}

std::vector<Direction> expand(Direction d) {
  if (d == Direction::both) return {Direction::src, Direction::dst};
  return {d};
}

}  // namespace dhla

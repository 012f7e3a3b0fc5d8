#include "dhla/snapshot.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <vector>

#include "dhla/errors.hpp"

namespace dhla {

namespace {

template <typename T>
void put_le(std::vector<char>& buf, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    buf.push_back(static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xff));
  }
}

class Cursor {
 public:
  explicit Cursor(std::istream& in) : in_(in) {}

  template <typename T>
  T get_le(const char* field) {
    std::array<unsigned char, sizeof(T)> bytes{};
    read(bytes.data(), bytes.size(), field);
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= std::uint64_t{bytes[i]} << (8 * i);
    return static_cast<T>(v);
  }

  void read(void* dst, std::size_t n, const char* field) {
    in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
    const auto got = static_cast<std::uint64_t>(in_.gcount());
    if (got != n) {
      throw ParseError(std::string("snapshot truncated while reading ") + field, offset_ + got);
    }
    offset_ += n;
  }

  [[nodiscard]] std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::istream& in_;
  std::uint64_t offset_ = 0;
};

}  // namespace

void write_snapshot(const Dhla& sketch, std::ostream& out) {
  const DhgParams& p = sketch.params();
  std::vector<char> header;
  header.reserve(kSnapshotHeaderBytes);
  header.insert(header.end(), {'D', 'H', 'L', 'A'});
  put_le<std::uint16_t>(header, kSnapshotVersion);
  put_le<std::uint16_t>(header, static_cast<std::uint16_t>(p.r));
  put_le<std::uint32_t>(header, p.g);
  put_le<std::uint16_t>(header, static_cast<std::uint16_t>(p.k));
  put_le<std::uint16_t>(header, static_cast<std::uint16_t>(p.alpha));
  put_le<std::uint16_t>(header, static_cast<std::uint16_t>(p.key_width));
  put_le<std::uint64_t>(header, p.seed_dh0);
  put_le<std::uint64_t>(header, p.seed_h1);
  put_le<std::uint64_t>(header, sketch.window_id());
  out.write(header.data(), static_cast<std::streamsize>(header.size()));

  // Words are emitted byte by byte so the file is the same on any host.
  constexpr std::size_t kChunkWords = 8192;
  std::vector<char> chunk;
  chunk.reserve(kChunkWords * 8);
  const auto words = sketch.words();
  for (std::size_t base = 0; base < words.size(); base += kChunkWords) {
    chunk.clear();
    const std::size_t end = std::min(words.size(), base + kChunkWords);
    for (std::size_t w = base; w < end; ++w) put_le<std::uint64_t>(chunk, words[w]);
    out.write(chunk.data(), static_cast<std::streamsize>(chunk.size()));
  }
  if (!out) throw std::runtime_error("failed writing snapshot");
}

Dhla read_snapshot(std::istream& in) {
  Cursor cur(in);
  std::array<char, 4> magic{};
  cur.read(magic.data(), magic.size(), "magic");
  if (std::memcmp(magic.data(), "DHLA", 4) != 0) throw ParseError("bad snapshot magic", 0);

  const auto version = cur.get_le<std::uint16_t>("version");
  if (version != kSnapshotVersion) {
    throw ParseError("unsupported snapshot version " + std::to_string(version), 4);
  }
  DhgParams p;
  p.r = cur.get_le<std::uint16_t>("r");
  p.g = cur.get_le<std::uint32_t>("g");
  p.k = cur.get_le<std::uint16_t>("k");
  p.alpha = cur.get_le<std::uint16_t>("alpha");
  p.key_width = cur.get_le<std::uint16_t>("key width");
  p.seed_dh0 = cur.get_le<std::uint64_t>("seed_dh0");
  p.seed_h1 = cur.get_le<std::uint64_t>("seed_h1");
  const auto window_id = cur.get_le<std::uint64_t>("window id");
  if (auto bad = p.violation()) throw ParseError("invalid snapshot parameters: " + *bad, 6);

  Dhla sketch(p, window_id);
  auto words = sketch.mutable_words();
  constexpr std::size_t kChunkWords = 8192;
  std::vector<unsigned char> chunk(kChunkWords * 8);
  for (std::size_t base = 0; base < words.size(); base += kChunkWords) {
    const std::size_t n = std::min(words.size() - base, kChunkWords);
    cur.read(chunk.data(), n * 8, "payload");
    for (std::size_t w = 0; w < n; ++w) {
      std::uint64_t v = 0;
      for (std::size_t b = 0; b < 8; ++b) v |= std::uint64_t{chunk[w * 8 + b]} << (8 * b);
      words[base + w] = v;
    }
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw ParseError("trailing bytes after snapshot payload", cur.offset());
  }
  return sketch;
}

void save_snapshot(const Dhla& sketch, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_snapshot(sketch, out);
}

Dhla load_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_snapshot(in);
}

}  // namespace dhla

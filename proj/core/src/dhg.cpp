#include "dhla/dhg.hpp"

#include <bit>
#include <cassert>
#include <sstream>

#include "dhla/errors.hpp"
#include "dhla/estimator.hpp"

namespace dhla {

namespace {

constexpr std::uint64_t low_mask(std::uint32_t bits) noexcept {
  return bits >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << bits) - 1;
}

// Seeds go through the mixer once so nearby seeds give unrelated maps.
constexpr std::uint64_t seed_key(std::uint64_t seed) noexcept {
  return mix64(seed + 0x9e3779b97f4a7c15ULL);
}

}  // namespace

std::optional<std::string> DhgParams::violation() const {
  std::ostringstream os;
  if (r < 3 || r > 64) {
    os << "r must satisfy 3 <= r <= 64 (got r=" << r << ")";
  } else if (g < 64 || g > (1u << 24) || !is_power_of_two(g)) {
    os << "g must be a power of two in [64, 2^24] (got g=" << g << ")";
  } else if (k < 1 || k > 30) {
    os << "k must satisfy 1 <= k <= 30 (got k=" << k << ")";
  } else if (key_width < 1 || key_width > 32) {
    os << "key width W must satisfy 1 <= W <= 32 (got W=" << key_width << ")";
  } else if (alpha < 1) {
    os << "alpha must be >= 1 (got alpha=" << alpha << ")";
  } else if (alpha > k) {
    os << "alpha <= k violated: alpha=" << alpha << " > k=" << k
       << " leaves key bits uncovered between neighbouring blocks";
  } else if (std::uint64_t{r - 2} * alpha + k < key_width) {
    os << "(r-2)*alpha + k >= W violated: (" << r << "-2)*" << alpha << " + " << k << " = "
       << (std::uint64_t{r - 2} * alpha + k) << " < " << key_width
       << ", the last block does not reach the top key bit";
  } else {
    return std::nullopt;
  }
  return os.str();
}

void DhgParams::validate() const {
  if (auto v = violation()) throw ConfigError(*v);
}

std::string DhgParams::describe() const {
  std::ostringstream os;
  os << "r=" << r << " g=" << g << " k=" << k << " alpha=" << alpha << " W=" << key_width
     << " seed_dh0=0x" << std::hex << seed_dh0 << " seed_h1=0x" << seed_h1;
  return os.str();
}

Dhg::Dhg(const DhgParams& params)
    : p_(params),
      dh0_key_(seed_key(params.seed_dh0)),
      h1_key_(seed_key(params.seed_h1)),
      g_log2_(0),
      k_mask_(0) {
  p_.validate();
  g_log2_ = static_cast<std::uint32_t>(std::countr_zero(p_.g));
  k_mask_ = static_cast<std::uint32_t>(low_mask(p_.k));
}

std::uint32_t Dhg::block(std::uint32_t i, HostKey a) const noexcept {
  assert(i >= 1 && i < p_.r);
  const std::uint64_t shift = std::uint64_t{i - 1} * p_.alpha;
  if (shift >= 32) return 0;
  return static_cast<std::uint32_t>((a.value >> shift) & k_mask_);
}

std::uint32_t Dhg::dh(std::uint32_t i, HostKey a) const noexcept {
  assert(i < p_.r);
  const std::uint32_t anchor = dh0(a);
  return i == 0 ? anchor : (block(i, a) ^ anchor);
}

void Dhg::indices(HostKey a, std::span<std::uint32_t> out) const noexcept {
  assert(out.size() == p_.r);
  const std::uint32_t anchor = dh0(a);
  out[0] = anchor;
  for (std::uint32_t i = 1; i < p_.r; ++i) out[i] = block(i, a) ^ anchor;
}

bool Dhg::extend(std::uint64_t& partial, std::uint32_t i, std::uint32_t blk) const noexcept {
  const std::uint32_t w = p_.key_width;
  if (i == 1) {
    partial = blk;
    return p_.k <= w || (std::uint64_t{blk} >> w) == 0;
  }
  const std::uint32_t overlap = p_.k - p_.alpha;
  const std::uint64_t pos = std::uint64_t{i - 1} * p_.alpha;
  const std::uint64_t present = pos < 64 ? (partial >> pos) & low_mask(overlap) : 0;
  if (present != (blk & low_mask(overlap))) return false;

  const std::uint64_t fresh = std::uint64_t{blk} >> overlap;
  const std::uint64_t at = pos + overlap;
  if (at >= w) return fresh == 0;
  if (at + p_.alpha > w && (fresh >> (w - at)) != 0) return false;
  partial |= fresh << at;
  return true;
}

std::optional<std::uint64_t> Dhg::assemble(std::span<const std::uint32_t> tuple) const {
  if (tuple.size() != p_.r) {
    throw ConfigError("index tuple has " + std::to_string(tuple.size()) + " entries, expected r=" +
                      std::to_string(p_.r));
  }
  std::uint64_t partial = 0;
  for (std::uint32_t i = 1; i < p_.r; ++i) {
    if (!extend(partial, i, recover_block(tuple[0], tuple[i]))) return std::nullopt;
  }
  return partial;
}

std::optional<HostKey> Dhg::reconstruct_key(std::span<const std::uint32_t> tuple) const {
  auto bits = assemble(tuple);
  if (!bits) return std::nullopt;
  const HostKey key{static_cast<std::uint32_t>(*bits)};
  if (dh0(key) != tuple[0]) return std::nullopt;
  return key;
}

}  // namespace dhla

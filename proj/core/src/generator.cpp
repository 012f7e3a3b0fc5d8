#include "dhla/generator.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <unordered_set>

#include "dhla/errors.hpp"

namespace dhla {

namespace {

constexpr std::uint64_t kKeySpace = std::uint64_t{1} << 32;

std::vector<std::uint32_t> distinct_keys(std::uint64_t n, std::mt19937_64& rng) {
  std::vector<std::uint32_t> out;
  out.reserve(n);
  while (out.size() < n) {
    const std::size_t missing = n - out.size();
    for (std::size_t i = 0; i < missing; ++i) out.push_back(static_cast<std::uint32_t>(rng()));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
  }
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

}  // namespace

void GeneratorConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError("generator: " + msg); };
  if (background_hosts + super_points > kKeySpace) fail("more hosts than 32-bit addresses");
  if (background_hosts > 0) {
    if (background_max_cardinality < 1) fail("background_max_cardinality must be >= 1");
    if (background_max_cardinality > kKeySpace) fail("background cardinality exceeds 2^32");
    if (!(background_exponent >= 0.0)) fail("background_exponent must be >= 0");
  }
  if (super_points > 0) {
    if (super_min_cardinality < 1) fail("super_min_cardinality must be >= 1");
    if (super_min_cardinality > super_max_cardinality) {
      fail("super_min_cardinality > super_max_cardinality");
    }
    if (super_max_cardinality > kKeySpace) fail("super point cardinality exceeds 2^32");
  }
  if (duplicate_factor < 1) fail("duplicate_factor must be >= 1");
  if (window_seconds < 1) fail("window_seconds must be >= 1");
  if (std::uint64_t{window_start} + window_seconds > kKeySpace) {
    fail("window extends past the 32-bit timestamp range");
  }
}

GeneratedTrace generate_trace(const GeneratorConfig& config, std::uint64_t seed) {
  config.validate();
  std::mt19937_64 rng(seed);
  GeneratedTrace out;

  const std::uint64_t hosts = config.background_hosts + config.super_points;
  const std::vector<std::uint32_t> keys = distinct_keys(hosts, rng);

  std::vector<std::uint64_t> cardinality(hosts);
  if (config.background_hosts > 0) {
    std::vector<double> weights(config.background_max_cardinality);
    for (std::size_t c = 1; c <= weights.size(); ++c) {
      weights[c - 1] = std::pow(static_cast<double>(c), -config.background_exponent);
    }
    std::discrete_distribution<std::uint64_t> bg(weights.begin(), weights.end());
    for (std::uint64_t h = 0; h < config.background_hosts; ++h) cardinality[h] = bg(rng) + 1;
  }
  std::uniform_int_distribution<std::uint64_t> sp(config.super_min_cardinality,
                                                  config.super_max_cardinality);
  for (std::uint64_t h = config.background_hosts; h < hosts; ++h) {
    cardinality[h] = sp(rng);
    out.planted.push_back(HostKey{keys[h]});
  }
  std::sort(out.planted.begin(), out.planted.end());

  std::uint64_t flows = 0;
  for (std::uint64_t c : cardinality) flows += c;
  out.records.reserve(flows * config.duplicate_factor);

  for (std::uint64_t h = 0; h < hosts; ++h) {
    const HostKey src{keys[h]};
    out.truth.counts[src.value] = cardinality[h];
    for (std::uint32_t dst : distinct_keys(cardinality[h], rng)) {
      for (std::uint32_t d = 0; d < config.duplicate_factor; ++d) {
        out.records.push_back({0, src, HostKey{dst}});
      }
    }
  }
  std::shuffle(out.records.begin(), out.records.end(), rng);

  const std::uint64_t n = out.records.size();
  for (std::uint64_t i = 0; i < n; ++i) {
    out.records[i].timestamp =
        config.window_start + static_cast<std::uint32_t>(i * config.window_seconds / n);
  }
  return out;
}

}  // namespace dhla

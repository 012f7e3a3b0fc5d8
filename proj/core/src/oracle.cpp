#include "dhla/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "dhla/errors.hpp"

namespace dhla {

std::vector<HostKey> GroundTruth::super_points(std::uint64_t theta) const {
  std::vector<HostKey> out;
  for (const auto& [host, c] : counts) {
    if (c >= theta) out.push_back(HostKey{host});
  }
  std::sort(out.begin(), out.end());
  return out;
}

GroundTruth exact_oracle(std::span<const TraceRecord> records, Direction d) {
  if (d == Direction::both) throw ConfigError("exact_oracle needs a single direction");
  std::vector<std::uint64_t> pairs;
  pairs.reserve(records.size());
  for (const auto& rec : records) {
    const HostPair hp = orient(rec, d);
    pairs.push_back((std::uint64_t{hp.candidate.value} << 32) | hp.opposite.value);
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

  GroundTruth truth;
  for (std::uint64_t pr : pairs) ++truth.counts[static_cast<std::uint32_t>(pr >> 32)];
  return truth;
}

EvalMetrics evaluate(std::span<const SuperPointReport> reports, const GroundTruth& truth,
                     std::uint64_t theta) {
  EvalMetrics m;
  const std::vector<HostKey> supers = truth.super_points(theta);
  std::set<HostKey> reported;
  for (const auto& rep : reports) reported.insert(rep.host);

  m.n = supers.size();
  m.reported = reported.size();

  double rel_err = 0.0;
  std::size_t hits = 0;
  for (const auto& rep : reports) {
    const std::uint64_t c = truth.count(rep.host);
    if (c >= theta) {
      rel_err += std::abs(rep.estimate - static_cast<double>(c)) / static_cast<double>(c);
      ++hits;
    }
  }
  for (HostKey h : reported) {
    if (truth.count(h) < theta) ++m.false_pos;
  }
  for (HostKey h : supers) {
    if (!reported.contains(h)) ++m.false_neg;
  }
  if (m.n > 0) {
    const double n = static_cast<double>(m.n);
    m.fpr = static_cast<double>(m.false_pos) / n;
    m.fnr = static_cast<double>(m.false_neg) / n;
    m.tfr = *m.fpr + *m.fnr;
  }
  if (hits > 0) m.mean_rel_err = rel_err / static_cast<double>(hits);
  return m;
}

}  // namespace dhla

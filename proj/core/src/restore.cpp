#include "dhla/restore.hpp"

#include <algorithm>
#include <atomic>
#include <string>
#include <thread>

#include "dhla/errors.hpp"

namespace dhla {

namespace {

// Runs body(worker, item) for item in [0, items), worker w taking items
// w, w + n, w + 2n, ... Each worker appends to its own buffer; buffers are
// concatenated in worker order. The shared counter stops everyone once the
// stage is known to overflow.
template <typename T, typename Body>
std::vector<T> striped_stage(std::size_t items, unsigned workers, std::size_t capacity,
                             const std::string& stage, Body body) {
  workers = std::max(1u, workers);
  if (items < workers) workers = static_cast<unsigned>(std::max<std::size_t>(1, items));

  std::vector<std::vector<T>> local(workers);
  std::atomic<std::size_t> produced{0};
  auto run = [&](unsigned w) {
    auto& out = local[w];
    for (std::size_t item = w; item < items; item += workers) {
      const std::size_t before = out.size();
      body(item, out);
      const std::size_t added = out.size() - before;
      if (added != 0 && produced.fetch_add(added, std::memory_order_relaxed) + added > capacity) {
        return;
      }
      if (produced.load(std::memory_order_relaxed) > capacity) return;
    }
  };

  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run, w);
  }

  const std::size_t total = produced.load();
  if (total > capacity) throw CapacityError(stage, total, capacity);

  std::vector<T> merged;
  merged.reserve(total);
  for (auto& part : local) merged.insert(merged.end(), part.begin(), part.end());
  return merged;
}

}  // namespace

std::vector<HostKey> restore_candidates(const Dhla& sketch, const HotSet& hot,
                                        const RestoreOptions& options, RestoreStats* stats) {
  const Dhg& dhg = sketch.hashes();
  const std::uint32_t r = dhg.params().r;
  const auto& he = hot.arrays;
  if (stats) {
    stats->hot_sizes.clear();
    for (const auto& a : he) stats->hot_sizes.push_back(a.size());
    stats->stage_sizes.clear();
  }

  std::vector<HostKey> keys;
  for (const auto& a : he) {
    if (a.empty()) {
      if (stats) stats->candidates = 0;
      return keys;
    }
  }

  // Stage 1: HE(0) x HE(1) x HE(2). Work is striped over (CL0, CL1) pairs;
  // each item walks all of HE(2).
  const std::size_t n1 = he[1].size();
  const std::size_t pairs = he[0].size() * n1;
  std::vector<CandidatePartialIp> read = striped_stage<CandidatePartialIp>(
      pairs, options.workers, options.max_candidates, "stage 1 (arrays 0-2)",
      [&](std::size_t item, std::vector<CandidatePartialIp>& out) {
        const std::uint32_t cl0 = he[0][item / n1];
        std::uint64_t first = 0;
        if (!dhg.extend(first, 1, Dhg::recover_block(cl0, he[1][item % n1]))) return;
        for (std::uint32_t cl2 : he[2]) {
          std::uint64_t bits = first;
          if (dhg.extend(bits, 2, Dhg::recover_block(cl0, cl2))) out.push_back({bits, cl0});
        }
      });
  if (stats) stats->stage_sizes.push_back(read.size());

  // Stages 3..r-1 alternate between two buffers: `read` is consumed while
  // `write` fills, then they swap.
  std::vector<CandidatePartialIp> write;
  for (std::uint32_t i = 3; i < r && !read.empty(); ++i) {
    const auto& hi = he[i];
    write = striped_stage<CandidatePartialIp>(
        read.size(), options.workers, options.max_candidates,
        "stage " + std::to_string(i - 1) + " (array " + std::to_string(i) + ")",
        [&](std::size_t item, std::vector<CandidatePartialIp>& out) {
          const CandidatePartialIp& sub = read[item];
          for (std::uint32_t cli : hi) {
            std::uint64_t bits = sub.bits;
            if (dhg.extend(bits, i, Dhg::recover_block(sub.anchor, cli))) {
              out.push_back({bits, sub.anchor});
            }
          }
        });
    std::swap(read, write);
    write.clear();
    if (stats) stats->stage_sizes.push_back(read.size());
  }

  keys.reserve(read.size());
  for (const auto& full : read) {
    const HostKey key{static_cast<std::uint32_t>(full.bits)};
    if (dhg.dh0(key) == full.anchor) keys.push_back(key);
  }
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  if (stats) stats->candidates = keys.size();
  return keys;
}

std::vector<SuperPointReport> restore_superpoints(const Dhla& sketch, const RestoreOptions& options,
                                                  RestoreStats* stats) {
  RestoreStats local;
  RestoreStats& st = stats ? *stats : local;

  const HotSet hot = hot_sets(sketch, options.theta, options.workers);
  const std::vector<HostKey> keys = restore_candidates(sketch, hot, options, &st);

  st.flow_count = estimate_flow_count(sketch);
  st.psi = bit_set_probability(sketch.params(), st.flow_count.value);

  const double theta = static_cast<double>(options.theta);
  std::vector<SuperPointReport> out;
  for (HostKey key : keys) {
    const Estimate e = corrected_cardinality(sketch, key, st.psi);
    if (e.value >= theta) out.push_back({key, e.value, e.saturated});
  }
  std::sort(out.begin(), out.end(), [](const SuperPointReport& a, const SuperPointReport& b) {
    if (a.estimate != b.estimate) return a.estimate > b.estimate;
    return a.host < b.host;
  });
  return out;
}

}  // namespace dhla

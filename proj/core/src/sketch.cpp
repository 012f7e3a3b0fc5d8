#include "dhla/sketch.hpp"

#include <algorithm>
#include <atomic>
#include <cassert>
#include <cmath>
#include <thread>

#include "dhla/errors.hpp"

namespace dhla {

Dhla::Dhla(const DhgParams& params, std::uint64_t window_id)
    : window_id_(window_id), dhg_(params), words_per_estimator_(params.g / 64) {
  words_.assign(params.total_bits() / 64, 0);
}

void Dhla::update(HostKey candidate, HostKey opposite) noexcept {
  const DhgParams& p = params();
  const std::uint32_t bit = dhg_.h1(opposite);
  const std::uint64_t mask = std::uint64_t{1} << (bit & 63);
  const std::size_t word_in_est = bit >> 6;
  const std::uint32_t anchor = dhg_.dh0(candidate);
  for (std::uint32_t i = 0; i < p.r; ++i) {
    const std::uint32_t idx = i == 0 ? anchor : (dhg_.block(i, candidate) ^ anchor);
    const std::size_t slot = (std::size_t{i} << p.k) + idx;
    std::atomic_ref<std::uint64_t> word(words_[slot * words_per_estimator_ + word_in_est]);
    if ((word.load(std::memory_order_relaxed) & mask) == 0) {
      word.fetch_or(mask, std::memory_order_relaxed);
    }
  }
}

void Dhla::reset() noexcept { std::fill(words_.begin(), words_.end(), 0); }

std::span<const std::uint64_t> Dhla::estimator(std::uint32_t i, std::uint32_t j) const noexcept {
  assert(i < params().r && j < params().estimators_per_array());
  const std::size_t slot = (std::size_t{i} << params().k) + j;
  return std::span<const std::uint64_t>(words_).subspan(slot * words_per_estimator_,
                                                        words_per_estimator_);
}

LinearEstimator Dhla::extract(std::uint32_t i, std::uint32_t j) const {
  return LinearEstimator(params().g, estimator(i, j));
}

std::uint64_t Dhla::array_zero_count(std::uint32_t i) const noexcept {
  const std::size_t per_array = std::size_t{words_per_estimator_} << params().k;
  return dhla::zero_count(std::span<const std::uint64_t>(words_).subspan(i * per_array, per_array));
}

void Dhla::merge_from(const Dhla& other) {
  if (params() != other.params()) {
    throw ConfigError("cannot merge sketches with different parameters: [" +
                      params().describe() + "] vs [" + other.params().describe() + "]");
  }
  for (std::size_t w = 0; w < words_.size(); ++w) words_[w] |= other.words_[w];
}

Dhla merge(const Dhla& a, const Dhla& b) {
  Dhla out = a;
  out.merge_from(b);
  return out;
}

double hot_threshold(std::uint32_t g, std::uint32_t theta) noexcept {
  const double gd = static_cast<double>(g);
  return gd * std::exp(-static_cast<double>(theta) / gd);
}

HotSet hot_sets(const Dhla& sketch, std::uint32_t theta, unsigned workers) {
  const DhgParams& p = sketch.params();
  HotSet hot;
  hot.zmin = hot_threshold(p.g, theta);
  hot.arrays.resize(p.r);

  const std::uint32_t n = p.estimators_per_array();
  auto scan = [&](std::uint32_t i) {
    auto& out = hot.arrays[i];
    for (std::uint32_t j = 0; j < n; ++j) {
      if (static_cast<double>(sketch.zero_count(i, j)) < hot.zmin) out.push_back(j);
    }
  };

  workers = std::max(1u, std::min(workers, p.r));
  if (workers == 1) {
    for (std::uint32_t i = 0; i < p.r; ++i) scan(i);
    return hot;
  }
  std::vector<std::jthread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::uint32_t i = w; i < p.r; i += workers) scan(i);
    });
  }
  return hot;
}

Estimate estimate_flow_count(const Dhla& sketch) {
  const DhgParams& p = sketch.params();
  const std::uint64_t array_bits = std::uint64_t{p.g} << p.k;
  Estimate total;
  for (std::uint32_t i = 0; i < p.r; ++i) {
    const Estimate e = linear_count(sketch.array_zero_count(i), array_bits);
    total.value += e.value;
    total.saturated = total.saturated || e.saturated;
  }
  total.value /= p.r;
  return total;
}

double bit_set_probability(const DhgParams& params, double w) noexcept {
  const double array_bits = static_cast<double>(std::uint64_t{params.g} << params.k);
  return 1.0 - std::exp(-w / array_bits);
}

std::uint64_t shared_zero_count(const Dhla& sketch, HostKey host) {
  const DhgParams& p = sketch.params();
  std::vector<std::uint32_t> idx(p.r);
  sketch.hashes().indices(host, idx);

  std::vector<std::uint64_t> acc(sketch.estimator(0, idx[0]).begin(),
                                 sketch.estimator(0, idx[0]).end());
  for (std::uint32_t i = 1; i < p.r; ++i) {
    auto est = sketch.estimator(i, idx[i]);
    for (std::size_t w = 0; w < acc.size(); ++w) acc[w] &= est[w];
  }
  return dhla::zero_count(acc);
}

Estimate corrected_cardinality(const Dhla& sketch, HostKey host, double psi) {
  const DhgParams& p = sketch.params();
  const double g = static_cast<double>(p.g);
  const double exclusive_bits = g * (1.0 - std::pow(psi, static_cast<double>(p.r)));

  Estimate e;
  std::uint64_t sz = shared_zero_count(sketch, host);
  if (sz == 0) {
    sz = 1;
    e.saturated = true;
  }
  const double szd = static_cast<double>(sz);
  e.value = szd >= exclusive_bits ? 0.0 : -g * std::log(szd / exclusive_bits);
  return e;
}

}  // namespace dhla

#pragma once

#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <thread>
#include <vector>

#include "dhla/restore.hpp"
#include "dhla/sketch.hpp"
#include "dhla/trace.hpp"

namespace dhla {

struct WindowConfig {
  std::uint32_t window_seconds = 300;
  std::uint32_t theta = 1024;
  DhgParams dhg;
  unsigned workers = 1;
  std::size_t batch_capacity = 65536;
  Direction direction = Direction::src;
  std::size_t max_candidates = std::size_t{1} << 20;

  /// Throws ConfigError naming the offending field.
  void validate() const;
  [[nodiscard]] RestoreOptions restore_options() const {
    return {theta, max_candidates, workers};
  }
};

/// Up to `capacity` oriented pairs, handed to the update pool as a unit.
class PairBatch {
 public:
  explicit PairBatch(std::size_t capacity) : capacity_(capacity) { pairs_.reserve(capacity); }

  /// False (and no change) when the batch is already full.
  bool push(HostPair pair) {
    if (pairs_.size() >= capacity_) return false;
    pairs_.push_back(pair);
    return true;
  }

  [[nodiscard]] std::size_t size() const noexcept { return pairs_.size(); }
  [[nodiscard]] std::size_t capacity() const noexcept { return capacity_; }
  [[nodiscard]] bool empty() const noexcept { return pairs_.empty(); }
  [[nodiscard]] bool full() const noexcept { return pairs_.size() >= capacity_; }
  [[nodiscard]] std::span<const HostPair> pairs() const noexcept { return pairs_; }

 private:
  std::size_t capacity_;
  std::vector<HostPair> pairs_;
};

/// Worker pool applying whole batches to one sketch. Batches may arrive from
/// several producers in any order; the sealed sketch only depends on the set
/// of pairs fed.
class UpdatePool {
 public:
  UpdatePool(Dhla& sketch, unsigned workers);
  ~UpdatePool();

  UpdatePool(const UpdatePool&) = delete;
  UpdatePool& operator=(const UpdatePool&) = delete;

  /// Queues a batch, blocking while the queue is full. Throws std::logic_error
  /// once the pool is sealed.
  void feed_batch(PairBatch batch);

  /// Waits for every queued batch to be applied and stops the workers.
  void seal();
  [[nodiscard]] bool sealed() const;

 private:
  void work();

  Dhla& sketch_;
  std::size_t max_queued_;
  mutable std::mutex mu_;
  std::condition_variable has_work_;
  std::condition_variable has_room_;
  std::deque<PairBatch> queue_;
  bool sealed_ = false;
  std::vector<std::jthread> workers_;
};

struct WindowReport {
  std::uint64_t window_id = 0;
  Direction direction = Direction::src;
  std::uint64_t pairs = 0;
  std::vector<SuperPointReport> reports;
  RestoreStats stats;
};

/// Called with each sealed sketch before it is restored and reset.
using SealedHook = std::function<void(const Dhla&, Direction)>;

/// Tumbling-window detector. Records are assigned to window
/// timestamp / window_seconds; a record older than the open window is dropped
/// and counted, a newer one closes the open window first.
class WindowEngine {
 public:
  explicit WindowEngine(WindowConfig config, SealedHook on_sealed = {});
  ~WindowEngine();

  void push(const TraceRecord& rec);
  /// Closes the open window, if any.
  void flush();

  /// Reports of every closed window so far, in close order (moved out).
  [[nodiscard]] std::vector<WindowReport> take_reports();
  [[nodiscard]] std::uint64_t late_records() const noexcept { return late_; }
  [[nodiscard]] const WindowConfig& config() const noexcept { return cfg_; }

 private:
  struct Lane {
    Direction direction;
    Dhla sketch;
    std::optional<PairBatch> batch;
    std::unique_ptr<UpdatePool> pool;
    std::uint64_t pairs = 0;
  };

  void open(std::uint64_t window_id);
  void close();

  WindowConfig cfg_;
  SealedHook on_sealed_;
  std::vector<std::unique_ptr<Lane>> lanes_;
  std::optional<std::uint64_t> current_;
  std::uint64_t late_ = 0;
  std::vector<WindowReport> done_;
};

struct RunResult {
  std::vector<WindowReport> windows;
  std::uint64_t records = 0;
  std::uint64_t late_records = 0;
};

/// Runs every record of `records` through a WindowEngine.
[[nodiscard]] RunResult run_windows(std::span<const TraceRecord> records,
                                    const WindowConfig& config, SealedHook on_sealed = {});

/// Builds one sealed sketch from `pairs` with the given pool shape.
[[nodiscard]] Dhla build_sketch(std::span<const HostPair> pairs, const DhgParams& params,
                                unsigned workers, std::size_t batch_capacity);

}  // namespace dhla

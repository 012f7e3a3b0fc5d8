#include "dhla/engine.hpp"

#include <stdexcept>
#include <string>

#include "dhla/errors.hpp"

namespace dhla {

void WindowConfig::validate() const {
  if (window_seconds < 1) throw ConfigError("window_seconds must be >= 1");
  if (theta < 1) throw ConfigError("theta must be >= 1");
  if (workers < 1) throw ConfigError("workers must be >= 1");
  if (batch_capacity < 1) throw ConfigError("batch capacity must be >= 1");
  if (max_candidates < 1) throw ConfigError("max_candidates must be >= 1");
  dhg.validate();
}

UpdatePool::UpdatePool(Dhla& sketch, unsigned workers)
    : sketch_(sketch), max_queued_(2 * std::size_t{std::max(1u, workers)}) {
  for (unsigned w = 0; w < std::max(1u, workers); ++w) workers_.emplace_back([this] { work(); });
}

UpdatePool::~UpdatePool() { seal(); }

void UpdatePool::feed_batch(PairBatch batch) {
  std::unique_lock lock(mu_);
  has_room_.wait(lock, [&] { return sealed_ || queue_.size() < max_queued_; });
  if (sealed_) throw std::logic_error("feed_batch called on a sealed window");
  queue_.push_back(std::move(batch));
  lock.unlock();
  has_work_.notify_one();
}

void UpdatePool::seal() {
  {
    std::lock_guard lock(mu_);
    if (sealed_ && workers_.empty()) return;
    sealed_ = true;
  }
  has_work_.notify_all();
  workers_.clear();  // joins; workers drain the queue before exiting
}

bool UpdatePool::sealed() const {
  std::lock_guard lock(mu_);
  return sealed_;
}

void UpdatePool::work() {
  for (;;) {
    std::unique_lock lock(mu_);
    has_work_.wait(lock, [&] { return sealed_ || !queue_.empty(); });
    if (queue_.empty()) return;
    PairBatch batch = std::move(queue_.front());
    queue_.pop_front();
    lock.unlock();
    has_room_.notify_one();
    for (const HostPair& p : batch.pairs()) sketch_.update(p.candidate, p.opposite);
  }
}

WindowEngine::WindowEngine(WindowConfig config, SealedHook on_sealed)
    : cfg_(std::move(config)), on_sealed_(std::move(on_sealed)) {
  cfg_.validate();
  for (Direction d : expand(cfg_.direction)) {
    lanes_.push_back(std::make_unique<Lane>(Lane{d, Dhla(cfg_.dhg), std::nullopt, nullptr, 0}));
  }
}

WindowEngine::~WindowEngine() {
  // Pools must stop before their sketches go away; no restore on teardown.
  for (auto& lane : lanes_) lane->pool.reset();
}

void WindowEngine::open(std::uint64_t window_id) {
  current_ = window_id;
  for (auto& lane : lanes_) {
    lane->sketch.reset();
    lane->sketch.set_window_id(window_id);
    lane->batch.emplace(cfg_.batch_capacity);
    lane->pool = std::make_unique<UpdatePool>(lane->sketch, cfg_.workers);
    lane->pairs = 0;
  }
}

void WindowEngine::close() {
  if (!current_) return;
  for (auto& lane : lanes_) {
    if (lane->batch && !lane->batch->empty()) lane->pool->feed_batch(std::move(*lane->batch));
    lane->batch.reset();
    lane->pool->seal();
    lane->pool.reset();
  }
  for (auto& lane : lanes_) {
    if (on_sealed_) on_sealed_(lane->sketch, lane->direction);
    WindowReport rep;
    rep.window_id = *current_;
    rep.direction = lane->direction;
    rep.pairs = lane->pairs;
    rep.reports = restore_superpoints(lane->sketch, cfg_.restore_options(), &rep.stats);
    done_.push_back(std::move(rep));
  }
  current_.reset();
}

void WindowEngine::push(const TraceRecord& rec) {
  const std::uint64_t id = rec.timestamp / cfg_.window_seconds;
  if (current_ && id < *current_) {
    ++late_;
    return;
  }
  if (current_ && id > *current_) close();
  if (!current_) open(id);
  for (auto& lane : lanes_) {
    lane->batch->push(orient(rec, lane->direction));
    ++lane->pairs;
    if (lane->batch->full()) {
      lane->pool->feed_batch(std::move(*lane->batch));
      lane->batch.emplace(cfg_.batch_capacity);
    }
  }
}

void WindowEngine::flush() { close(); }

std::vector<WindowReport> WindowEngine::take_reports() { return std::exchange(done_, {}); }

RunResult run_windows(std::span<const TraceRecord> records, const WindowConfig& config,
                      SealedHook on_sealed) {
  WindowEngine engine(config, std::move(on_sealed));
  for (const auto& rec : records) engine.push(rec);
  engine.flush();
  RunResult out;
  out.windows = engine.take_reports();
  out.records = records.size();
  out.late_records = engine.late_records();
  return out;
}

Dhla build_sketch(std::span<const HostPair> pairs, const DhgParams& params, unsigned workers,
                  std::size_t batch_capacity) {
  if (batch_capacity < 1) throw ConfigError("batch capacity must be >= 1");
  Dhla sketch(params);
  {
    UpdatePool pool(sketch, workers);
    for (std::size_t base = 0; base < pairs.size(); base += batch_capacity) {
      PairBatch batch(batch_capacity);
      const std::size_t end = std::min(pairs.size(), base + batch_capacity);
      for (std::size_t i = base; i < end; ++i) batch.push(pairs[i]);
      pool.feed_batch(std::move(batch));
    }
    pool.seal();
  }
  return sketch;
}

}  // namespace dhla

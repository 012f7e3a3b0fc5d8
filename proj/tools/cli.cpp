#include "cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "dhla/engine.hpp"
#include "dhla/errors.hpp"
#include "dhla/generator.hpp"
#include "dhla/oracle.hpp"
#include "dhla/restore.hpp"
#include "dhla/snapshot.hpp"
#include "dhla/trace.hpp"

namespace dhla::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// Flags shared by every subcommand. They live on the top-level app so a
// config file can set them with plain `key = value` lines.
struct CommonOptions {
  DhgParams dhg;
  std::uint32_t theta = 1024;
  std::uint32_t window_secs = 300;
  unsigned workers = 1;
  std::size_t batch = 65536;
  std::string direction = "src";
  std::string format = "json";
  std::size_t max_candidates = std::size_t{1} << 20;
};

WindowConfig window_config(const CommonOptions& o) {
  WindowConfig cfg;
  cfg.dhg = o.dhg;
  cfg.theta = o.theta;
  cfg.window_seconds = o.window_secs;
  cfg.workers = o.workers;
  cfg.batch_capacity = o.batch;
  cfg.max_candidates = o.max_candidates;
  auto dir = parse_direction(o.direction);
  if (!dir) throw ConfigError("unknown direction '" + o.direction + "'");
  cfg.direction = *dir;
  cfg.validate();
  return cfg;
}

// Writes to `path`, or to `fallback` when the path is empty or "-".
class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) {
    if (path.empty() || path == "-") {
      stream_ = &fallback;
    } else {
      file_.open(path, std::ios::trunc);
      if (!file_) throw std::runtime_error("cannot open " + path + " for writing");
      stream_ = &file_;
    }
  }
  std::ostream& operator*() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

json params_json(const DhgParams& p) {
  return {{"r", p.r},         {"g", p.g},
          {"k", p.k},         {"alpha", p.alpha},
          {"key_width", p.key_width}, {"seed_dh0", p.seed_dh0},
          {"seed_h1", p.seed_h1}};
}

json window_json(const WindowReport& w) {
  json sps = json::array();
  for (const auto& sp : w.reports) {
    sps.push_back({{"host", to_dotted_quad(sp.host)},
                   {"estimate", sp.estimate},
                   {"saturated", sp.saturated}});
  }
  return {{"window_id", w.window_id},
          {"direction", to_string(w.direction)},
          {"pairs", w.pairs},
          {"flow_estimate", w.stats.flow_count.value},
          {"psi", w.stats.psi},
          {"hot_sizes", w.stats.hot_sizes},
          {"stage_sizes", w.stats.stage_sizes},
          {"candidates", w.stats.candidates},
          {"super_points", sps}};
}

void write_reports(std::ostream& os, const std::string& format, const WindowConfig& cfg,
                   const std::vector<WindowReport>& windows, std::uint64_t late) {
  if (format == "csv") {
    os << "window_id,direction,host,estimate,saturated\n";
    for (const auto& w : windows) {
      for (const auto& sp : w.reports) {
        os << w.window_id << ',' << to_string(w.direction) << ',' << to_dotted_quad(sp.host)
           << ',' << std::fixed << std::setprecision(3) << sp.estimate << ','
           << (sp.saturated ? "true" : "false") << '\n';
      }
    }
    return;
  }
  json doc = {{"params", params_json(cfg.dhg)},
              {"theta", cfg.theta},
              {"window_seconds", cfg.window_seconds},
              {"late_records", late},
              {"windows", json::array()}};
  for (const auto& w : windows) doc["windows"].push_back(window_json(w));
  os << doc.dump(2) << '\n';
}

void check_format(const std::string& format) {
  if (format != "json" && format != "csv") {
    throw ConfigError("unknown format '" + format + "' (expected json or csv)");
  }
}

// Same window assignment and late-drop rule as WindowEngine.
std::vector<std::pair<std::uint64_t, std::vector<TraceRecord>>> split_windows(
    const std::vector<TraceRecord>& records, std::uint32_t window_secs) {
  std::vector<std::pair<std::uint64_t, std::vector<TraceRecord>>> out;
  for (const auto& rec : records) {
    const std::uint64_t id = rec.timestamp / window_secs;
    if (!out.empty() && id < out.back().first) continue;
    if (out.empty() || id > out.back().first) out.emplace_back(id, std::vector<TraceRecord>{});
    out.back().second.push_back(rec);
  }
  return out;
}

json truth_json(const GroundTruth& truth) {
  std::map<std::uint32_t, std::uint64_t> sorted(truth.counts.begin(), truth.counts.end());
  json hosts = json::object();
  for (const auto& [h, c] : sorted) hosts[to_dotted_quad(HostKey{h})] = c;
  return hosts;
}

// window_id -> truth, from a generator sidecar.
std::map<std::uint64_t, GroundTruth> load_truth(const std::string& path, Direction expected) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open truth sidecar " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("truth sidecar is not valid JSON: ") + e.what(), e.byte);
  }
  try {
    const std::string dir = doc.at("direction").get<std::string>();
    if (dir != to_string(expected)) {
      throw ConfigError("truth sidecar was produced for direction '" + dir +
                        "' but evaluation uses '" + to_string(expected) + "'");
    }
    std::map<std::uint64_t, GroundTruth> out;
    for (const auto& w : doc.at("windows")) {
      GroundTruth t;
      for (const auto& [host, count] : w.at("hosts").items()) {
        auto key = parse_dotted_quad(host);
        if (!key) throw ParseError("bad host '" + host + "' in truth sidecar", 0);
        t.counts[key->value] = count.get<std::uint64_t>();
      }
      out[w.at("window_id").get<std::uint64_t>()] = std::move(t);
    }
    return out;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed truth sidecar: ") + e.what(), 0);
  }
}

std::string rate_csv(const std::optional<double>& v) {
  if (!v) return "undefined";
  std::ostringstream os;
  os << std::setprecision(6) << *v;
  return os.str();
}

json rate_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

// ---------------------------------------------------------------------------

struct GenerateOptions {
  GeneratorConfig gen;
  std::uint64_t seed = 1;
  std::uint32_t windows = 1;
  std::string output;
  std::string truth;
};

int cmd_generate(const GenerateOptions& o, const CommonOptions& common, std::ostream& out) {
  if (o.windows < 1) throw ConfigError("--windows must be >= 1");
  if (common.window_secs < 1) throw ConfigError("--window-secs must be >= 1");
  if (o.gen.window_start % common.window_secs != 0) {
    throw ConfigError("--start must be a multiple of --window-secs");
  }
  std::vector<TraceRecord> all;
  json sidecar = {{"direction", "src"},
                  {"window_seconds", common.window_secs},
                  {"seed", o.seed},
                  {"windows", json::array()}};
  for (std::uint32_t w = 0; w < o.windows; ++w) {
    GeneratorConfig cfg = o.gen;
    cfg.window_seconds = common.window_secs;
    const std::uint64_t start = std::uint64_t{o.gen.window_start} + std::uint64_t{w} * common.window_secs;
    if (start + common.window_secs > (std::uint64_t{1} << 32)) {
      throw ConfigError("windows extend past the 32-bit timestamp range");
    }
    cfg.window_start = static_cast<std::uint32_t>(start);
    GeneratedTrace g = generate_trace(cfg, o.seed + w);
    json planted = json::array();
    for (HostKey h : g.planted) planted.push_back(to_dotted_quad(h));
    sidecar["windows"].push_back({{"window_id", start / common.window_secs},
                                  {"records", g.records.size()},
                                  {"planted", planted},
                                  {"hosts", truth_json(g.truth)}});
    all.insert(all.end(), g.records.begin(), g.records.end());
  }
  save_trace(o.output, all);
  const std::string truth_path = o.truth.empty() ? o.output + ".truth.json" : o.truth;
  std::ofstream tf(truth_path, std::ios::trunc);
  if (!tf) throw std::runtime_error("cannot open " + truth_path + " for writing");
  tf << sidecar.dump() << '\n';
  out << "wrote " << all.size() << " records to " << o.output << ", truth to " << truth_path
      << '\n';
  return kOk;
}

struct DetectOptions {
  std::string input;
  std::string output;
  std::string snapshot_dir;
};

int cmd_detect(const DetectOptions& o, const CommonOptions& common, std::ostream& out,
               std::ostream& err) {
  const WindowConfig cfg = window_config(common);
  check_format(common.format);
  const std::vector<TraceRecord> records = load_trace(o.input);

  SealedHook hook;
  if (!o.snapshot_dir.empty()) {
    fs::create_directories(o.snapshot_dir);
    hook = [&](const Dhla& sketch, Direction d) {
      save_snapshot(sketch, fs::path(o.snapshot_dir) / ("window-" +
                                                         std::to_string(sketch.window_id()) +
                                                         "-" + to_string(d) + ".dhla"));
    };
  }
  const RunResult res = run_windows(records, cfg, hook);
  if (res.late_records > 0) {
    err << "dropped " << res.late_records << " records older than their window\n";
  }
  Output os(o.output, out);
  write_reports(*os, common.format, cfg, res.windows, res.late_records);
  return kOk;
}

struct MergeOptions {
  std::vector<std::string> inputs;
  std::string output;
  bool detect = false;
  std::string report;
};

int cmd_merge(const MergeOptions& o, const CommonOptions& common, std::ostream& out) {
  check_format(common.format);
  if (o.inputs.empty()) throw ConfigError("merge needs at least one snapshot");
  Dhla merged = load_snapshot(o.inputs.front());
  for (std::size_t i = 1; i < o.inputs.size(); ++i) {
    const Dhla next = load_snapshot(o.inputs[i]);
    if (next.params() != merged.params()) {
      throw ConfigError("parameter mismatch: " + o.inputs.front() + " has [" +
                        merged.params().describe() + "] but " + o.inputs[i] + " has [" +
                        next.params().describe() + "]");
    }
    merged.merge_from(next);
  }
  if (!o.output.empty()) save_snapshot(merged, o.output);
  if (o.detect) {
    WindowConfig cfg = window_config(common);
    cfg.dhg = merged.params();
    WindowReport w;
    w.window_id = merged.window_id();
    w.reports = restore_superpoints(merged, cfg.restore_options(), &w.stats);
    Output os(o.report, out);
    write_reports(*os, common.format, cfg, {w}, 0);
  }
  return kOk;
}

struct EvaluateOptions {
  std::string input;
  std::string truth;
  std::string output;
};

int cmd_evaluate(const EvaluateOptions& o, const CommonOptions& common, std::ostream& out) {
  const WindowConfig cfg = window_config(common);
  check_format(common.format);
  const std::vector<TraceRecord> records = load_trace(o.input);
  const RunResult res = run_windows(records, cfg);

  std::map<std::uint64_t, GroundTruth> sidecar;
  std::map<std::uint64_t, std::vector<TraceRecord>> slices;
  if (!o.truth.empty()) {
    if (cfg.direction == Direction::both) {
      throw ConfigError("a truth sidecar covers one direction; use --direction src");
    }
    sidecar = load_truth(o.truth, cfg.direction);
  } else {
    for (auto& [id, recs] : split_windows(records, cfg.window_seconds)) slices[id] = std::move(recs);
  }

  std::vector<std::pair<Direction, EvalMetrics>> rows;
  for (const auto& w : res.windows) {
    GroundTruth truth;
    if (!o.truth.empty()) {
      auto it = sidecar.find(w.window_id);
      if (it != sidecar.end()) truth = it->second;
    } else {
      truth = exact_oracle(slices[w.window_id], w.direction);
    }
    EvalMetrics m = evaluate(w.reports, truth, cfg.theta);
    m.window_id = w.window_id;
    rows.emplace_back(w.direction, m);
  }

  Output os(o.output, out);
  if (common.format == "csv") {
    *os << "window_id,N,N',N+,N-,fpr,fnr,tfr,mean_rel_err,direction\n";
    for (const auto& [d, m] : rows) {
      *os << m.window_id << ',' << m.n << ',' << m.reported << ',' << m.false_pos << ','
          << m.false_neg << ',' << rate_csv(m.fpr) << ',' << rate_csv(m.fnr) << ','
          << rate_csv(m.tfr) << ',' << rate_csv(m.mean_rel_err) << ',' << to_string(d) << '\n';
    }
  } else {
    json arr = json::array();
    for (const auto& [d, m] : rows) {
      arr.push_back({{"window_id", m.window_id},
                     {"N", m.n},
                     {"N'", m.reported},
                     {"N+", m.false_pos},
                     {"N-", m.false_neg},
                     {"fpr", rate_json(m.fpr)},
                     {"fnr", rate_json(m.fnr)},
                     {"tfr", rate_json(m.tfr)},
                     {"mean_rel_err", rate_json(m.mean_rel_err)},
                     {"direction", to_string(d)}});
    }
    *os << arr.dump(2) << '\n';
  }
  return kOk;
}

struct BenchOptions {
  std::string input;
  GeneratorConfig gen;
  std::uint64_t seed = 1;
  std::vector<unsigned> worker_counts;
};

int cmd_bench(const BenchOptions& o, const CommonOptions& common, std::ostream& out,
              std::ostream& err) {
  const WindowConfig cfg = window_config(common);
  std::vector<TraceRecord> records;
  if (!o.input.empty()) {
    records = load_trace(o.input);
  } else {
    GeneratorConfig g = o.gen;
    g.window_seconds = cfg.window_seconds;
    records = generate_trace(g, o.seed).records;
  }
  const Direction dir = cfg.direction == Direction::both ? Direction::src : cfg.direction;
  std::vector<HostPair> pairs;
  pairs.reserve(records.size());
  for (const auto& rec : records) pairs.push_back(orient(rec, dir));

  std::vector<unsigned> counts = o.worker_counts;
  if (counts.empty()) {
    counts.push_back(1);
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (hw > 1) counts.push_back(hw);
  }

  using clock = std::chrono::steady_clock;
  std::optional<Dhla> reference;
  std::optional<std::vector<SuperPointReport>> reference_reports;
  bool identical = true;
  json rows = json::array();
  const std::size_t memory = Dhla(cfg.dhg).payload_bytes();
  for (unsigned workers : counts) {
    if (workers < 1) throw ConfigError("worker counts must be >= 1");
    const auto t0 = clock::now();
    Dhla sketch = build_sketch(pairs, cfg.dhg, workers, cfg.batch_capacity);
    const auto t1 = clock::now();
    RestoreOptions ro = cfg.restore_options();
    ro.workers = workers;
    const auto reports = restore_superpoints(sketch, ro);
    const auto t2 = clock::now();

    const double update_s = std::chrono::duration<double>(t1 - t0).count();
    const double restore_s = std::chrono::duration<double>(t2 - t1).count();
    const double pps = update_s > 0 ? static_cast<double>(pairs.size()) / update_s : 0.0;
    if (!reference) {
      reference = std::move(sketch);
      reference_reports = reports;
    } else {
      const bool same_reports =
          reports.size() == reference_reports->size() &&
          std::equal(reports.begin(), reports.end(), reference_reports->begin(),
                     [](const SuperPointReport& a, const SuperPointReport& b) {
                       return a.host == b.host && a.estimate == b.estimate &&
                              a.saturated == b.saturated;
                     });
      identical = identical && sketch.same_bits(*reference) && same_reports;
    }
    rows.push_back({{"workers", workers},
                    {"pairs", pairs.size()},
                    {"update_seconds", update_s},
                    {"pairs_per_second", pps},
                    {"restore_seconds", restore_s},
                    {"reports", reports.size()}});
  }

  if (common.format == "json") {
    out << json{{"memory_bytes", memory},
                {"params", params_json(cfg.dhg)},
                {"runs", rows},
                {"identical_sketches", identical}}
               .dump(2)
        << '\n';
  } else {
    out << "memory_bytes=" << memory << '\n';
    for (const auto& row : rows) {
      out << "workers=" << row["workers"] << " pairs=" << row["pairs"]
          << " update_seconds=" << row["update_seconds"]
          << " pairs_per_second=" << row["pairs_per_second"]
          << " restore_seconds=" << row["restore_seconds"] << " reports=" << row["reports"]
          << '\n';
    }
    out << "identical_sketches=" << (identical ? "yes" : "no") << '\n';
  }
  if (!identical) {
    err << "sketches or reports differ across worker counts\n";
    return 1;
  }
  return kOk;
}

void add_generator_flags(CLI::App* cmd, GeneratorConfig& gen, std::uint64_t& seed) {
  cmd->add_option("--seed", seed, "RNG seed");
  cmd->add_option("--background-hosts", gen.background_hosts, "Background host count");
  cmd->add_option("--background-max", gen.background_max_cardinality,
                  "Largest background cardinality");
  cmd->add_option("--background-exponent", gen.background_exponent,
                  "Power-law exponent of background cardinalities");
  cmd->add_option("--supers", gen.super_points, "Planted super points");
  cmd->add_option("--super-min", gen.super_min_cardinality, "Smallest planted cardinality");
  cmd->add_option("--super-max", gen.super_max_cardinality, "Largest planted cardinality");
  cmd->add_option("--duplicate-factor", gen.duplicate_factor, "Copies of every flow");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Super point detection over IP-pair traces", "dhla"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML/INI file with flag values; flags on the command line win");

  CommonOptions common;
  app.add_option("--g", common.dhg.g, "Bits per estimator");
  app.add_option("--r", common.dhg.r, "Estimator arrays");
  app.add_option("--alpha", common.dhg.alpha, "Block stride in key bits");
  app.add_option("--k", common.dhg.k, "log2 of estimators per array");
  app.add_option("--theta", common.theta, "Super point threshold");
  app.add_option("--window-secs", common.window_secs, "Tumbling window length in seconds");
  app.add_option("--workers", common.workers, "Worker threads");
  app.add_option("--batch", common.batch, "Pairs per batch handed to the update pool");
  app.add_option("--seed-dh0", common.dhg.seed_dh0, "Seed of the anchor hash");
  app.add_option("--seed-h1", common.dhg.seed_h1, "Seed of the opposite-host hash");
  app.add_option("--direction", common.direction, "Candidate side: src, dst or both");
  app.add_option("--format", common.format, "Output format: json or csv");
  app.add_option("--max-candidates", common.max_candidates,
                 "Partials allowed per restore stage before aborting");

  GenerateOptions gen_opts;
  auto* gen = app.add_subcommand("generate", "Write a synthetic trace and its truth sidecar");
  gen->fallthrough();
  gen->add_option("--output,-o", gen_opts.output, "Trace file")->required();
  gen->add_option("--truth", gen_opts.truth, "Truth sidecar (default <output>.truth.json)");
  gen->add_option("--windows", gen_opts.windows, "Consecutive windows to generate");
  gen->add_option("--start", gen_opts.gen.window_start, "Timestamp of the first window");
  add_generator_flags(gen, gen_opts.gen, gen_opts.seed);

  DetectOptions det_opts;
  auto* det = app.add_subcommand("detect", "Detect super points per window");
  det->fallthrough();
  det->add_option("--input,-i", det_opts.input, "IPPR trace")->required();
  det->add_option("--output,-o", det_opts.output, "Report file (default stdout)");
  det->add_option("--snapshot-dir", det_opts.snapshot_dir, "Write each sealed sketch here");

  MergeOptions merge_opts;
  auto* mrg = app.add_subcommand("merge", "OR-merge sketch snapshots");
  mrg->fallthrough();
  mrg->add_option("inputs", merge_opts.inputs, "Snapshot files")->required();
  mrg->add_option("--output,-o", merge_opts.output, "Merged snapshot");
  mrg->add_flag("--detect", merge_opts.detect, "Restore super points from the merged sketch");
  mrg->add_option("--report", merge_opts.report, "Report file for --detect (default stdout)");

  EvaluateOptions eval_opts;
  auto* evl = app.add_subcommand("evaluate", "Score detection against exact counts");
  evl->fallthrough();
  evl->add_option("--input,-i", eval_opts.input, "IPPR trace")->required();
  evl->add_option("--truth", eval_opts.truth, "Truth sidecar (default: exact oracle)");
  evl->add_option("--output,-o", eval_opts.output, "Metrics file (default stdout)");

  BenchOptions bench_opts;
  bench_opts.gen.background_hosts = 100000;
  bench_opts.gen.super_points = 20;
  auto* bch = app.add_subcommand("bench", "Measure update throughput and restore time");
  bch->fallthrough();
  bch->add_option("--input,-i", bench_opts.input, "IPPR trace (default: generated load)");
  bch->add_option("--worker-counts", bench_opts.worker_counts, "Worker counts to compare")
      ->delimiter(',');
  add_generator_flags(bch, bench_opts.gen, bench_opts.seed);

  std::vector<std::string> argv_store{"dhla"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*gen) return cmd_generate(gen_opts, common, out);
    if (*det) return cmd_detect(det_opts, common, out, err);
    if (*mrg) return cmd_merge(merge_opts, common, out);
    if (*evl) return cmd_evaluate(eval_opts, common, out);
    if (*bch) return cmd_bench(bench_opts, common, out, err);
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kUsage;
  } catch (const CapacityError& e) {
    err << "restore aborted: " << e.what() << '\n';
    return kCapacity;
  } catch (const ParseError& e) {
    err << "data error: " << e.what() << '\n';
    return kData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kData;
  }
  return kUsage;
}

}  // namespace dhla::cli

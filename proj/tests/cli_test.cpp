#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include "cli.hpp"
#include "json.hpp"

#include "dhla/oracle.hpp"
#include "dhla/snapshot.hpp"
#include "dhla/trace.hpp"
#include "test_support.hpp"

namespace dhla {
namespace {

using nlohmann::json;
using testing::TempDir;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// Small, fast traffic: a few thousand background hosts plus planted supers.
std::vector<std::string> gen_args(const std::filesystem::path& out, int supers = 3) {
  return {"generate", "-o", out.string(), "--seed", "11", "--background-hosts", "5000",
          "--supers", std::to_string(supers), "--super-min", "2048", "--super-max", "4096"};
}

TEST(Cli, NoSubcommandIsUsageError) {
  EXPECT_EQ(run({}).code, cli::kUsage);
  EXPECT_EQ(run({"frobnicate"}).code, cli::kUsage);
  EXPECT_EQ(run({"--help"}).code, cli::kOk);
}

TEST(Cli, EmptyTraceDetectsNothing) {
  TempDir dir;
  save_trace(dir / "empty.ippr", {});
  const Result r = run({"detect", "-i", (dir / "empty.ippr").string()});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  const json doc = json::parse(r.out);
  EXPECT_TRUE(doc["windows"].empty());
  EXPECT_EQ(doc["params"]["g"], 1024);
  EXPECT_EQ(doc["params"]["r"], 5);
  EXPECT_EQ(doc["params"]["alpha"], 6);
  EXPECT_EQ(doc["params"]["k"], 14);
  EXPECT_EQ(doc["params"]["key_width"], 32);
  EXPECT_EQ(doc["theta"], 1024);
  EXPECT_EQ(doc["window_seconds"], 300);
}

TEST(Cli, GenerateIsDeterministicAndConsistent) {
  TempDir dir;
  ASSERT_EQ(run(gen_args(dir / "a.ippr")).code, cli::kOk);
  ASSERT_EQ(run(gen_args(dir / "b.ippr")).code, cli::kOk);
  const std::string a = slurp(dir / "a.ippr");
  EXPECT_EQ(a, slurp(dir / "b.ippr"));

  const auto records = load_trace(dir / "a.ippr");
  EXPECT_EQ(a.size(), kTraceHeaderBytes + records.size() * kTraceRecordBytes);

  const json truth = json::parse(slurp(dir / "a.ippr.truth.json"));
  ASSERT_EQ(truth["windows"].size(), 1u);
  const auto& w = truth["windows"][0];
  EXPECT_EQ(w["records"], records.size());
  EXPECT_EQ(w["planted"].size(), 3u);
  const GroundTruth exact = exact_oracle(records, Direction::src);
  EXPECT_EQ(w["hosts"].size(), exact.counts.size());
  for (const auto& [host, count] : w["hosts"].items()) {
    ASSERT_EQ(count.get<std::uint64_t>(), exact.count(*parse_dotted_quad(host))) << host;
  }
}

TEST(Cli, MultiWindowGenerate) {
  TempDir dir;
  auto args = gen_args(dir / "t.ippr", 1);
  args.insert(args.end(), {"--windows", "3", "--start", "600"});
  ASSERT_EQ(run(args).code, cli::kOk);
  const json truth = json::parse(slurp(dir / "t.ippr.truth.json"));
  ASSERT_EQ(truth["windows"].size(), 3u);
  EXPECT_EQ(truth["windows"][0]["window_id"], 2);
  EXPECT_EQ(truth["windows"][2]["window_id"], 4);

  const Result r = run({"detect", "-i", (dir / "t.ippr").string()});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  const json doc = json::parse(r.out);
  ASSERT_EQ(doc["windows"].size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(doc["windows"][i]["window_id"], truth["windows"][i]["window_id"]);
    ASSERT_EQ(doc["windows"][i]["super_points"].size(), 1u);
    EXPECT_EQ(doc["windows"][i]["super_points"][0]["host"], truth["windows"][i]["planted"][0]);
  }
  EXPECT_EQ(run({"generate", "-o", (dir / "x").string(), "--start", "7"}).code, cli::kUsage);
}

TEST(Cli, DetectFindsPlantedHosts) {
  TempDir dir;
  ASSERT_EQ(run(gen_args(dir / "t.ippr")).code, cli::kOk);
  const json truth = json::parse(slurp(dir / "t.ippr.truth.json"));
  const Result r = run({"detect", "-i", (dir / "t.ippr").string()});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  const json doc = json::parse(r.out);
  std::set<std::string> found;
  for (const auto& sp : doc["windows"][0]["super_points"]) found.insert(sp["host"]);
  std::set<std::string> planted;
  for (const auto& h : truth["windows"][0]["planted"]) planted.insert(h);
  EXPECT_EQ(found, planted);

  const Result csv = run({"--format", "csv", "detect", "-i", (dir / "t.ippr").string()});
  ASSERT_EQ(csv.code, cli::kOk);
  EXPECT_EQ(csv.out.substr(0, csv.out.find('\n')), "window_id,direction,host,estimate,saturated");
  EXPECT_EQ(std::count(csv.out.begin(), csv.out.end(), '\n'), 4);
}

TEST(Cli, BothDirectionsReportTwoLanes) {
  TempDir dir;
  ASSERT_EQ(run(gen_args(dir / "t.ippr")).code, cli::kOk);
  const Result r = run({"--direction", "both", "detect", "-i", (dir / "t.ippr").string()});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  const json doc = json::parse(r.out);
  ASSERT_EQ(doc["windows"].size(), 2u);
  EXPECT_EQ(doc["windows"][0]["direction"], "src");
  EXPECT_EQ(doc["windows"][1]["direction"], "dst");
  EXPECT_EQ(doc["windows"][0]["super_points"].size(), 3u);
  EXPECT_TRUE(doc["windows"][1]["super_points"].empty());
}

TEST(Cli, MergeIsCommutativeAndMatchesWholeTrace) {
  TempDir dir;
  ASSERT_EQ(run(gen_args(dir / "t.ippr")).code, cli::kOk);
  const auto records = load_trace(dir / "t.ippr");
  std::vector<TraceRecord> a, b;
  for (std::size_t i = 0; i < records.size(); ++i) (i % 3 ? a : b).push_back(records[i]);
  save_trace(dir / "a.ippr", a);
  save_trace(dir / "b.ippr", b);
  for (const char* part : {"a", "b", "t"}) {
    const auto sd = (dir / part).string();
    ASSERT_EQ(run({"detect", "-i", (dir / (std::string(part) + ".ippr")).string(),
                   "--snapshot-dir", sd, "-o", (dir / "ignored.json").string()})
                  .code,
              cli::kOk);
  }
  const auto snap = [&](const char* part) { return (dir / part / "window-0-src.dhla").string(); };

  ASSERT_EQ(run({"merge", snap("a"), "-o", (dir / "solo.dhla").string()}).code, cli::kOk);
  EXPECT_EQ(slurp(dir / "solo.dhla"), slurp(snap("a")));

  ASSERT_EQ(run({"merge", snap("a"), snap("b"), "-o", (dir / "ab.dhla").string()}).code, cli::kOk);
  ASSERT_EQ(run({"merge", snap("b"), snap("a"), "-o", (dir / "ba.dhla").string()}).code, cli::kOk);
  EXPECT_EQ(slurp(dir / "ab.dhla"), slurp(dir / "ba.dhla"));
  EXPECT_EQ(slurp(dir / "ab.dhla"), slurp(snap("t")));

  const Result merged = run({"merge", snap("a"), snap("b"), "--detect"});
  ASSERT_EQ(merged.code, cli::kOk) << merged.err;
  const Result whole = run({"detect", "-i", (dir / "t.ippr").string()});
  EXPECT_EQ(json::parse(merged.out)["windows"][0]["super_points"],
            json::parse(whole.out)["windows"][0]["super_points"]);
}

TEST(Cli, MergeRejectsMismatchedParameters) {
  TempDir dir;
  ASSERT_EQ(run(gen_args(dir / "t.ippr", 1)).code, cli::kOk);
  ASSERT_EQ(run({"detect", "-i", (dir / "t.ippr").string(), "--snapshot-dir", (dir / "a").string()})
                .code,
            cli::kOk);
  ASSERT_EQ(run({"--g", "256", "detect", "-i", (dir / "t.ippr").string(), "--snapshot-dir",
                 (dir / "b").string()})
                .code,
            cli::kOk);
  const Result r = run({"merge", (dir / "a" / "window-0-src.dhla").string(),
                        (dir / "b" / "window-0-src.dhla").string()});
  EXPECT_EQ(r.code, cli::kUsage);
  EXPECT_NE(r.err.find("g=1024"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("g=256"), std::string::npos) << r.err;
}

TEST(Cli, MalformedInputsAreDataErrors) {
  TempDir dir;
  ASSERT_EQ(run(gen_args(dir / "t.ippr", 1)).code, cli::kOk);
  const std::string bytes = slurp(dir / "t.ippr");
  {
    std::ofstream f(dir / "cut.ippr", std::ios::binary);
    f << bytes.substr(0, bytes.size() - 3);
  }
  {
    std::ofstream f(dir / "junk.dhla", std::ios::binary);
    f << "not a snapshot";
  }
  EXPECT_EQ(run({"detect", "-i", (dir / "cut.ippr").string()}).code, cli::kData);
  EXPECT_EQ(run({"detect", "-i", (dir / "missing.ippr").string()}).code, cli::kData);
  EXPECT_EQ(run({"merge", (dir / "junk.dhla").string()}).code, cli::kData);
}

TEST(Cli, InvalidParametersNameTheConstraint) {
  TempDir dir;
  save_trace(dir / "e.ippr", {});
  const Result r = run({"--alpha", "9", "--k", "8", "detect", "-i", (dir / "e.ippr").string()});
  EXPECT_EQ(r.code, cli::kUsage);
  EXPECT_NE(r.err.find("alpha <= k"), std::string::npos) << r.err;

  const Result w = run({"--r", "3", "--alpha", "4", "--k", "8", "detect", "-i",
                        (dir / "e.ippr").string()});
  EXPECT_EQ(w.code, cli::kUsage);
  EXPECT_NE(w.err.find("(r-2)*alpha + k >= W"), std::string::npos) << w.err;

  EXPECT_EQ(run({"--g", "1000", "detect", "-i", (dir / "e.ippr").string()}).code, cli::kUsage);
  EXPECT_EQ(run({"--format", "xml", "detect", "-i", (dir / "e.ippr").string()}).code, cli::kUsage);
  EXPECT_EQ(run({"--direction", "up", "detect", "-i", (dir / "e.ippr").string()}).code,
            cli::kUsage);
}

TEST(Cli, CandidateOverflowNamesTheStage) {
  TempDir dir;
  ASSERT_EQ(run(gen_args(dir / "t.ippr")).code, cli::kOk);
  const Result r = run({"--max-candidates", "1", "detect", "-i", (dir / "t.ippr").string()});
  EXPECT_EQ(r.code, cli::kCapacity);
  EXPECT_NE(r.err.find("stage 1"), std::string::npos) << r.err;
}

TEST(Cli, EvaluateAgainstSidecarAndOracle) {
  TempDir dir;
  ASSERT_EQ(run(gen_args(dir / "t.ippr")).code, cli::kOk);
  const Result s = run({"evaluate", "-i", (dir / "t.ippr").string(), "--truth",
                        (dir / "t.ippr.truth.json").string()});
  ASSERT_EQ(s.code, cli::kOk) << s.err;
  const Result o = run({"evaluate", "-i", (dir / "t.ippr").string()});
  ASSERT_EQ(o.code, cli::kOk) << o.err;
  EXPECT_EQ(s.out, o.out);
  const json m = json::parse(o.out)[0];
  EXPECT_EQ(m["N"], 3);
  EXPECT_EQ(m["fnr"], 0.0);
  EXPECT_EQ(m["fpr"], 0.0);

  const Result csv = run({"--format", "csv", "evaluate", "-i", (dir / "t.ippr").string()});
  ASSERT_EQ(csv.code, cli::kOk);
  EXPECT_EQ(csv.out.substr(0, csv.out.find('\n')),
            "window_id,N,N',N+,N-,fpr,fnr,tfr,mean_rel_err,direction");
  EXPECT_NE(csv.out.find("\n0,3,3,0,0,0,0,0,"), std::string::npos) << csv.out;
}

TEST(Cli, EvaluateWithoutSuperPointsIsUndefined) {
  TempDir dir;
  ASSERT_EQ(run(gen_args(dir / "t.ippr", 0)).code, cli::kOk);
  const Result csv = run({"--format", "csv", "evaluate", "-i", (dir / "t.ippr").string()});
  ASSERT_EQ(csv.code, cli::kOk) << csv.err;
  EXPECT_NE(csv.out.find("\n0,0,0,0,0,undefined,undefined,undefined,undefined,src\n"),
            std::string::npos)
      << csv.out;
  const json m = json::parse(run({"evaluate", "-i", (dir / "t.ippr").string()}).out)[0];
  EXPECT_TRUE(m["fpr"].is_null());
}

TEST(Cli, BenchReportsFixedMemory) {
  const Result r = run({"--format", "csv", "bench", "--background-hosts", "2000", "--supers", "1",
                        "--worker-counts", "1,2"});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_NE(r.out.find("memory_bytes=10485760\n"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("identical_sketches=yes"), std::string::npos) << r.out;
}

TEST(Cli, ConfigFileSetsFlagsAndCommandLineWins) {
  TempDir dir;
  save_trace(dir / "e.ippr", {});
  {
    std::ofstream f(dir / "dhla.toml");
    f << "g = 256\ntheta = 512\n";
  }
  const auto cfg = (dir / "dhla.toml").string();
  const Result r = run({"--config", cfg, "detect", "-i", (dir / "e.ippr").string()});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  json doc = json::parse(r.out);
  EXPECT_EQ(doc["params"]["g"], 256);
  EXPECT_EQ(doc["theta"], 512);

  const Result o = run({"--config", cfg, "--theta", "2048", "detect", "-i", (dir / "e.ippr").string()});
  ASSERT_EQ(o.code, cli::kOk) << o.err;
  doc = json::parse(o.out);
  EXPECT_EQ(doc["params"]["g"], 256);
  EXPECT_EQ(doc["theta"], 2048);
}

}  // namespace
}  // namespace dhla

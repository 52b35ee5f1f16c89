#include <doctest.h>

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "test_util.hpp"
#include "viscon/analysis.hpp"
#include "viscon/cli.hpp"
#include "viscon/farm/task.hpp"
#include "viscon/plan_synth.hpp"

using namespace viscon;
using testutil::TempDir;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(std::move(args), out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path write_plan(const TempDir& dir, std::uint64_t seed = 5) {
  PlanSynthParams p;
  p.width = 30;
  p.height = 24;
  p.room_count = {2, 4};
  p.seed = seed;
  const auto path = dir / "plan.pgm";
  save_occupancy(generate_plan(p), path);
  return path;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("analyze writes the same bytes as the library") {
  TempDir dir;
  const auto plan = write_plan(dir);
  for (std::string kind : {"spatial", "visual", "depth", "sdf"}) {
    CAPTURE(kind);
    const auto out = dir / (kind + ".pgm");
    const auto r = cli({"analyze", "--input", plan.string(), "--analysis", kind, "--out", out.string(), "--f32"});
    REQUIRE(r.code == kExitOk);
    CHECK(r.err.empty());
    const auto lib = analyze_plan(load_occupancy(plan), parse_field_kind(kind));
    const auto ref = dir / (kind + ".ref.pgm");
    write_field_output(lib.field, lib.pruned, ref);
    CHECK(read_file(out) == read_file(ref));
    CHECK(std::filesystem::exists(dir / (kind + ".f32")));
  }
}

TEST_CASE("usage errors exit with 2") {
  TempDir dir;
  const auto plan = write_plan(dir);
  auto r = cli({"analyze", "--input", plan.string(), "--analysis", "spatial", "--out", (dir / "x.pgm").string(),
                "--bogus"});
  CHECK(r.code == kExitUsage);
  CHECK(r.err.find("--bogus") != std::string::npos);
  CHECK_FALSE(std::filesystem::exists(dir / "x.pgm"));

  CHECK(cli({}).code == kExitUsage);
  CHECK(cli({"analyze", "--input", plan.string()}).code == kExitUsage);
  CHECK(cli({"analyze", "--input", plan.string(), "--analysis", "nope", "--out", (dir / "x.pgm").string()}).code ==
        kExitUsage);
  CHECK(cli({"analyze", "--input", plan.string(), "--analysis", "sdf", "--out", (dir / "x.pgm").string(), "--isa",
             "neon"})
            .code == kExitUsage);
  CHECK(cli({"generate", "--out", (dir / "g").string(), "--size", "abc"}).code == kExitUsage);
  CHECK(cli({"generate", "--out", (dir / "g").string(), "--size", "8x8"}).code == kExitUsage);
  CHECK(cli({"farm"}).code == kExitUsage);
}

TEST_CASE("runtime failures exit with 1") {
  TempDir dir;
  const auto r = cli({"analyze", "--input", (dir / "missing.pgm").string(), "--analysis", "sdf", "--out",
                      (dir / "x.pgm").string()});
  CHECK(r.code == kExitFailure);
  CHECK(r.err.find("IoFailure") != std::string::npos);
}

TEST_CASE("help and version exit with 0") {
  auto r = cli({"--help"});
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("generate") != std::string::npos);
  CHECK(cli({"analyze", "--help"}).code == kExitOk);
  CHECK(cli({"--version"}).code == kExitOk);
}

TEST_CASE("bench prints timings as JSON") {
  TempDir dir;
  const auto plan = write_plan(dir);
  const auto r = cli({"bench", "--input", plan.string(), "--analysis", "sdf", "--repeat", "3", "--isa", "scalar"});
  REQUIRE(r.code == kExitOk);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["timings"].size() == 3);
  CHECK(j["mean"].get<double>() >= 0.0);
  CHECK(j["analysis"] == "SDF");
  CHECK(j["isa"] == "scalar");
  CHECK(cli({"bench", "--input", plan.string(), "--analysis", "sdf", "--repeat", "1", "--isa", "auto"}).code ==
        kExitOk);
}

TEST_CASE("generate, farm local and dataset build chain together") {
  TempDir dir;
  const auto plans = dir / "plans";
  auto r = cli({"plan-synth", "generate", "--count", "3", "--size", "24x24", "--rooms", "2-4", "--seed", "9",
                "--out", plans.string()});
  REQUIRE(r.code == kExitOk);
  CHECK(std::filesystem::exists(plans / "plan_00002.pgm"));
  const auto manifest_path = plans / "manifest.jsonl";
  CHECK(farm::TaskManifest::load(manifest_path).tasks.size() == 6);

  r = cli({"farm", "local", "--manifest", manifest_path.string(), "--workers", "2", "--json"});
  REQUIRE(r.code == kExitOk);
  const auto stats = nlohmann::json::parse(r.out);
  CHECK(stats["sample_count"] == 6);
  for (const auto& t : farm::TaskManifest::load(manifest_path).tasks) CHECK(t.status == farm::TaskStatus::Done);

  // Already complete: nothing left to run.
  r = cli({"farm", "local", "--manifest", manifest_path.string()});
  CHECK(r.code == kExitOk);

  r = cli({"dataset", "build", "--plans", plans.string(), "--out", (dir / "ds").string(), "--no-farm", "--seed",
           "2"});
  REQUIRE(r.code == kExitOk);
  CHECK(r.out.find("wrote 6 pairs") != std::string::npos);

  r = cli({"dataset", "build", "--plans", plans.string(), "--out", (dir / "ds2").string(), "--split", "0.5,0.5"});
  CHECK(r.code == kExitUsage);
  r = cli({"dataset", "build", "--plans", plans.string(), "--out", (dir / "ds2").string(), "--analyses", "sdf",
           "--no-farm"});
  CHECK(r.code == kExitFailure);
  CHECK(r.err.find("MissingAnalysis") != std::string::npos);
}

}  // TEST_SUITE

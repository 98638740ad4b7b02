#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "lowmot/config.hpp"
#include "lowmot/mot_io.hpp"

using namespace lowmot;
namespace fs = std::filesystem;

namespace {

std::string cli_path() {
  const char* env = std::getenv("LOWMOT_CLI");
  REQUIRE_MESSAGE(env != nullptr, "LOWMOT_CLI must point at the built binary");
  return env;
}

int run(const std::string& args, const std::string& stdout_file = "") {
  std::string command = cli_path() + " " + args;
  if (!stdout_file.empty()) command += " > " + stdout_file;
  command += " 2> /dev/null";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("lowmot_cli_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

constexpr const char* kTinyScenario = R"json({
  "name": "tiny",
  "arena_width": 160, "arena_height": 120,
  "duration": 2.1, "fps": 30,
  "targets": [
    {"kind": "linear", "width": 18, "height": 24, "color": [200, 60, 60],
     "start_x": 30, "start_y": 40, "vel_x": 25, "vel_y": 10,
     "embedding_seed": 4}
  ]
})json";

}  // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("subsample schedule examples") {
  TempDir dir;
  const std::string out = dir.file("schedule.txt");
  REQUIRE(run("subsample --fps 30 --frames 91 --hz 1", out) == 0);
  const std::string text = slurp(out);
  CHECK(text.find("detection_frames: 1 31 61 91") != std::string::npos);
  CHECK(text.find("intermediate_frames: 16 46 76") != std::string::npos);

  REQUIRE(run("subsample --fps 30 --frames 10 --hz full", out) == 0);
  const std::string full_text = slurp(out);
  CHECK(full_text.find("intermediate_frames:\n") != std::string::npos);

  CHECK(run("subsample --fps 30 --frames 10 --hz 40") == 2);
}

TEST_CASE("synth presets and scenario files") {
  TempDir dir;

  SUBCASE("crossing preset emits exactly two ground-truth ids") {
    const std::string seq = dir.file("seq");
    REQUIRE(run("synth --scenario crossing --seed 5 --out " + seq) == 0);
    std::set<std::int64_t> ids;
    for (const TrackRow& r : read_track_file(seq + "/gt/gt.txt")) {
      ids.insert(r.id);
    }
    CHECK(ids == std::set<std::int64_t>{1, 2});
    CHECK(fs::exists(seq + "/seqinfo.ini"));
    CHECK(fs::exists(seq + "/img1/000001.ppm"));
    CHECK(fs::exists(seq + "/det/det.emb"));
  }

  SUBCASE("zero-target scenario gives empty files") {
    const std::string scenario = dir.file("none.json");
    std::ofstream(scenario) << R"({"arena_width": 64, "arena_height": 64,
      "duration": 0.5, "fps": 10, "targets": []})";
    const std::string seq = dir.file("empty_seq");
    REQUIRE(run("synth --scenario " + scenario + " --seed 1 --out " + seq) ==
            0);
    CHECK(read_detections(seq + "/det/det.txt").empty());
    CHECK(read_track_file(seq + "/gt/gt.txt").empty());
  }

  SUBCASE("same seed reproduces identical detection files") {
    const std::string scenario = dir.file("tiny.json");
    std::ofstream(scenario) << kTinyScenario;
    const std::string a = dir.file("a");
    const std::string b = dir.file("b");
    REQUIRE(run("synth --scenario " + scenario + " --seed 9 --out " + a) == 0);
    REQUIRE(run("synth --scenario " + scenario + " --seed 9 --out " + b) == 0);
    CHECK(slurp(a + "/det/det.txt") == slurp(b + "/det/det.txt"));
    CHECK(slurp(a + "/det/det.emb") == slurp(b + "/det/det.emb"));
    CHECK(slurp(a + "/img1/000010.ppm") == slurp(b + "/img1/000010.ppm"));
  }

  SUBCASE("bad scenario file is an input error") {
    const std::string scenario = dir.file("broken.json");
    std::ofstream(scenario) << "{not json";
    CHECK(run("synth --scenario " + scenario + " --seed 1 --out " +
              dir.file("x")) == 3);
  }
}

TEST_CASE("eval reports and errors") {
  TempDir dir;
  const std::string gt = dir.file("gt.txt");
  std::vector<TrackRow> rows;
  for (int f = 1; f <= 5; ++f) {
    rows.push_back({f, 1, BBox(10.0 * f, 5, 12, 20), 1.0});
  }
  write_results(gt, rows);

  SUBCASE("perfect input scores ones") {
    const std::string out = dir.file("report.txt");
    REQUIRE(run("eval --gt " + gt + " --res " + gt, out) == 0);
    const std::string text = slurp(out);
    CHECK(text.find("MOTA   1.000000") != std::string::npos);
    CHECK(text.find("IDF1   1.000000") != std::string::npos);
    CHECK(text.find("HOTA   1.000000") != std::string::npos);
  }
  SUBCASE("unknown metric name is a usage error") {
    CHECK(run("eval --gt " + gt + " --res " + gt + " --metrics mota,f1") == 2);
  }
  SUBCASE("results beyond the gt frame range are rejected") {
    const std::string res = dir.file("res.txt");
    write_results(res, {{9, 1, BBox(1, 1, 5, 5), 1.0}});
    CHECK(run("eval --gt " + gt + " --res " + res) == 3);
  }
  SUBCASE("missing file is an input error") {
    CHECK(run("eval --gt " + dir.file("nope.txt") + " --res " + gt) == 3);
  }
}

TEST_CASE("track io accounting and input validation") {
  TempDir dir;
  const std::string scenario = dir.file("tiny.json");
  std::ofstream(scenario) << kTinyScenario;
  const std::string seq = dir.file("seq");
  REQUIRE(run("synth --scenario " + scenario + " --seed 2 --out " + seq) == 0);
  const std::string det = seq + "/det/det.txt";
  const std::string emb = seq + "/det/det.emb";

  SUBCASE("low-frequency runs read only scheduled frames") {
    const std::string out = dir.file("out.txt");
    REQUIRE(run("track --seq " + seq + " --det " + det + " --emb " + emb +
                " --hz 1 --out " + out) == 0);
    // 63 frames at 1 Hz: detections {1, 31, 61}, intermediates {16, 46}
    const auto manifest =
        nlohmann::json::parse(slurp(out + ".manifest.json"));
    CHECK(manifest.at("frames_read").get<int>() == 5);
    CHECK(!read_track_file(out).empty());
  }

  SUBCASE("full-frequency runs never touch the images") {
    const std::string out = dir.file("out_full.txt");
    REQUIRE(run("track --seq " + seq + " --det " + det + " --emb " + emb +
                " --hz full --out " + out) == 0);
    const auto manifest =
        nlohmann::json::parse(slurp(out + ".manifest.json"));
    CHECK(manifest.at("frames_read").get<int>() == 0);
  }

  SUBCASE("results are identical under different thread caps") {
    const std::string one = dir.file("threads1.txt");
    const std::string four = dir.file("threads4.txt");
    REQUIRE(run("track --seq " + seq + " --det " + det + " --emb " + emb +
                " --hz 1 --threads 1 --out " + one) == 0);
    REQUIRE(run("track --seq " + seq + " --det " + det + " --emb " + emb +
                " --hz 1 --threads 4 --out " + four) == 0);
    CHECK(slurp(one) == slurp(four));
  }

  SUBCASE("detection/embedding count mismatch is an input error") {
    const std::string bad_emb = dir.file("bad.emb");
    std::vector<Embedding> embs{Embedding::normalized({1.0f, 0.0f})};
    write_embeddings(bad_emb, embs);
    CHECK(run("track --seq " + seq + " --det " + det + " --emb " + bad_emb +
              " --hz 1 --out " + dir.file("x.txt")) == 3);
  }

  SUBCASE("missing input is an input error") {
    CHECK(run("track --seq " + seq + " --det " + dir.file("nope.txt") +
              " --emb " + emb + " --hz 1 --out " + dir.file("x.txt")) == 3);
  }

  SUBCASE("missing required flag is a usage error") {
    CHECK(run("track --seq " + seq) == 2);
  }
}

TEST_CASE("config dump parses back to the defaults") {
  TempDir dir;
  const std::string out = dir.file("dump.cfg");
  REQUIRE(run("config", out) == 0);
  const PipelineConfig parsed = parse_config_text(slurp(out), "dump");
  const PipelineConfig defaults;
  CHECK(parsed.t_live == defaults.t_live);
  CHECK(parsed.association.theta_bbd == defaults.association.theta_bbd);
  CHECK(parsed.vt.failure_threshold == defaults.vt.failure_threshold);
}

TEST_SUITE_END();

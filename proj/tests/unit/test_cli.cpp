#include <catch_amalgamated.hpp>

#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "aviary/cli/cli.hpp"
#include "aviary/cli/pipeline.hpp"
#include "aviary/error.hpp"
#include "aviary/ingest/csv.hpp"
#include "aviary/synth/synth.hpp"
#include "test_support.hpp"

using namespace aviary;
using namespace aviary::cli;
using Catch::Matchers::ContainsSubstring;

namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = run_subcommand(args, out, err);
    return {code, out.str(), err.str()};
}

std::size_t data_rows(const std::string& csv) {
    return static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')) - 1;
}

std::map<std::string, std::string> read_tree(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (e.is_regular_file()) out[fs::relative(e.path(), root).generic_string()] = ingest::read_text_file(e.path().string());
    }
    return out;
}

synth::SynthConfig small_dataset_config(std::uint64_t seed) {
    auto c = synth::SynthConfig::defaults();
    c.seed = seed;
    c.acoustic.clips_per_week = 2;
    c.acoustic.clip_seconds = 0.5;
    c.flow.clips_per_week = 1;
    c.flow.width = 64;
    c.flow.height = 48;
    c.flow.before_s = 4.0;
    c.flow.during_s = 2.0;
    c.flow.after_s = 4.0;
    c.thermal_images_per_week = 3;
    return c;
}

// One dataset shared by the end-to-end cases.
const fs::path& dataset() {
    static testing::TempDir dir("aviary-cli-data");
    static const bool made = [] {
        synth::generate_dataset(small_dataset_config(21), dir.path());
        return true;
    }();
    (void)made;
    return dir.path();
}

}  // namespace

TEST_CASE("pipeline writes the declared artifacts and is byte-stable") {
    testing::TempDir a("aviary-cli-a"), b("aviary-cli-b");
    const auto r1 = run({"pipeline", "--in", dataset().string(), "--out", a.str()});
    INFO(r1.err);
    REQUIRE(r1.code == 0);
    for (const char* name : {"feature_table.csv", "correlations.csv", "contrast.json", "trajectories.svg", "stats.json",
                             "weekly_summaries.csv", "correlation_heatmap.svg", "correlation_heatmap.csv"}) {
        CHECK(fs::exists(a.path() / name));
        CHECK_THAT(r1.out, ContainsSubstring((a.path() / name).string() + ": "));
    }
    REQUIRE(run({"pipeline", "--in", dataset().string(), "--out", b.str()}).code == 0);
    CHECK(read_tree(a.path()) == read_tree(b.path()));

    const auto table = aggregate::feature_table_from_csv(ingest::read_text_file(a.file("feature_table.csv")));
    CHECK(table.weeks.size() == 16);
    CHECK(table.missing_cells() == 0);
}

TEST_CASE("stats correlate emits 45 pairs") {
    testing::TempDir out("aviary-cli-corr");
    REQUIRE(run({"pipeline", "--in", dataset().string(), "--out", out.str(), "--no-report"}).code == 0);
    CHECK_FALSE(fs::exists(out.path() / "trajectories.svg"));
    const auto r = run({"stats", "correlate", "--table", out.file("feature_table.csv"), "--q", "0.05", "--out",
                        out.file("again.csv")});
    INFO(r.err);
    REQUIRE(r.code == 0);
    const auto csv = ingest::read_text_file(out.file("again.csv"));
    CHECK(data_rows(csv) == 45);
    CHECK(csv == ingest::read_text_file(out.file("correlations.csv")));
}

TEST_CASE("flow with a missing manifest is an I/O error naming the path") {
    testing::TempDir dir("aviary-cli-flow");
    const auto missing = dir.file("missing.json");
    const auto r = run({"flow", "--frames", missing, "--out", dir.file("flow.csv")});
    CHECK(r.code == 2);
    CHECK_THAT(r.err, ContainsSubstring(missing));
}

TEST_CASE("usage and validation errors exit 1") {
    CHECK(run({}).code == 1);
    CHECK(run({"pipeline", "--in", ".", "--out", ".", "--bogus"}).code == 1);
    CHECK(run({"features", "video"}).code == 1);
    CHECK(run({"--help"}).code == 0);

    testing::TempDir dir("aviary-cli-cfg");
    ingest::write_text_file(dir.file("typo.json"), R"({"stats": {"alpah": 0.05}})");
    const auto typo = run({"pipeline", "--config", dir.file("typo.json"), "--in", dataset().string(), "--out", dir.file("o")});
    CHECK(typo.code == 1);
    CHECK_THAT(typo.err, ContainsSubstring("alpah"));
    ingest::write_text_file(dir.file("bad.json"), R"({"stats": {"alpha": 1.5}})");
    CHECK(run({"pipeline", "--config", dir.file("bad.json"), "--in", dataset().string(), "--out", dir.file("o")}).code == 1);
    ingest::write_text_file(dir.file("broken.json"), "{");
    CHECK(run({"pipeline", "--config", dir.file("broken.json"), "--in", dataset().string(), "--out", dir.file("o")}).code == 1);
    CHECK(run({"pipeline", "--in", dir.file("nowhere"), "--out", dir.file("o")}).code == 2);
}

TEST_CASE("flags override the config file") {
    testing::TempDir dir("aviary-cli-prec");
    REQUIRE(run({"pipeline", "--in", dataset().string(), "--out", dir.str(), "--no-report"}).code == 0);
    ingest::write_text_file(dir.file("cfg.json"), R"({"stats": {"pairing": {"early": [5, 9], "late": [16, 20]}}})");
    REQUIRE(run({"stats", "contrast", "--summaries", dir.file("weekly_summaries.csv"), "--config", dir.file("cfg.json"),
                 "--out", dir.file("c1.json")})
                .code == 0);
    CHECK_THAT(ingest::read_text_file(dir.file("c1.json")), ContainsSubstring("weeks 5-9 paired with weeks 16-20"));
    REQUIRE(run({"stats", "contrast", "--summaries", dir.file("weekly_summaries.csv"), "--config", dir.file("cfg.json"),
                 "--early", "6,10", "--out", dir.file("c2.json")})
                .code == 0);
    CHECK_THAT(ingest::read_text_file(dir.file("c2.json")), ContainsSubstring("weeks 6-10 paired with weeks 16-20"));
}

TEST_CASE("pipeline config JSON is strict and round trips") {
    const auto c = pipeline_config_from_json(nlohmann::json::parse(R"({"stats": {"levene_center": "median"}, "analysis": {"room": 2}})"));
    CHECK(c.stats.levene_center == stats::LeveneCenter::Median);
    CHECK(c.room == 2);
    const auto j = to_json(c);
    CHECK(to_json(pipeline_config_from_json(nlohmann::json::parse(j.dump()))).dump() == j.dump());
    CHECK_THROWS_AS(pipeline_config_from_json(nlohmann::json::parse(R"({"flow": {"patch": 8}})")), ValidationError);
    CHECK_THROWS_AS(pipeline_config_from_json(nlohmann::json::parse(R"({"stats": {"levene_center": "trimmed"}})")),
                    ValidationError);
}

TEST_CASE("subcommands compose into the pipeline result") {
    testing::TempDir dir("aviary-cli-steps");
    const auto d = dataset();
    REQUIRE(run({"pipeline", "--in", d.string(), "--out", dir.file("full")}).code == 0);
    REQUIRE(run({"features", "audio", "--index", (d / "audio" / "clips.csv").string(), "--out", dir.file("a.csv")}).code == 0);
    REQUIRE(run({"flow", "--index", (d / "video" / "clips.csv").string(), "--out", dir.file("f.csv")}).code == 0);
    CHECK(ingest::read_text_file(dir.file("a.csv")) == ingest::read_text_file(dir.file("full/acoustic_features.csv")));
    CHECK(ingest::read_text_file(dir.file("f.csv")) == ingest::read_text_file(dir.file("full/flow_intensity.csv")));
    REQUIRE(run({"aggregate", "--acoustic", dir.file("a.csv"), "--flow", dir.file("f.csv"), "--thermal",
                 (d / "thermal.csv").string(), "--env", (d / "env.csv").string(), "--out", dir.file("agg")})
                .code == 0);
    CHECK(ingest::read_text_file(dir.file("agg/feature_table.csv")) ==
          ingest::read_text_file(dir.file("full/feature_table.csv")));
    REQUIRE(run({"features", "thermal", "--in", (d / "thermal.csv").string(), "--out", dir.file("t.csv")}).code == 0);
    REQUIRE(run({"features", "env", "--in", (d / "env.csv").string(), "--out", dir.file("e.csv")}).code == 0);

    const auto anova = run({"stats", "anova", "--input", dir.file("a.csv"), "--value", "spectral_centroid", "--out",
                            dir.file("anova.json")});
    INFO(anova.err);
    REQUIRE(anova.code == 0);
    const auto tests = run({"stats", "tests", "--input", (d / "thermal.csv").string(), "--value", "t_mean_c", "--where",
                            "region=Foot", "--out", dir.file("tests.json")});
    INFO(tests.err);
    REQUIRE(tests.code == 0);
    const auto j = nlohmann::json::parse(ingest::read_text_file(dir.file("tests.json")));
    CHECK(j.contains("anova"));
    CHECK(j.contains("kruskal_wallis"));

    REQUIRE(run({"report", "--summaries", dir.file("full/weekly_summaries.csv"), "--table", dir.file("full/feature_table.csv"),
                 "--correlations", dir.file("full/correlations.csv"), "--out", dir.file("rep")})
                .code == 0);
    CHECK(ingest::read_text_file(dir.file("rep/correlation_heatmap.svg")) ==
          ingest::read_text_file(dir.file("full/correlation_heatmap.svg")));
    CHECK(ingest::read_text_file(dir.file("rep/trajectories.svg")) == ingest::read_text_file(dir.file("full/trajectories.svg")));
}

TEST_CASE("report regeneration reproduces every SVG from its CSV") {
    testing::TempDir dir("aviary-cli-regen");
    REQUIRE(run({"pipeline", "--in", dataset().string(), "--out", dir.str()}).code == 0);
    const auto before = read_tree(dir.path());
    const auto r = run({"report", "--regenerate", dir.str()});
    REQUIRE(r.code == 0);
    CHECK_THAT(r.out, ContainsSubstring("trajectories.svg: regenerated"));
    CHECK(read_tree(dir.path()) == before);
}

TEST_CASE("synth honours --seed over the config file") {
    testing::TempDir dir("aviary-cli-synth");
    auto cfg = synth::to_json(small_dataset_config(1));
    cfg["flow"]["clips_per_week"] = 0;
    cfg["acoustic"]["clips_per_week"] = 0;
    ingest::write_text_file(dir.file("synth.json"), cfg.dump());
    REQUIRE(run({"synth", "--config", dir.file("synth.json"), "--out", dir.file("d1")}).code == 0);
    REQUIRE(run({"synth", "--config", dir.file("synth.json"), "--out", dir.file("d2"), "--seed", "99"}).code == 0);
    const auto g1 = nlohmann::json::parse(ingest::read_text_file(dir.file("d1/ground_truth.json")));
    const auto g2 = nlohmann::json::parse(ingest::read_text_file(dir.file("d2/ground_truth.json")));
    CHECK(g1["seed"] == 1);
    CHECK(g2["seed"] == 99);
}

TEST_CASE("clips without an entry time are skipped with a warning") {
    testing::TempDir dir("aviary-cli-entry");
    const auto src = dataset() / "video" / "r1_w05_d1_c01";
    fs::copy(src, dir.path() / "clip");
    auto m = ingest::parse_manifest(ingest::read_text_file((dir.path() / "clip" / "manifest.json").string()));
    m.entry_start_s.reset();
    m.entry_end_s.reset();
    m.start_time.reset();
    ingest::write_text_file((dir.path() / "clip" / "manifest.json").string(), ingest::manifest_to_json(m));
    const auto result = extract_flow({{"c", dir.path() / "clip" / "manifest.json"}}, {});
    CHECK(result.clips.empty());
    REQUIRE(result.warnings.size() == 1);
    CHECK_THAT(result.warnings[0], ContainsSubstring("no caretaker entry"));
}

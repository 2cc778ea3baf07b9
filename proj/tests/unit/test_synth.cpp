#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "aviary/aggregate/aggregate.hpp"
#include "aviary/cli/pipeline.hpp"
#include "aviary/error.hpp"
#include "aviary/ingest/csv.hpp"
#include "aviary/synth/synth.hpp"
#include "test_support.hpp"

using namespace aviary;
using namespace aviary::synth;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace fs = std::filesystem;

namespace {


// Small files: two short audio clips and one tiny video clip per week.
SynthConfig small_config(std::uint64_t seed) {
    auto c = SynthConfig::defaults();
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

// Flat trends with independent weekly latents and no structure.
SynthConfig flat_config(std::uint64_t seed) {
    auto c = SynthConfig::defaults();
    c.seed = seed;
    for (auto& [name, t] : c.trends) {
        t.end = t.start;
        t.shape = TrendShape::Linear;
    }
    c.couplings.clear();
    c.disturbances.clear();
    return c;
}

// Planted weekly values over the table weeks as a feature table.
aggregate::WeeklyFeatureTable planted_table(const GroundTruth& g) {
    aggregate::WeeklyFeatureTable t;
    t.columns.assign(aggregate::kFeatureColumns.begin(), aggregate::kFeatureColumns.end());
    for (int w = aggregate::kFirstTableWeek; w <= aggregate::kLastTableWeek; ++w) {
        t.weeks.push_back(w);
        for (const auto& col : t.columns) t.cells.emplace_back(g.planted_at(col, w));
    }
    return t;
}

const aggregate::CorrelationEntry& entry(const aggregate::CorrelationReport& r, std::string_view a, std::string_view b) {
    for (const auto& e : r.entries) {
        if ((e.feature_a == a && e.feature_b == b) || (e.feature_a == b && e.feature_b == a)) return e;
    }
    FAIL("pair not found");
    throw;
}

bool is_null_pair(const GroundTruth& g, std::string_view a, std::string_view b) {
    return std::any_of(g.null_pairs.begin(), g.null_pairs.end(), [&](const auto& p) {
        return (p.first == a && p.second == b) || (p.first == b && p.second == a);
    });
}

std::map<std::string, std::string> read_tree(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (e.is_regular_file()) {
            const auto bytes = ingest::read_binary_file(e.path().string());
            out[fs::relative(e.path(), root).generic_string()] = std::string(bytes.begin(), bytes.end());
        }
    }
    return out;
}

// Asymptotic Kolmogorov distribution tail with the Stephens small-sample correction.
double ks_uniform_p(std::vector<double> u) {
    std::sort(u.begin(), u.end());
    const double n = static_cast<double>(u.size());
    double d = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        d = std::max({d, (static_cast<double>(i) + 1.0) / n - u[i], u[i] - static_cast<double>(i) / n});
    }
    const double lambda = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d;
    double p = 0.0;
    for (int k = 1; k <= 100; ++k) p += 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
    return std::clamp(p, 0.0, 1.0);
}

}  // namespace

TEST_CASE("linear trend interpolates between the first and last configured week") {
    auto c = flat_config(1);
    c.trends["head_temp_mean"] = {30.0, 40.0, TrendShape::Linear, 3.0, std::nullopt, 0.0, 0.0};
    const auto g = planted_truth(c);
    const auto& head = g.trend.at("head_temp_mean");
    REQUIRE(g.weeks.front() == 1);
    CHECK(head[0] == 30.0);
    CHECK_THAT(head[9], WithinAbs(30.0 + 10.0 * 9.0 / 19.0, 1e-12));
    CHECK_THAT(head.back(), WithinAbs(40.0, 1e-12));
    // Zero weekly sd: planted equals trend.
    CHECK(g.planted.at("head_temp_mean") == head);
}

TEST_CASE("exp-plateau trend follows its closed form") {
    auto c = flat_config(1);
    c.trends["foot_temp_mean"] = {30.0, 36.0, TrendShape::ExpPlateau, 2.5, std::nullopt, 0.0, 0.0};
    c.trends["flow_response"] = {3.0, 0.8, TrendShape::ExpPlateau, 6.0, 5, 0.0, 0.0};
    const auto g = planted_truth(c);
    for (std::size_t i = 0; i < g.weeks.size(); ++i) {
        const double w = g.weeks[i];
        CHECK_THAT(g.trend.at("foot_temp_mean")[i], WithinAbs(36.0 - 6.0 * std::exp(-(w - 1.0) / 2.5), 1e-12));
        CHECK_THAT(g.trend.at("flow_response")[i], WithinAbs(0.8 + 2.2 * std::exp(-(w - 5.0) / 6.0), 1e-12));
    }
    CHECK_THAT(g.planted_at("flow_response", 5), WithinAbs(3.0, 1e-12));
}

TEST_CASE("table features derive from their drivers") {
    const auto c = SynthConfig::defaults();
    const auto g = planted_truth(c);
    for (std::size_t i = 0; i < g.weeks.size(); ++i) {
        const int w = g.weeks[i];
        CHECK_THAT(g.planted.at("zcr")[i], WithinRel(2.0 * g.planted.at("spectral_centroid")[i] / 44100.0, 1e-12));
        const double base = g.planted.at("flow_baseline")[i];
        const double resp = g.planted.at("flow_response")[i];
        CHECK(g.planted.at("flow_before")[i] == base);
        CHECK_THAT(g.planted.at("flow_during")[i], WithinAbs(base + resp, 1e-12));
        CHECK_THAT(g.planted.at("flow_after")[i], WithinAbs(base + 0.15 * resp, 1e-12));
        if (w == 12) CHECK_THAT(base - g.trend.at("flow_baseline")[i], WithinAbs(0.3, 0.5));
    }
}

TEST_CASE("couplings are listed verbatim and realized in sample") {
    const auto c = SynthConfig::defaults();
    const auto g = planted_truth(c);
    REQUIRE(g.couplings.size() == c.couplings.size());
    for (std::size_t i = 0; i < c.couplings.size(); ++i) {
        CHECK(g.couplings[i].feature_a == c.couplings[i].feature_a);
        CHECK(g.couplings[i].feature_b == c.couplings[i].feature_b);
        CHECK(g.couplings[i].r == c.couplings[i].r);
    }
    REQUIRE(g.realized_r.size() == 2);
    CHECK_THAT(g.realized_r[0], WithinAbs(0.70, 1e-12));
    // The child's trend adds variance the coupling does not see.
    CHECK(g.realized_r[1] > 0.5);
    CHECK(g.realized_r[1] < 0.85 + 1e-12);

    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        auto s = SynthConfig::defaults();
        s.seed = seed;
        CHECK_THAT(planted_truth(s).realized_r[0], WithinAbs(0.70, 1e-12));
    }
}

TEST_CASE("infeasible and malformed couplings are rejected") {
    auto c = flat_config(1);
    c.couplings = {{"ambient_temp", "rel_humidity", 0.8}, {"zcr", "rel_humidity", 0.8}};
    CHECK_THROWS_WITH(planted_truth(c), ContainsSubstring("infeasible coupling matrix"));

    c.couplings = {{"zcr", "rel_humidity", 1.2}};
    CHECK_THROWS_AS(planted_truth(c), ValidationError);
    c.couplings = {{"zcr", "spectral_centroid", 0.5}};
    CHECK_THROWS_WITH(planted_truth(c), ContainsSubstring("shares one latent"));
    c.couplings = {{"wingspan", "rms", 0.5}};
    CHECK_THROWS_WITH(planted_truth(c), ContainsSubstring("unknown coupling feature"));
    c.couplings = {{"rms", "ambient_temp", 0.5}, {"ambient_temp", "rms", 0.5}};
    CHECK_THROWS_AS(planted_truth(c), ValidationError);
}

TEST_CASE("config JSON round trips and rejects unknown keys") {
    const auto c = SynthConfig::defaults();
    const auto j = to_json(c);
    const auto back = synth_config_from_json(nlohmann::json::parse(j.dump()));
    CHECK(to_json(back).dump() == j.dump());

    auto bad = nlohmann::json::parse(j.dump());
    bad["acoustic"]["clip_secs"] = 3;
    CHECK_THROWS_WITH(synth_config_from_json(bad), ContainsSubstring("unknown key 'clip_secs'"));

    auto bad_r = nlohmann::json::parse(j.dump());
    bad_r["couplings"][0]["r"] = 1.5;
    CHECK_THROWS_AS(synth_config_from_json(bad_r), ValidationError);

    const auto partial = synth_config_from_json(nlohmann::json::parse(R"({"seed": 7, "weeks": [1, 12], "coupling_weeks": [5, 12], "disturbances": []})"));
    CHECK(partial.seed == 7);
    CHECK(partial.last_week == 12);
    CHECK(partial.couplings.size() == 2);
}

TEST_CASE("null pairs exclude every structurally linked pair") {
    const auto g = planted_truth(SynthConfig::defaults());
    CHECK_FALSE(is_null_pair(g, "zcr", "rel_humidity"));
    CHECK_FALSE(is_null_pair(g, "spectral_centroid", "zcr"));
    CHECK_FALSE(is_null_pair(g, "spectral_centroid", "rel_humidity"));
    CHECK_FALSE(is_null_pair(g, "flow_before", "flow_after"));
    CHECK_FALSE(is_null_pair(g, "head_temp_mean", "foot_temp_mean"));
    CHECK(is_null_pair(g, "rms", "ambient_temp"));
    CHECK(is_null_pair(g, "head_temp_mean", "rel_humidity"));
    CHECK(is_null_pair(g, "ambient_temp", "rel_humidity"));
    CHECK(g.null_pairs.size() >= 30);
}

TEST_CASE("planted tables: coupled pair significant, null pairs mostly not") {
    int planted_significant = 0;
    int seeds_nulls_clean = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        auto c = SynthConfig::defaults();
        c.seed = seed;
        const auto g = planted_truth(c);
        const auto report = aggregate::correlate_all(planted_table(g), 0.05);
        planted_significant += entry(report, "zcr", "rel_humidity").significant ? 1 : 0;
        std::size_t null_sig = 0;
        for (const auto& [a, b] : g.null_pairs) null_sig += entry(report, a, b).significant ? 1 : 0;
        seeds_nulls_clean += (static_cast<double>(null_sig) <= 0.1 * static_cast<double>(g.null_pairs.size())) ? 1 : 0;
    }
    CHECK(planted_significant == 100);
    CHECK(seeds_nulls_clean >= 95);
}

TEST_CASE("null calibration: independent planted drivers give uniform Pearson p-values") {
    std::vector<double> p;
    const std::array<std::pair<const char*, const char*>, 3> pairs = {
        std::pair{"spectral_centroid", "rms"}, {"head_temp_mean", "foot_temp_mean"}, {"ambient_temp", "rel_humidity"}};
    for (std::uint64_t seed = 1; seed <= 500; ++seed) {
        const auto g = planted_truth(flat_config(seed));
        for (const auto& [a, b] : pairs) {
            std::vector<double> x, y;
            for (int w = 5; w <= 20; ++w) {
                x.push_back(g.planted_at(a, w));
                y.push_back(g.planted_at(b, w));
            }
            p.push_back(stats::pearson(x, y).p_value);
        }
    }
    REQUIRE(p.size() == 1500);
    CHECK(ks_uniform_p(p) > 0.01);
    const auto rejected = std::count_if(p.begin(), p.end(), [](double v) { return v < 0.05; });
    CHECK(rejected >= 45);
    CHECK(rejected <= 105);
}

TEST_CASE("within-modality correlation exceeds cross-modality correlation") {
    const std::map<std::string, std::string> modality = {
        {"spectral_centroid", "acoustic"}, {"zcr", "acoustic"},         {"rms", "acoustic"},
        {"head_temp_mean", "thermal"},     {"foot_temp_mean", "thermal"}, {"ambient_temp", "env"},
        {"rel_humidity", "env"},           {"flow_before", "flow"},     {"flow_during", "flow"},
        {"flow_after", "flow"}};
    int coherent = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        auto c = flat_config(seed);
        c.couplings = {{"spectral_centroid", "rms", 0.6},
                       {"head_temp_mean", "foot_temp_mean", 0.6},
                       {"ambient_temp", "rel_humidity", 0.6}};
        const auto report = aggregate::correlate_all(planted_table(planted_truth(c)));
        double within = 0.0, cross = 0.0;
        int nw = 0, nc = 0;
        for (const auto& e : report.entries) {
            REQUIRE(e.r);
            if (modality.at(e.feature_a) == modality.at(e.feature_b)) {
                within += std::abs(*e.r);
                ++nw;
            } else {
                cross += std::abs(*e.r);
                ++nc;
            }
        }
        REQUIRE(nw == 8);
        REQUIRE(nc == 37);
        coherent += within / nw > cross / nc ? 1 : 0;
    }
    CHECK(coherent >= 95);
}

TEST_CASE("generate_dataset writes the documented layout") {
    testing::TempDir dir("aviary-synth-layout");
    const auto c = small_config(3);
    const auto g = generate_dataset(c, dir.path());
    const auto audio = cli::read_audio_index(dir.path() / "audio" / "clips.csv");
    CHECK(audio.size() == 20u * 2u);
    for (const auto& a : audio) CHECK(fs::exists(a.path));
    const auto video = cli::read_video_index(dir.path() / "video" / "clips.csv");
    CHECK(video.size() == 16u);
    const auto m = ingest::parse_manifest(ingest::read_text_file(video.front().manifest.string()));
    REQUIRE(m.entry_start_s);
    CHECK(*m.entry_start_s == 4.0);
    CHECK(*m.entry_end_s == 6.0);
    CHECK(m.frames.size() == 11u);
    const auto thermal = ingest::parse_thermal_csv(ingest::read_text_file(dir.file("thermal.csv")));
    CHECK(thermal.size() == 20u * 2u * 3u);
    const auto env = ingest::parse_env_csv(ingest::read_text_file(dir.file("env.csv")));
    CHECK(env.size() == 20u * 14u);
    CHECK(env.front().extras.contains("co2_ppm"));
    const auto events = ingest::parse_event_log(ingest::read_text_file(dir.file("events.csv")));
    CHECK(std::count_if(events.records.begin(), events.records.end(),
                        [](const auto& e) { return e.kind == ingest::EventKind::CaretakerEntry; }) >= 16);
    const auto gt = nlohmann::json::parse(ingest::read_text_file(dir.file("ground_truth.json")));
    CHECK(gt.contains("config"));
    CHECK(gt["seed"] == c.seed);
    CHECK(g.weeks.size() == 20u);
}

TEST_CASE("generation is deterministic for a seed") {
    testing::TempDir a("aviary-synth-a"), b("aviary-synth-b"), d("aviary-synth-d");
    generate_dataset(small_config(11), a.path());
    generate_dataset(small_config(11), b.path());
    generate_dataset(small_config(12), d.path());
    const auto ta = read_tree(a.path());
    CHECK(ta == read_tree(b.path()));
    CHECK(ta != read_tree(d.path()));
}

TEST_CASE("unwritable output directory is an I/O error") {
    testing::TempDir dir("aviary-synth-io");
    ingest::write_text_file(dir.file("blocker"), "x");
    CHECK_THROWS_AS(generate_dataset(small_config(1), dir.path() / "blocker" / "out"), IoError);
}

TEST_CASE("zero-noise constant trends give constant observations") {
    auto c = small_config(5);
    for (auto& [name, t] : c.trends) {
        t.end = t.start;
        t.weekly_sd = 0.0;
        t.obs_sd = 0.0;
    }
    c.couplings.clear();
    c.disturbances.clear();
    c.acoustic.clip_seconds = 1.0;
    c.flow.clips_per_week = 0;
    testing::TempDir dir("aviary-synth-const");
    generate_dataset(c, dir.path());
    for (const auto& r : ingest::parse_thermal_csv(ingest::read_text_file(dir.file("thermal.csv")))) {
        CHECK(r.t_mean_c == (r.region == ingest::Region::Head ? 37.0 : 30.0));
    }
    for (const auto& r : ingest::parse_env_csv(ingest::read_text_file(dir.file("env.csv")))) {
        CHECK(r.temp_c == (r.session == ingest::Session::AM ? 22.0 : 24.0));
        CHECK(r.rh_pct == (r.session == ingest::Session::AM ? 65.0 : 61.0));
    }
    const auto features = cli::extract_audio(cli::read_audio_index(dir.path() / "audio" / "clips.csv"), {});
    const auto [lo, hi] = std::minmax_element(features.begin(), features.end(), [](const auto& a, const auto& b) {
        return a.spectral_centroid_hz < b.spectral_centroid_hz;
    });
    // Vibrato phase varies per clip; spread stays inside one STFT bin.
    CHECK(hi->spectral_centroid_hz - lo->spectral_centroid_hz < 44100.0 / 2048.0);
    CHECK_THAT(lo->spectral_centroid_hz, WithinAbs(3600.0, 50.0));
}

TEST_CASE("planted linear centroid decline is recovered week by week") {
    auto c = flat_config(8);
    c.last_week = 8;
    c.coupling_first_week = 1;
    c.coupling_last_week = 8;
    for (auto& [name, t] : c.trends) {
        t.weekly_sd = 0.0;
        t.obs_sd = 0.0;
    }
    c.trends["spectral_centroid"] = {3500.0, 2000.0, TrendShape::Linear, 3.0, std::nullopt, 0.0, 0.0};
    c.acoustic.clips_per_week = 12;
    c.acoustic.clip_seconds = 1.0;
    c.flow.clips_per_week = 0;
    c.thermal_images_per_week = 1;
    testing::TempDir dir("aviary-synth-linear");
    generate_dataset(c, dir.path());
    const auto features = cli::extract_audio(cli::read_audio_index(dir.path() / "audio" / "clips.csv"), {});
    std::vector<double> weekly;
    for (const auto& s : aggregate::weekly_acoustic(features)) {
        if (s.feature == "spectral_centroid") weekly.push_back(s.mean);
    }
    REQUIRE(weekly.size() == 8);
    for (std::size_t i = 1; i < weekly.size(); ++i) CHECK(weekly[i] < weekly[i - 1]);
    CHECK_THAT(weekly.front(), WithinAbs(3500.0, 50.0));
    CHECK_THAT(weekly.back(), WithinAbs(2000.0, 50.0));
}

TEST_CASE("extracted RMS tracks the planted weekly level") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        auto c = small_config(seed);
        c.trends["rms"].obs_sd = 0.0;
        c.acoustic.clip_seconds = 1.0;
        c.flow.clips_per_week = 0;
        testing::TempDir dir("aviary-synth-rms");
        const auto g = generate_dataset(c, dir.path());
        acoustic::AcousticConfig cfg;
        cfg.normalize_rms = false;
        cfg.gate_strength = 0.0;
        const auto features = cli::extract_audio(cli::read_audio_index(dir.path() / "audio" / "clips.csv"), cfg);
        for (const auto& f : features) CHECK_THAT(f.rms_amplitude, WithinRel(g.planted_at("rms", f.week), 0.02));
    }
}

TEST_CASE("coupling survives extraction from rendered audio") {
    int recovered = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        auto c = SynthConfig::defaults();
        c.seed = seed;
        c.acoustic.clips_per_week = 3;
        c.acoustic.clip_seconds = 1.0;
        c.flow.clips_per_week = 0;
        c.thermal_images_per_week = 0;
        testing::TempDir dir("aviary-synth-coupling");
        generate_dataset(c, dir.path());
        const auto features = cli::extract_audio(cli::read_audio_index(dir.path() / "audio" / "clips.csv"), {});
        const auto env = ingest::parse_env_csv(ingest::read_text_file(dir.file("env.csv")));
        const auto table = aggregate::build_feature_table(aggregate::weekly_acoustic(features), env);
        const auto r = entry(aggregate::correlate_all(table), "zcr", "rel_humidity").r;
        REQUIRE(r);
        recovered += (*r >= 0.4 && *r <= 0.9) ? 1 : 0;
    }
    CHECK(recovered >= 18);
}

#include "aviary/cli/pipeline.hpp"

#include <algorithm>
#include <map>

#include <fmt/format.h>

#include "aviary/error.hpp"
#include "aviary/ingest/audio.hpp"
#include "aviary/ingest/csv.hpp"
#include "aviary/ingest/frames.hpp"
#include "aviary/parallel.hpp"
#include "aviary/report/report.hpp"
#include "aviary/stats/report_json.hpp"
#include "util/strict_json.hpp"

namespace aviary::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;
using detail::StrictObject;

namespace {

std::string_view levene_name(stats::LeveneCenter c) { return c == stats::LeveneCenter::Mean ? "mean" : "median"; }

std::vector<int> read_pair(const json* j, const std::string& path) {
    if (!j->is_array() || j->size() != 2 || !(*j)[0].is_number_integer() || !(*j)[1].is_number_integer()) {
        throw ValidationError(path + " must be [first, last]");
    }
    return {(*j)[0].get<int>(), (*j)[1].get<int>()};
}

int int_cell(const ingest::CsvRow& row, std::size_t i, std::string_view what) {
    const auto v = ingest::parse_integer(row.fields[i]);
    if (!v) throw ParseError(fmt::format("unparsable {}", what), ParseError::Unit::Row, row.line);
    return static_cast<int>(*v);
}

double double_cell(const ingest::CsvRow& row, std::size_t i, std::string_view what) {
    const auto v = ingest::parse_double(row.fields[i]);
    if (!v) throw ParseError(fmt::format("unparsable {}", what), ParseError::Unit::Row, row.line);
    return *v;
}

void expect_header(const ingest::CsvTable& csv, std::string_view header, std::string_view what) {
    std::string got;
    for (const auto& h : csv.header) got += (got.empty() ? "" : ",") + h;
    if (got != header) throw ParseError(fmt::format("{} header must be {}", what, header), ParseError::Unit::Row, 1);
}

ingest::CsvTable read_csv_file(const fs::path& path) { return ingest::parse_csv(ingest::read_text_file(path.string())); }

}  // namespace

void PipelineConfig::validate() const {
    acoustic.validate();
    flow.validate();
    if (!(stats.alpha > 0.0 && stats.alpha < 1.0)) throw ValidationError("stats.alpha must lie in (0, 1)");
    if (!(stats.q_threshold > 0.0 && stats.q_threshold <= 1.0)) {
        throw ValidationError("stats.q_threshold must lie in (0, 1]");
    }
    stats.pairing.validate();
    if (room < ingest::kMinRoom || room > ingest::kMaxRoom) {
        throw ValidationError(fmt::format("analysis.room must lie in [{}, {}]", ingest::kMinRoom, ingest::kMaxRoom));
    }
}

PipelineConfig pipeline_config_from_json(const json& j) {
    PipelineConfig c;
    StrictObject o(j, "config");
    if (const auto* p = o.child("paths")) {
        StrictObject s(*p, "paths");
        s.read("audio_index", c.paths.audio_index);
        s.read("video_index", c.paths.video_index);
        s.read("thermal", c.paths.thermal);
        s.read("env", c.paths.env);
        s.read("events", c.paths.events);
        s.finish();
    }
    if (const auto* a = o.child("acoustic")) {
        StrictObject s(*a, "acoustic");
        s.read("window_len", c.acoustic.window_len);
        s.read("hop_len", c.acoustic.hop_len);
        s.read("rolloff_fraction", c.acoustic.rolloff_fraction);
        s.read("frame_s", c.acoustic.frame_s);
        s.read("frame_hop_s", c.acoustic.frame_hop_s);
        s.read("gate_strength", c.acoustic.gate_strength);
        s.read("noise_percentile", c.acoustic.noise_percentile);
        s.read("target_rms", c.acoustic.target_rms);
        s.read("normalize_rms", c.acoustic.normalize_rms);
        s.finish();
    }
    if (const auto* f = o.child("flow")) {
        StrictObject s(*f, "flow");
        s.read("pyramid_levels", c.flow.pyramid_levels);
        s.read("patch_size", c.flow.patch_size);
        s.read("patch_stride", c.flow.patch_stride);
        s.read("iterations", c.flow.iterations);
        s.read("entry_duration_s", c.flow.entry_duration_s);
        s.finish();
    }
    if (const auto* st = o.child("stats")) {
        StrictObject s(*st, "stats");
        s.read("alpha", c.stats.alpha);
        s.read("q_threshold", c.stats.q_threshold);
        std::string center(levene_name(c.stats.levene_center));
        s.read("levene_center", center);
        if (center == "mean") {
            c.stats.levene_center = stats::LeveneCenter::Mean;
        } else if (center == "median") {
            c.stats.levene_center = stats::LeveneCenter::Median;
        } else {
            throw ValidationError("stats.levene_center must be mean or median");
        }
        if (const auto* pairing = s.child("pairing")) {
            StrictObject ps(*pairing, "stats.pairing");
            if (const auto* e = ps.child("early")) {
                const auto v = read_pair(e, "stats.pairing.early");
                c.stats.pairing.early_first = v[0];
                c.stats.pairing.early_last = v[1];
            }
            if (const auto* l = ps.child("late")) {
                const auto v = read_pair(l, "stats.pairing.late");
                c.stats.pairing.late_first = v[0];
                c.stats.pairing.late_last = v[1];
            }
            ps.finish();
        }
        s.finish();
    }
    if (const auto* a = o.child("analysis")) {
        StrictObject s(*a, "analysis");
        s.read("room", c.room);
        s.finish();
    }
    if (const auto* r = o.child("report")) {
        StrictObject s(*r, "report");
        s.read("enabled", c.report);
        s.finish();
    }
    o.finish();
    c.validate();
    return c;
}

ordered_json to_json(const PipelineConfig& c) {
    ordered_json j;
    j["paths"] = {{"audio_index", c.paths.audio_index},
                  {"video_index", c.paths.video_index},
                  {"thermal", c.paths.thermal},
                  {"env", c.paths.env},
                  {"events", c.paths.events}};
    j["acoustic"] = {{"window_len", c.acoustic.window_len},
                     {"hop_len", c.acoustic.hop_len},
                     {"rolloff_fraction", c.acoustic.rolloff_fraction},
                     {"frame_s", c.acoustic.frame_s},
                     {"frame_hop_s", c.acoustic.frame_hop_s},
                     {"gate_strength", c.acoustic.gate_strength},
                     {"noise_percentile", c.acoustic.noise_percentile},
                     {"target_rms", c.acoustic.target_rms},
                     {"normalize_rms", c.acoustic.normalize_rms}};
    j["flow"] = {{"pyramid_levels", c.flow.pyramid_levels},
                 {"patch_size", c.flow.patch_size},
                 {"patch_stride", c.flow.patch_stride},
                 {"iterations", c.flow.iterations},
                 {"entry_duration_s", c.flow.entry_duration_s}};
    j["stats"] = {{"alpha", c.stats.alpha},
                  {"q_threshold", c.stats.q_threshold},
                  {"levene_center", levene_name(c.stats.levene_center)},
                  {"pairing",
                   {{"early", {c.stats.pairing.early_first, c.stats.pairing.early_last}},
                    {"late", {c.stats.pairing.late_first, c.stats.pairing.late_last}}}}};
    j["analysis"] = {{"room", c.room}};
    j["report"] = {{"enabled", c.report}};
    return j;
}

std::vector<AudioClipRef> read_audio_index(const fs::path& index) {
    const auto csv = read_csv_file(index);
    expect_header(csv, "clip_id,room,week,day,path", "audio index");
    std::vector<AudioClipRef> out;
    for (const auto& row : csv.rows) {
        if (row.fields.size() != 5) throw ParseError("audio index field count mismatch", ParseError::Unit::Row, row.line);
        out.push_back({row.fields[0], int_cell(row, 1, "room"), int_cell(row, 2, "week"), int_cell(row, 3, "day"),
                       index.parent_path() / row.fields[4]});
    }
    return out;
}

std::vector<VideoClipRef> read_video_index(const fs::path& index) {
    const auto csv = read_csv_file(index);
    expect_header(csv, "clip_id,manifest", "video index");
    std::vector<VideoClipRef> out;
    for (const auto& row : csv.rows) {
        if (row.fields.size() != 2) throw ParseError("video index field count mismatch", ParseError::Unit::Row, row.line);
        out.push_back({row.fields[0], index.parent_path() / row.fields[1]});
    }
    return out;
}

acoustic::AcousticFeatureVector audio_clip_features(const AudioClipRef& clip, const acoustic::AcousticConfig& config) {
    const auto signal = ingest::parse_wav(ingest::read_binary_file(clip.path.string()));
    const auto pre = acoustic::preprocess(signal, config.target_rms, config);
    auto v = acoustic::summarize_clip(pre.signal, config);
    v.clip_id = clip.clip_id;
    v.room = clip.room;
    v.week = clip.week;
    v.day = clip.day;
    return v;
}

std::vector<acoustic::AcousticFeatureVector> extract_audio(const std::vector<AudioClipRef>& clips,
                                                           const acoustic::AcousticConfig& config) {
    config.validate();
    std::vector<acoustic::AcousticFeatureVector> out(clips.size());
    parallel_for(clips.size(), [&](std::size_t i) { out[i] = audio_clip_features(clips[i], config); });
    return out;
}

std::string acoustic_features_to_csv(const std::vector<acoustic::AcousticFeatureVector>& features) {
    std::string out =
        "clip_id,room,week,day,spectral_centroid,spectral_bandwidth,spectral_rolloff,zcr,rms,ste,skipped_frames\n";
    for (const auto& v : features) {
        out += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", ingest::csv_escape(v.clip_id), v.room, v.week, v.day,
                           ingest::format_double(v.spectral_centroid_hz), ingest::format_double(v.spectral_bandwidth_hz),
                           ingest::format_double(v.spectral_rolloff_hz), ingest::format_double(v.zero_crossing_rate),
                           ingest::format_double(v.rms_amplitude), ingest::format_double(v.short_term_energy),
                           v.skipped_frames);
    }
    return out;
}

std::vector<acoustic::AcousticFeatureVector> acoustic_features_from_csv(std::string_view text) {
    const auto csv = ingest::parse_csv(text);
    expect_header(csv,
                  "clip_id,room,week,day,spectral_centroid,spectral_bandwidth,spectral_rolloff,zcr,rms,ste,"
                  "skipped_frames",
                  "acoustic features");
    std::vector<acoustic::AcousticFeatureVector> out;
    for (const auto& row : csv.rows) {
        if (row.fields.size() != 11) {
            throw ParseError("acoustic features field count mismatch", ParseError::Unit::Row, row.line);
        }
        acoustic::AcousticFeatureVector v;
        v.clip_id = row.fields[0];
        v.room = int_cell(row, 1, "room");
        v.week = int_cell(row, 2, "week");
        v.day = int_cell(row, 3, "day");
        v.spectral_centroid_hz = double_cell(row, 4, "spectral_centroid");
        v.spectral_bandwidth_hz = double_cell(row, 5, "spectral_bandwidth");
        v.spectral_rolloff_hz = double_cell(row, 6, "spectral_rolloff");
        v.zero_crossing_rate = double_cell(row, 7, "zcr");
        v.rms_amplitude = double_cell(row, 8, "rms");
        v.short_term_energy = double_cell(row, 9, "ste");
        v.skipped_frames = static_cast<std::size_t>(int_cell(row, 10, "skipped_frames"));
        out.push_back(std::move(v));
    }
    return out;
}

namespace {

struct MissingEntry : ValidationError {
    using ValidationError::ValidationError;
};

std::pair<double, double> entry_window(const ingest::FrameSequence& seq, const flow::FlowParams& params,
                                       const ingest::EventLog* events) {
    const auto& m = seq.manifest;
    std::optional<double> start = m.entry_start_s;
    std::optional<double> end = m.entry_end_s;
    if (!start && events && m.start_time) {
        const auto t0 = ingest::parse_timestamp(*m.start_time);
        if (!t0) throw ValidationError(fmt::format("clip '{}' start_time is not a timestamp", m.clip_id));
        for (const auto& e : events->records) {
            if (e.kind != ingest::EventKind::CaretakerEntry || e.room != m.room) continue;
            const double offset = static_cast<double>((e.timestamp - *t0).count());
            if (offset > 0.0 && offset < seq.duration_s()) {
                start = offset;
                break;
            }
        }
    }
    if (!start) throw MissingEntry(fmt::format("clip '{}' has no caretaker entry time", m.clip_id));
    return {*start, end.value_or(*start + params.entry_duration_s)};
}

}  // namespace

FlowClipResult flow_clip(const fs::path& manifest, const flow::FlowParams& params, const ingest::EventLog* events,
                         bool parallel_pairs) {
    params.validate();
    const auto seq = ingest::load_frame_sequence(manifest.string());
    const auto [entry_start, entry_end] = entry_window(seq, params, events);
    const auto seg = flow::segment_clip(seq.duration_s(), entry_start, entry_end);
    const auto series = flow::motion_series(seq, params, parallel_pairs);
    FlowClipResult r;
    r.intensity = {series.clip_id, series.room, series.week, series.day, flow::condition_intensity(series, seg)};
    r.segmentation = seg;
    r.pairs = series.values.size();
    return r;
}

FlowExtraction extract_flow(const std::vector<VideoClipRef>& clips, const flow::FlowParams& params,
                            const ingest::EventLog* events) {
    params.validate();
    std::vector<std::optional<FlowClipResult>> results(clips.size());
    std::vector<std::string> skipped(clips.size());
    parallel_for(clips.size(), [&](std::size_t i) {
        try {
            results[i] = flow_clip(clips[i].manifest, params, events, false);
        } catch (const MissingEntry& e) {
            skipped[i] = fmt::format("{} skipped", e.what());
        }
    });
    FlowExtraction out;
    for (std::size_t i = 0; i < clips.size(); ++i) {
        if (results[i]) {
            out.clips.push_back(std::move(*results[i]));
        } else {
            out.warnings.push_back(std::move(skipped[i]));
        }
    }
    return out;
}

std::string flow_intensities_to_csv(const std::vector<FlowClipResult>& clips) {
    std::string out = "clip_id,room,week,day,before,during,after,entry_start_s,entry_end_s,pairs\n";
    for (const auto& c : clips) {
        const auto& v = c.intensity;
        out += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", ingest::csv_escape(v.clip_id), v.room, v.week, v.day,
                           ingest::format_double(v.values.before), ingest::format_double(v.values.during),
                           ingest::format_double(v.values.after), ingest::format_double(c.segmentation.during.start),
                           ingest::format_double(c.segmentation.during.end), c.pairs);
    }
    return out;
}

std::vector<aggregate::ClipIntensity> flow_intensities_from_csv(std::string_view text) {
    const auto csv = ingest::parse_csv(text);
    expect_header(csv, "clip_id,room,week,day,before,during,after,entry_start_s,entry_end_s,pairs", "flow intensity");
    std::vector<aggregate::ClipIntensity> out;
    for (const auto& row : csv.rows) {
        if (row.fields.size() != 10) throw ParseError("flow intensity field count mismatch", ParseError::Unit::Row, row.line);
        out.push_back({row.fields[0],
                       int_cell(row, 1, "room"),
                       int_cell(row, 2, "week"),
                       int_cell(row, 3, "day"),
                       {double_cell(row, 4, "before"), double_cell(row, 5, "during"), double_cell(row, 6, "after")}});
    }
    return out;
}

Dataset load_dataset(const fs::path& root, const PipelineConfig& config) {
    config.validate();
    if (!fs::is_directory(root)) throw IoError("input directory not found: " + root.string());
    Dataset d;
    auto locate = [&](const std::string& rel, std::string_view what) -> std::optional<fs::path> {
        const fs::path p = root / rel;
        if (fs::exists(p)) return p;
        d.warnings.push_back(fmt::format("no {} at {}", what, p.string()));
        return std::nullopt;
    };
    if (const auto p = locate(config.paths.events, "event log")) {
        d.events = ingest::parse_event_log(ingest::read_text_file(p->string()));
        for (const auto& w : d.events.warnings) d.warnings.push_back(w);
    }
    if (const auto p = locate(config.paths.thermal, "thermal table")) {
        d.thermal = ingest::parse_thermal_csv(ingest::read_text_file(p->string()));
    }
    if (const auto p = locate(config.paths.env, "environment table")) {
        d.env = ingest::parse_env_csv(ingest::read_text_file(p->string()));
    }
    if (const auto p = locate(config.paths.audio_index, "audio index")) {
        d.acoustic = extract_audio(read_audio_index(*p), config.acoustic);
    }
    if (const auto p = locate(config.paths.video_index, "video index")) {
        auto flow = extract_flow(read_video_index(*p), config.flow, &d.events);
        d.flow = std::move(flow.clips);
        for (auto& w : flow.warnings) d.warnings.push_back(std::move(w));
    }
    return d;
}

ordered_json weekly_tests(const aggregate::WeekGroups& groups, const PipelineConfig::Stats& options) {
    ordered_json j;
    aggregate::WeekGroups usable;
    std::vector<int> dropped;
    for (std::size_t i = 0; i < groups.weeks.size(); ++i) {
        if (groups.groups[i].size() >= 2) {
            usable.weeks.push_back(groups.weeks[i]);
            usable.groups.push_back(groups.groups[i]);
        } else {
            dropped.push_back(groups.weeks[i]);
        }
    }
    j["weeks"] = usable.weeks;
    j["weeks_dropped_single_observation"] = dropped;
    const auto labels = usable.labels();
    auto attempt = [&](const char* key, auto&& fn) {
        try {
            j[key] = fn();
        } catch (const ValidationError& e) {
            j[key] = {{"error", e.what()}};
        }
    };
    attempt("anova", [&] { return stats::to_json(stats::anova_oneway(usable.groups), labels); });
    attempt("tukey", [&] {
        const auto cmp = stats::tukey_hsd(usable.groups, options.alpha, labels);
        const auto significant = std::count_if(cmp.begin(), cmp.end(), [](const auto& c) { return c.significant; });
        ordered_json t;
        t["comparisons"] = cmp.size();
        t["significant"] = significant;
        t["pairs"] = stats::to_json(cmp);
        return t;
    });
    attempt("shapiro_wilk_residuals", [&] {
        std::vector<double> residuals;
        for (const auto& g : usable.groups) {
            const double m = stats::mean(g);
            for (double x : g) residuals.push_back(x - m);
        }
        return stats::to_json(stats::shapiro_wilk(residuals));
    });
    attempt("levene", [&] { return stats::to_json(stats::levene(usable.groups, options.levene_center), labels); });
    attempt("kruskal_wallis", [&] { return stats::to_json(stats::kruskal_wallis(usable.groups), labels); });
    return j;
}

ordered_json all_weekly_tests(const std::vector<acoustic::AcousticFeatureVector>& acoustic,
                              const std::vector<ingest::ThermalRecord>& thermal,
                              const std::vector<aggregate::ClipIntensity>& flow, const PipelineConfig& config) {
    ordered_json j;
    j["alpha"] = config.stats.alpha;
    j["levene_center"] = levene_name(config.stats.levene_center);
    j["room"] = config.room;
    ordered_json a = ordered_json::object();
    if (!acoustic.empty()) {
        for (auto f : aggregate::kAcousticFeatures) {
            a[std::string(f)] = weekly_tests(aggregate::acoustic_groups(acoustic, f, config.room), config.stats);
        }
    }
    j["acoustic"] = a;
    ordered_json t = ordered_json::object();
    if (!thermal.empty()) {
        t["head_temp_mean"] = weekly_tests(aggregate::thermal_groups(thermal, ingest::Region::Head, config.room), config.stats);
        t["foot_temp_mean"] = weekly_tests(aggregate::thermal_groups(thermal, ingest::Region::Foot, config.room), config.stats);
    }
    j["thermal"] = t;
    ordered_json fl = ordered_json::object();
    if (!flow.empty()) {
        for (const char* cond : {"flow_before", "flow_during", "flow_after"}) {
            std::map<int, std::vector<double>> by_week;
            for (const auto& c : flow) {
                if (c.room != config.room || c.week < aggregate::kFirstVideoWeek) continue;
                const double v = cond[5] == 'b' ? c.values.before : (cond[5] == 'd' ? c.values.during : c.values.after);
                by_week[c.week].push_back(v);
            }
            aggregate::WeekGroups g;
            for (auto& [w, v] : by_week) {
                g.weeks.push_back(w);
                g.groups.push_back(std::move(v));
            }
            fl[cond] = weekly_tests(g, config.stats);
        }
    }
    j["flow"] = fl;
    return j;
}

AnalysisResults analyze(const Dataset& data, const PipelineConfig& config) {
    config.validate();
    AnalysisResults r;
    r.warnings = data.warnings;
    r.thermal = aggregate::weekly_thermal(data.thermal);
    r.acoustic = aggregate::weekly_acoustic(data.acoustic);
    std::vector<aggregate::ClipIntensity> clips;
    for (const auto& c : data.flow) clips.push_back(c.intensity);
    r.flow = aggregate::weekly_flow(clips);
    r.env = aggregate::weekly_env(data.env);
    for (const auto& w : r.flow.warnings) r.warnings.push_back(w);
    for (const auto* part : {&r.thermal.summaries, &r.acoustic, &r.flow.summaries, &r.env.summaries}) {
        r.summaries.insert(r.summaries.end(), part->begin(), part->end());
    }
    std::vector<aggregate::WeeklySummary> non_env;
    std::copy_if(r.summaries.begin(), r.summaries.end(), std::back_inserter(non_env),
                 [](const auto& s) { return s.modality != aggregate::Modality::Env; });
    r.table = aggregate::build_feature_table(non_env, data.env, config.room);
    for (const auto& w : r.table.warnings) r.warnings.push_back(w);
    r.correlations = aggregate::correlate_all(r.table, config.stats.q_threshold);
    try {
        r.contrast = aggregate::early_late_contrast(aggregate::flow_condition_means(r.flow.summaries, config.room),
                                                    config.stats.pairing);
    } catch (const ValidationError& e) {
        r.contrast_error = e.what();
        r.warnings.push_back(fmt::format("contrast unavailable: {}", e.what()));
    }
    r.panels = aggregate::trajectory_panel(r.table);
    for (const auto& w : r.panels.warnings) r.warnings.push_back(w);
    r.tests = all_weekly_tests(data.acoustic, data.thermal, clips, config);
    return r;
}

std::vector<Artifact> pipeline_artifacts(const Dataset& data, const AnalysisResults& r, const PipelineConfig& config) {
    std::vector<Artifact> out;
    out.push_back({"acoustic_features.csv", acoustic_features_to_csv(data.acoustic),
                   fmt::format("{} audio clips", data.acoustic.size())});
    out.push_back({"flow_intensity.csv", flow_intensities_to_csv(data.flow), fmt::format("{} video clips", data.flow.size())});
    out.push_back({"weekly_summaries.csv", aggregate::summaries_to_csv(r.summaries),
                   fmt::format("{} weekly summaries, {} thermal records excluded", r.summaries.size(), r.thermal.excluded)});
    out.push_back({"feature_table.csv", aggregate::feature_table_to_csv(r.table),
                   fmt::format("{} weeks x {} features, {} missing cells", r.table.weeks.size(), r.table.columns.size(),
                               r.table.missing_cells())});
    const auto significant = std::count_if(r.correlations.entries.begin(), r.correlations.entries.end(),
                                           [](const auto& e) { return e.significant; });
    out.push_back({"correlations.csv", aggregate::correlations_to_csv(r.correlations),
                   fmt::format("{} pairs, FDR family {}, {} significant at q < {}", r.correlations.entries.size(),
                               r.correlations.family_size, significant, config.stats.q_threshold)});
    ordered_json contrast = r.contrast ? aggregate::to_json(*r.contrast) : ordered_json{{"error", *r.contrast_error}};
    out.push_back({"contrast.json", contrast.dump(2) + "\n",
                   r.contrast ? fmt::format("early vs late t = {:.3f}, p = {:.3g}", r.contrast->early_vs_late.statistic,
                                            r.contrast->early_vs_late.p_value)
                              : fmt::format("unavailable: {}", *r.contrast_error)});
    out.push_back({"stats.json", r.tests.dump(2) + "\n", "weekly ANOVA, Tukey, Shapiro-Wilk, Levene, Kruskal-Wallis"});
    if (config.report) {
        for (auto& plot : report::emit_report(r.summaries, r.panels, r.correlations, config.room)) {
            out.push_back({plot.name + ".csv", plot.csv, "plot data"});
            out.push_back({plot.name + ".svg", plot.svg, plot.summary});
        }
    }
    ordered_json run;
    run["config"] = to_json(config);
    run["counts"] = {{"audio_clips", data.acoustic.size()},
                     {"video_clips", data.flow.size()},
                     {"thermal_records", data.thermal.size()},
                     {"env_records", data.env.size()},
                     {"events", data.events.records.size()}};
    run["warnings"] = r.warnings;
    out.push_back({"run_summary.json", run.dump(2) + "\n", fmt::format("{} warnings", r.warnings.size())});
    return out;
}

std::vector<std::string> write_artifacts(const fs::path& out_dir, const std::vector<Artifact>& artifacts) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec || !fs::is_directory(out_dir)) throw IoError("cannot create output directory " + out_dir.string());
    std::vector<std::string> lines;
    for (const auto& a : artifacts) {
        ingest::write_text_file((out_dir / a.name).string(), a.content);
        lines.push_back(fmt::format("{}: {}", (out_dir / a.name).string(), a.summary));
    }
    return lines;
}

}  // namespace aviary::cli

#include "aviary/cli/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "aviary/cli/pipeline.hpp"
#include "aviary/error.hpp"
#include "aviary/ingest/csv.hpp"
#include "aviary/report/report.hpp"
#include "aviary/stats/report_json.hpp"
#include "aviary/synth/synth.hpp"

namespace aviary::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

json read_json_file(const std::string& path) {
    const auto text = ingest::read_text_file(path);
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(fmt::format("{}: invalid JSON: {}", path, e.what()));
    }
}

// Config-backed options: each flag is applied only when given on the command line.
struct PipelineFlags {
    std::string config;
    double alpha = 0.0;
    double q = 0.0;
    int room = 0;
    std::string levene;
    std::vector<int> early;
    std::vector<int> late;
    int window = 0;
    int hop = 0;
    double rolloff = 0.0;
    double gate = 0.0;
    double target_rms = 0.0;
    bool no_normalize = false;
    int levels = 0;
    int patch = 0;
    int iterations = 0;
    double entry_duration = 0.0;
    bool no_report = false;

    std::map<std::string, CLI::Option*> opts;

    void add_stats(CLI::App* app) {
        opts["alpha"] = app->add_option("--alpha", alpha, "Significance level for per-test decisions");
        opts["q"] = app->add_option("--q", q, "FDR threshold");
        opts["room"] = app->add_option("--room", room, "Room analysed");
        opts["levene"] = app->add_option("--levene-center", levene, "mean or median")->check(CLI::IsMember({"mean", "median"}));
        opts["early"] = app->add_option("--early", early, "Early weeks as FIRST,LAST")->delimiter(',')->expected(2);
        opts["late"] = app->add_option("--late", late, "Late weeks as FIRST,LAST")->delimiter(',')->expected(2);
    }
    void add_acoustic(CLI::App* app) {
        opts["window"] = app->add_option("--window", window, "STFT window length");
        opts["hop"] = app->add_option("--hop", hop, "STFT hop length");
        opts["rolloff"] = app->add_option("--rolloff", rolloff, "Spectral rolloff fraction");
        opts["gate"] = app->add_option("--gate", gate, "Spectral gate strength, 0 disables");
        opts["target_rms"] = app->add_option("--target-rms", target_rms, "RMS after normalization");
        opts["no_normalize"] = app->add_flag("--no-normalize", no_normalize, "Keep the recorded level");
    }
    void add_flow(CLI::App* app) {
        opts["levels"] = app->add_option("--levels", levels, "Flow pyramid levels");
        opts["patch"] = app->add_option("--patch", patch, "Flow patch size");
        opts["iterations"] = app->add_option("--iterations", iterations, "Flow iterations per level");
        opts["entry_duration"] = app->add_option("--entry-duration", entry_duration, "Entry length when only its start is known (s)");
    }
    void add_report(CLI::App* app) { opts["no_report"] = app->add_flag("--no-report", no_report, "Skip plots"); }
    void add_config(CLI::App* app) { app->add_option("--config", config, "JSON config file"); }

    bool given(const std::string& key) const {
        const auto it = opts.find(key);
        return it != opts.end() && it->second->count() > 0;
    }

    PipelineConfig resolve() const {
        PipelineConfig c = config.empty() ? PipelineConfig{} : pipeline_config_from_json(read_json_file(config));
        if (given("alpha")) c.stats.alpha = alpha;
        if (given("q")) c.stats.q_threshold = q;
        if (given("room")) c.room = room;
        if (given("levene")) c.stats.levene_center = levene == "mean" ? stats::LeveneCenter::Mean : stats::LeveneCenter::Median;
        if (given("early")) {
            c.stats.pairing.early_first = early[0];
            c.stats.pairing.early_last = early[1];
        }
        if (given("late")) {
            c.stats.pairing.late_first = late[0];
            c.stats.pairing.late_last = late[1];
        }
        if (given("window")) c.acoustic.window_len = window;
        if (given("hop")) c.acoustic.hop_len = hop;
        if (given("rolloff")) c.acoustic.rolloff_fraction = rolloff;
        if (given("gate")) c.acoustic.gate_strength = gate;
        if (given("target_rms")) c.acoustic.target_rms = target_rms;
        if (given("no_normalize")) c.acoustic.normalize_rms = false;
        if (given("levels")) c.flow.pyramid_levels = levels;
        if (given("patch")) c.flow.patch_size = patch;
        if (given("iterations")) c.flow.iterations = iterations;
        if (given("entry_duration")) c.flow.entry_duration_s = entry_duration;
        if (given("no_report")) c.report = false;
        c.validate();
        return c;
    }
};

void emit(std::ostream& out, const fs::path& path, std::string_view content, std::string_view summary) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    ingest::write_text_file(path.string(), content);
    out << path.string() << ": " << summary << '\n';
}

void print_warnings(std::ostream& err, const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) err << "warning: " << w << '\n';
}

// Rows grouped by an integer column, optionally filtered by column=value.
aggregate::WeekGroups groups_from_csv(const std::string& path, const std::string& group_col, const std::string& value_col,
                                      const std::vector<std::string>& where) {
    const auto csv = ingest::parse_csv(ingest::read_text_file(path));
    auto column = [&](const std::string& name) {
        const auto it = std::find(csv.header.begin(), csv.header.end(), name);
        if (it == csv.header.end()) throw ValidationError(fmt::format("{}: no column '{}'", path, name));
        return static_cast<std::size_t>(it - csv.header.begin());
    };
    const auto g = column(group_col);
    const auto v = column(value_col);
    std::vector<std::pair<std::size_t, std::string>> filters;
    for (const auto& w : where) {
        const auto eq = w.find('=');
        if (eq == std::string::npos) throw ValidationError(fmt::format("--where '{}' must be COLUMN=VALUE", w));
        filters.emplace_back(column(w.substr(0, eq)), w.substr(eq + 1));
    }
    std::map<int, std::vector<double>> by_group;
    for (const auto& row : csv.rows) {
        if (row.fields.size() != csv.header.size()) {
            throw ParseError("field count mismatch", ParseError::Unit::Row, row.line);
        }
        if (!std::all_of(filters.begin(), filters.end(), [&](const auto& f) { return row.fields[f.first] == f.second; })) {
            continue;
        }
        const auto key = ingest::parse_integer(row.fields[g]);
        const auto value = ingest::parse_double(row.fields[v]);
        if (!key) throw ParseError(fmt::format("unparsable {}", group_col), ParseError::Unit::Row, row.line);
        if (!value) throw ParseError(fmt::format("unparsable {}", value_col), ParseError::Unit::Row, row.line);
        by_group[static_cast<int>(*key)].push_back(*value);
    }
    aggregate::WeekGroups out;
    for (auto& [k, values] : by_group) {
        out.weeks.push_back(static_cast<int>(k));
        out.groups.push_back(std::move(values));
    }
    if (out.weeks.empty()) throw ValidationError(fmt::format("{}: no rows match", path));
    return out;
}

std::vector<std::string> directory_summary(const fs::path& dir) {
    std::vector<fs::path> entries;
    for (const auto& e : fs::directory_iterator(dir)) entries.push_back(e.path());
    std::sort(entries.begin(), entries.end());
    std::vector<std::string> lines;
    for (const auto& p : entries) {
        if (fs::is_directory(p)) {
            std::size_t files = 0;
            for (const auto& e : fs::recursive_directory_iterator(p)) files += e.is_regular_file() ? 1 : 0;
            lines.push_back(fmt::format("{}/: {} files", p.string(), files));
        } else {
            lines.push_back(fmt::format("{}: {} bytes", p.string(), fs::file_size(p)));
        }
    }
    return lines;
}

}  // namespace

int run_subcommand(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Weekly acoustic, thermal, optical-flow and environment analysis"};
    app.name("aviary-sense");
    app.require_subcommand(1);

    std::function<void()> action;

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset with planted trends");
    std::string synth_config, synth_out;
    std::uint64_t seed = 0;
    synth->add_option("--config", synth_config, "Synthesis config JSON");
    synth->add_option("--out", synth_out, "Output directory")->required();
    auto* seed_opt = synth->add_option("--seed", seed, "Random seed");
    synth->callback([&] {
        action = [&] {
            auto cfg = synth_config.empty() ? synth::SynthConfig::defaults()
                                            : synth::synth_config_from_json(read_json_file(synth_config));
            if (seed_opt->count()) cfg.seed = seed;
            cfg.validate();
            const auto truth = synth::generate_dataset(cfg, synth_out);
            for (const auto& line : directory_summary(synth_out)) out << line << '\n';
            out << fmt::format("{}: seed {}, weeks {}-{}, {} couplings\n", (fs::path(synth_out) / "ground_truth.json").string(),
                               truth.seed, truth.weeks.front(), truth.weeks.back(), truth.couplings.size());
        };
    });

    // features
    auto* features = app.add_subcommand("features", "Per-clip or weekly features for one modality");
    features->require_subcommand(1);
    auto* f_audio = features->add_subcommand("audio", "Acoustic features per clip");
    PipelineFlags audio_flags;
    std::string audio_index, audio_out = "acoustic_features.csv";
    audio_flags.add_config(f_audio);
    audio_flags.add_acoustic(f_audio);
    f_audio->add_option("--index", audio_index, "Clip index CSV: clip_id,room,week,day,path")->required();
    f_audio->add_option("--out", audio_out, "Output CSV");
    f_audio->callback([&] {
        action = [&] {
            const auto cfg = audio_flags.resolve();
            const auto features = extract_audio(read_audio_index(audio_index), cfg.acoustic);
            emit(out, audio_out, acoustic_features_to_csv(features), fmt::format("{} clips", features.size()));
        };
    });

    auto* f_thermal = features->add_subcommand("thermal", "Weekly head and foot temperature summaries");
    std::string thermal_in, thermal_out = "thermal_weekly.csv";
    f_thermal->add_option("--in", thermal_in, "Thermal CSV")->required();
    f_thermal->add_option("--out", thermal_out, "Output CSV");
    f_thermal->callback([&] {
        action = [&] {
            const auto agg = aggregate::weekly_thermal(ingest::parse_thermal_csv(ingest::read_text_file(thermal_in)));
            emit(out, thermal_out, aggregate::summaries_to_csv(agg.summaries),
                 fmt::format("{} weekly summaries, {} records excluded", agg.summaries.size(), agg.excluded));
        };
    });

    auto* f_env = features->add_subcommand("env", "Weekly ambient temperature and humidity summaries");
    std::string env_in, env_out = "env_weekly.csv";
    f_env->add_option("--in", env_in, "Environment CSV")->required();
    f_env->add_option("--out", env_out, "Output CSV");
    f_env->callback([&] {
        action = [&] {
            const auto agg = aggregate::weekly_env(ingest::parse_env_csv(ingest::read_text_file(env_in)));
            print_warnings(err, agg.warnings);
            emit(out, env_out, aggregate::summaries_to_csv(agg.summaries),
                 fmt::format("{} weekly summaries", agg.summaries.size()));
        };
    });

    // flow
    auto* flow_cmd = app.add_subcommand("flow", "Before/during/after optical-flow intensity per clip");
    PipelineFlags flow_flags;
    std::vector<std::string> frames;
    std::string video_index, events_path, flow_out = "flow_intensity.csv";
    flow_flags.add_config(flow_cmd);
    flow_flags.add_flow(flow_cmd);
    flow_cmd->add_option("--frames", frames, "Frame manifest JSON (repeatable)");
    flow_cmd->add_option("--index", video_index, "Clip index CSV: clip_id,manifest");
    flow_cmd->add_option("--events", events_path, "Event log supplying caretaker entry times");
    flow_cmd->add_option("--out", flow_out, "Output CSV");
    flow_cmd->callback([&] {
        action = [&] {
            const auto cfg = flow_flags.resolve();
            std::vector<VideoClipRef> clips;
            for (const auto& f : frames) clips.push_back({fs::path(f).stem().string(), f});
            if (!video_index.empty()) {
                const auto indexed = read_video_index(video_index);
                clips.insert(clips.end(), indexed.begin(), indexed.end());
            }
            if (clips.empty()) throw ValidationError("flow needs --frames or --index");
            std::optional<ingest::EventLog> events;
            if (!events_path.empty()) events = ingest::parse_event_log(ingest::read_text_file(events_path));
            const auto result = extract_flow(clips, cfg.flow, events ? &*events : nullptr);
            print_warnings(err, result.warnings);
            emit(out, flow_out, flow_intensities_to_csv(result.clips),
                 fmt::format("{} clips, {} skipped", result.clips.size(), result.warnings.size()));
        };
    });

    // aggregate
    auto* agg_cmd = app.add_subcommand("aggregate", "Weekly summaries and the weekly feature table");
    std::string agg_acoustic, agg_flow, agg_thermal, agg_env, agg_out = ".";
    int agg_room = 1;
    agg_cmd->add_option("--acoustic", agg_acoustic, "Per-clip acoustic features CSV");
    agg_cmd->add_option("--flow", agg_flow, "Per-clip flow intensity CSV");
    agg_cmd->add_option("--thermal", agg_thermal, "Thermal CSV");
    agg_cmd->add_option("--env", agg_env, "Environment CSV");
    agg_cmd->add_option("--room", agg_room, "Room for the feature table");
    agg_cmd->add_option("--out", agg_out, "Output directory");
    agg_cmd->callback([&] {
        action = [&] {
            std::vector<aggregate::WeeklySummary> summaries;
            std::vector<ingest::EnvRecord> env;
            std::vector<std::string> warnings;
            if (!agg_thermal.empty()) {
                const auto t = aggregate::weekly_thermal(ingest::parse_thermal_csv(ingest::read_text_file(agg_thermal)));
                summaries.insert(summaries.end(), t.summaries.begin(), t.summaries.end());
            }
            if (!agg_acoustic.empty()) {
                const auto a = aggregate::weekly_acoustic(acoustic_features_from_csv(ingest::read_text_file(agg_acoustic)));
                summaries.insert(summaries.end(), a.begin(), a.end());
            }
            if (!agg_flow.empty()) {
                const auto f = aggregate::weekly_flow(flow_intensities_from_csv(ingest::read_text_file(agg_flow)));
                summaries.insert(summaries.end(), f.summaries.begin(), f.summaries.end());
                warnings.insert(warnings.end(), f.warnings.begin(), f.warnings.end());
            }
            if (!agg_env.empty()) env = ingest::parse_env_csv(ingest::read_text_file(agg_env));
            const auto table = aggregate::build_feature_table(summaries, env, agg_room);
            if (!env.empty()) {
                const auto e = aggregate::weekly_env(env);
                summaries.insert(summaries.end(), e.summaries.begin(), e.summaries.end());
                warnings.insert(warnings.end(), e.warnings.begin(), e.warnings.end());
            }
            warnings.insert(warnings.end(), table.warnings.begin(), table.warnings.end());
            print_warnings(err, warnings);
            emit(out, fs::path(agg_out) / "weekly_summaries.csv", aggregate::summaries_to_csv(summaries),
                 fmt::format("{} weekly summaries", summaries.size()));
            emit(out, fs::path(agg_out) / "feature_table.csv", aggregate::feature_table_to_csv(table),
                 fmt::format("{} weeks x {} features, {} missing cells", table.weeks.size(), table.columns.size(),
                             table.missing_cells()));
        };
    });

    // stats
    auto* stats_cmd = app.add_subcommand("stats", "Statistical tests");
    stats_cmd->require_subcommand(1);

    std::string g_input, g_group = "week", g_value, g_out;
    std::vector<std::string> g_where;
    PipelineFlags g_flags;
    auto add_group_opts = [&](CLI::App* sub) {
        sub->add_option("--input", g_input, "CSV with one observation per row")->required();
        sub->add_option("--value", g_value, "Value column")->required();
        sub->add_option("--group", g_group, "Integer grouping column");
        sub->add_option("--where", g_where, "Row filter COLUMN=VALUE (repeatable)");
    };
    auto* anova_cmd = stats_cmd->add_subcommand("anova", "One-way ANOVA across groups");
    add_group_opts(anova_cmd);
    anova_cmd->add_option("--out", g_out, "Output JSON")->default_str("anova.json");
    anova_cmd->callback([&] {
        action = [&] {
            const auto groups = groups_from_csv(g_input, g_group, g_value, g_where);
            const auto r = stats::anova_oneway(groups.groups);
            emit(out, g_out.empty() ? "anova.json" : g_out, stats::to_json(r, groups.labels()).dump(2) + "\n",
                 fmt::format("F = {:.4f}, p = {:.4g}, eta^2 = {:.4f}", r.f_stat, r.p_value, r.eta_squared));
        };
    });
    auto* tests_cmd = stats_cmd->add_subcommand("tests", "ANOVA, Tukey, Shapiro-Wilk, Levene and Kruskal-Wallis");
    add_group_opts(tests_cmd);
    g_flags.add_config(tests_cmd);
    g_flags.add_stats(tests_cmd);
    tests_cmd->add_option("--out", g_out, "Output JSON")->default_str("tests.json");
    tests_cmd->callback([&] {
        action = [&] {
            const auto cfg = g_flags.resolve();
            const auto groups = groups_from_csv(g_input, g_group, g_value, g_where);
            emit(out, g_out.empty() ? "tests.json" : g_out, weekly_tests(groups, cfg.stats).dump(2) + "\n",
                 fmt::format("{} groups", groups.weeks.size()));
        };
    });

    auto* corr_cmd = stats_cmd->add_subcommand("correlate", "Pearson r for every feature pair with FDR adjustment");
    std::string corr_table, corr_out = "correlations.csv";
    double corr_q = 0.05;
    corr_cmd->add_option("--table", corr_table, "Weekly feature table CSV")->required();
    corr_cmd->add_option("--q", corr_q, "FDR threshold")->check(CLI::Range(0.0, 1.0));
    corr_cmd->add_option("--out", corr_out, "Output CSV");
    corr_cmd->callback([&] {
        action = [&] {
            if (!(corr_q > 0.0)) throw ValidationError("--q must lie in (0, 1]");
            const auto table = aggregate::feature_table_from_csv(ingest::read_text_file(corr_table));
            const auto report = aggregate::correlate_all(table, corr_q);
            const auto sig = std::count_if(report.entries.begin(), report.entries.end(), [](const auto& e) { return e.significant; });
            emit(out, corr_out, aggregate::correlations_to_csv(report),
                 fmt::format("{} pairs, FDR family {}, {} significant", report.entries.size(), report.family_size, sig));
        };
    });

    auto* contrast_cmd = stats_cmd->add_subcommand("contrast", "Early versus late flow response");
    PipelineFlags c_flags;
    std::string contrast_summaries, contrast_out = "contrast.json";
    c_flags.add_config(contrast_cmd);
    c_flags.add_stats(contrast_cmd);
    contrast_cmd->add_option("--summaries", contrast_summaries, "Weekly summaries CSV")->required();
    contrast_cmd->add_option("--out", contrast_out, "Output JSON");
    contrast_cmd->callback([&] {
        action = [&] {
            const auto cfg = c_flags.resolve();
            const auto summaries = aggregate::summaries_from_csv(ingest::read_text_file(contrast_summaries));
            const auto r = aggregate::early_late_contrast(aggregate::flow_condition_means(summaries, cfg.room),
                                                          cfg.stats.pairing);
            emit(out, contrast_out, aggregate::to_json(r).dump(2) + "\n",
                 fmt::format("t = {:.4f}, p = {:.4g}", r.early_vs_late.statistic, r.early_vs_late.p_value));
        };
    });

    // report
    auto* report_cmd = app.add_subcommand("report", "SVG plots with their backing CSVs");
    std::string rep_summaries, rep_table, rep_corr, rep_out = "report", rep_regen;
    int rep_room = 1;
    double rep_q = 0.05;
    report_cmd->add_option("--summaries", rep_summaries, "Weekly summaries CSV");
    report_cmd->add_option("--table", rep_table, "Weekly feature table CSV");
    report_cmd->add_option("--correlations", rep_corr, "Correlations CSV; computed from --table when absent");
    report_cmd->add_option("--q", rep_q, "FDR threshold when correlations are computed");
    report_cmd->add_option("--room", rep_room, "Room plotted");
    report_cmd->add_option("--out", rep_out, "Output directory");
    report_cmd->add_option("--regenerate", rep_regen, "Re-render every plot SVG in a directory from its CSV");
    report_cmd->callback([&] {
        action = [&] {
            if (!rep_regen.empty()) {
                std::size_t n = 0;
                for (const auto& name : report::plot_names()) {
                    const fs::path csv = fs::path(rep_regen) / (name + ".csv");
                    if (!fs::exists(csv)) continue;
                    emit(out, fs::path(rep_regen) / (name + ".svg"), report::render_plot(name, ingest::read_text_file(csv.string())),
                         "regenerated");
                    ++n;
                }
                if (n == 0) throw ValidationError("empty results");
                return;
            }
            std::vector<aggregate::WeeklySummary> summaries;
            if (!rep_summaries.empty()) summaries = aggregate::summaries_from_csv(ingest::read_text_file(rep_summaries));
            aggregate::TrajectoryPanels panels;
            aggregate::CorrelationReport corr;
            if (!rep_table.empty()) {
                const auto table = aggregate::feature_table_from_csv(ingest::read_text_file(rep_table));
                panels = aggregate::trajectory_panel(table);
                print_warnings(err, panels.warnings);
                if (rep_corr.empty()) corr = aggregate::correlate_all(table, rep_q);
            }
            if (!rep_corr.empty()) corr = aggregate::correlations_from_csv(ingest::read_text_file(rep_corr), rep_q);
            for (const auto& plot : report::emit_report(summaries, panels, corr, rep_room)) {
                emit(out, fs::path(rep_out) / (plot.name + ".csv"), plot.csv, "plot data");
                emit(out, fs::path(rep_out) / (plot.name + ".svg"), plot.svg, plot.summary);
            }
        };
    });

    // pipeline
    auto* pipe_cmd = app.add_subcommand("pipeline", "End-to-end run over a dataset directory");
    PipelineFlags p_flags;
    std::string pipe_in, pipe_out;
    p_flags.add_config(pipe_cmd);
    p_flags.add_stats(pipe_cmd);
    p_flags.add_acoustic(pipe_cmd);
    p_flags.add_flow(pipe_cmd);
    p_flags.add_report(pipe_cmd);
    pipe_cmd->add_option("--in", pipe_in, "Dataset directory")->required();
    pipe_cmd->add_option("--out", pipe_out, "Results directory")->required();
    pipe_cmd->callback([&] {
        action = [&] {
            const auto cfg = p_flags.resolve();
            const auto data = load_dataset(pipe_in, cfg);
            const auto results = analyze(data, cfg);
            print_warnings(err, results.warnings);
            for (const auto& line : write_artifacts(pipe_out, pipeline_artifacts(data, results, cfg))) out << line << '\n';
        };
    });

    std::vector<const char*> argv{"aviary-sense"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitValidation;
    }
    try {
        if (action) action();
        return kExitOk;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    }
}

}  // namespace aviary::cli

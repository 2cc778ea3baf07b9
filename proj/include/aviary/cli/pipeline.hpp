#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "aviary/acoustic/features.hpp"
#include "aviary/aggregate/aggregate.hpp"
#include "aviary/flow/flow.hpp"
#include "aviary/ingest/records.hpp"
#include "aviary/stats/tests.hpp"
#include "json.hpp"

namespace aviary::cli {

struct PipelineConfig {
    // Relative paths resolve against the dataset directory.
    struct Paths {
        std::string audio_index = "audio/clips.csv";
        std::string video_index = "video/clips.csv";
        std::string thermal = "thermal.csv";
        std::string env = "env.csv";
        std::string events = "events.csv";
    } paths;
    acoustic::AcousticConfig acoustic;
    flow::FlowParams flow;
    struct Stats {
        double alpha = 0.05;
        double q_threshold = 0.05;
        stats::LeveneCenter levene_center = stats::LeveneCenter::Mean;
        aggregate::PhaseRule pairing;
    } stats;
    int room = 1;
    bool report = true;

    // Throws ValidationError naming the offending field.
    void validate() const;
};

// Strict JSON: unknown keys are rejected; absent keys keep their defaults.
PipelineConfig pipeline_config_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const PipelineConfig& config);

struct AudioClipRef {
    std::string clip_id;
    int room = 0;
    int week = 0;
    int day = 0;
    std::filesystem::path path;
};

struct VideoClipRef {
    std::string clip_id;
    std::filesystem::path manifest;
};

// Index layouts: clip_id,room,week,day,path and clip_id,manifest. Paths are
// relative to the index file.
std::vector<AudioClipRef> read_audio_index(const std::filesystem::path& index);
std::vector<VideoClipRef> read_video_index(const std::filesystem::path& index);

// Parse, preprocess and summarize each clip; clips run in parallel, output
// follows the index.
acoustic::AcousticFeatureVector audio_clip_features(const AudioClipRef& clip, const acoustic::AcousticConfig& config);
std::vector<acoustic::AcousticFeatureVector> extract_audio(const std::vector<AudioClipRef>& clips,
                                                           const acoustic::AcousticConfig& config);

std::string acoustic_features_to_csv(const std::vector<acoustic::AcousticFeatureVector>& features);
std::vector<acoustic::AcousticFeatureVector> acoustic_features_from_csv(std::string_view text);

struct FlowClipResult {
    aggregate::ClipIntensity intensity;
    flow::EntrySegmentation segmentation;
    std::size_t pairs = 0;
};

struct FlowExtraction {
    std::vector<FlowClipResult> clips;
    std::vector<std::string> warnings;  // clips skipped for want of an entry time
};

// The entry window comes from the manifest, else from the first caretaker
// entry in `events` inside the clip; a missing end uses entry_duration_s.
FlowClipResult flow_clip(const std::filesystem::path& manifest, const flow::FlowParams& params,
                         const ingest::EventLog* events = nullptr, bool parallel_pairs = true);
FlowExtraction extract_flow(const std::vector<VideoClipRef>& clips, const flow::FlowParams& params,
                            const ingest::EventLog* events = nullptr);

std::string flow_intensities_to_csv(const std::vector<FlowClipResult>& clips);
std::vector<aggregate::ClipIntensity> flow_intensities_from_csv(std::string_view text);

struct Dataset {
    std::vector<acoustic::AcousticFeatureVector> acoustic;
    std::vector<FlowClipResult> flow;
    std::vector<ingest::ThermalRecord> thermal;
    std::vector<ingest::EnvRecord> env;
    ingest::EventLog events;
    std::vector<std::string> warnings;
};

// Reads every modality under `root`; a modality whose file is absent is left
// empty with a warning. Throws IoError for unreadable files.
Dataset load_dataset(const std::filesystem::path& root, const PipelineConfig& config);

struct AnalysisResults {
    aggregate::ThermalAggregation thermal;
    std::vector<aggregate::WeeklySummary> acoustic;
    aggregate::FlowAggregation flow;
    aggregate::EnvAggregation env;
    std::vector<aggregate::WeeklySummary> summaries;  // all modalities
    aggregate::WeeklyFeatureTable table;
    aggregate::CorrelationReport correlations;
    std::optional<aggregate::ContrastResult> contrast;
    std::optional<std::string> contrast_error;
    aggregate::TrajectoryPanels panels;
    nlohmann::ordered_json tests;  // per-week ANOVA, Tukey, Shapiro-Wilk, Levene, Kruskal-Wallis
    std::vector<std::string> warnings;
};

// Weekly tests over one feature's week groups; each failing test records its
// error message in place of a result.
nlohmann::ordered_json weekly_tests(const aggregate::WeekGroups& groups, const PipelineConfig::Stats& options);

// Acoustic (six features), thermal (head, foot) and flow (three conditions)
// week-effect tests for the analysis room.
nlohmann::ordered_json all_weekly_tests(const std::vector<acoustic::AcousticFeatureVector>& acoustic,
                                        const std::vector<ingest::ThermalRecord>& thermal,
                                        const std::vector<aggregate::ClipIntensity>& flow,
                                        const PipelineConfig& config);

AnalysisResults analyze(const Dataset& data, const PipelineConfig& config);

struct Artifact {
    std::string name;     // path relative to the output directory
    std::string content;
    std::string summary;  // one line for the console
};

// Every output of a pipeline run, in write order.
std::vector<Artifact> pipeline_artifacts(const Dataset& data, const AnalysisResults& results,
                                         const PipelineConfig& config);

// Writes artifacts sequentially and returns one "name: summary" line each.
std::vector<std::string> write_artifacts(const std::filesystem::path& out_dir, const std::vector<Artifact>& artifacts);

}  // namespace aviary::cli

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace aviary::synth {

enum class TrendShape { Linear, ExpPlateau };

// Linear: start at `origin`, end at the config's last week.
// ExpPlateau: end - (end - start) * exp(-(week - origin) / tau).
struct Trend {
    double start = 0.0;
    double end = 0.0;
    TrendShape shape = TrendShape::Linear;
    double tau = 3.0;               // weeks, ExpPlateau only
    std::optional<int> origin;      // defaults to the first configured week
    double weekly_sd = 0.0;         // latent week-to-week deviation
    double obs_sd = 0.0;            // per-observation noise around the weekly value
};

struct Coupling {
    std::string feature_a;
    std::string feature_b;
    double r = 0.0;  // target in (-1, 1)
};

struct Disturbance {
    int week = 0;
    double magnitude = 0.0;
    std::vector<std::string> modalities;  // subset of acoustic, flow, thermal, env
};

struct AcousticSynth {
    int clips_per_week = 12;
    double clip_seconds = 10.0;
    int sample_rate = 44100;
    double vibrato_hz = 3.0;
    double vibrato_depth_hz = 150.0;
    double background_rms = 1e-4;
    double background_low_hz = 1000.0;
    double background_high_hz = 6000.0;
};

struct FlowSynth {
    int clips_per_week = 3;
    int first_week = 5;
    double fps = 1.0;
    int width = 320;
    int height = 180;
    double before_s = 20.0;
    double during_s = 10.0;
    double after_s = 20.0;
    double after_fraction = 0.15;  // share of the entry response left after the entry
    double contrast = 90.0;
    // Table-scale geometry: 7 min before and after a 90 s entry.
    bool full_geometry = false;
};

struct SynthConfig {
    std::uint64_t seed = 20250602;
    int first_week = 1;
    int last_week = 20;
    std::vector<int> rooms = {1};
    std::string hatch_date = "2025-06-02";
    int coupling_first_week = 5;
    int coupling_last_week = 20;
    int thermal_images_per_week = 7;
    double pm_temp_offset = 2.0;
    double pm_rh_offset = -4.0;
    AcousticSynth acoustic;
    FlowSynth flow;
    // Drivers: spectral_centroid, rms, head_temp_mean, foot_temp_mean,
    // ambient_temp, rel_humidity, flow_baseline, flow_response.
    std::map<std::string, Trend> trends;
    std::vector<Coupling> couplings;
    std::vector<Disturbance> disturbances;

    // Defaults above plus the default trends, couplings and disturbances.
    static SynthConfig defaults();
    // Throws ValidationError naming the offending field.
    void validate() const;
};

// Strict JSON: unknown keys are rejected; absent keys keep defaults().
SynthConfig synth_config_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const SynthConfig& config);

struct PlantedEvent {
    std::string kind;  // caretaker_entry, maintenance, equipment
    int room = 0;
    int week = 0;
    std::string timestamp;
    double magnitude = 0.0;
    std::vector<std::string> modalities;
};

struct GroundTruth {
    std::vector<int> weeks;
    // Noiseless trend per driver and per table feature, indexed like `weeks`.
    std::map<std::string, std::vector<double>> trend;
    // Trend plus the realized latent weekly deviation and disturbances: the
    // weekly value observations scatter around.
    std::map<std::string, std::vector<double>> planted;
    std::vector<Coupling> couplings;
    // Pearson r of the planted weekly values over the coupling weeks.
    std::vector<double> realized_r;
    // Table-feature pairs whose planted values are structurally independent.
    std::vector<std::pair<std::string, std::string>> null_pairs;
    std::vector<PlantedEvent> events;
    std::uint64_t seed = 0;

    double planted_at(const std::string& feature, int week) const;
};

nlohmann::ordered_json to_json(const GroundTruth& truth);

// Latent draws and trajectories only; no files. Throws ValidationError for an
// invalid config or "infeasible coupling matrix".
GroundTruth planted_truth(const SynthConfig& config);

// Writes audio/, video/, thermal.csv, env.csv, events.csv and
// ground_truth.json under out_dir. Throws IoError when out_dir is unwritable.
GroundTruth generate_dataset(const SynthConfig& config, const std::filesystem::path& out_dir);

}  // namespace aviary::synth

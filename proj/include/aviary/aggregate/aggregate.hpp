#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "aviary/acoustic/features.hpp"
#include "aviary/flow/flow.hpp"
#include "aviary/ingest/records.hpp"
#include "aviary/stats/tests.hpp"
#include "json.hpp"

namespace aviary::aggregate {

enum class Modality { Thermal, Acoustic, Flow, Env };
std::string_view modality_name(Modality m) noexcept;

struct WeeklySummary {
    int room = 0;
    int week = 0;
    Modality modality = Modality::Thermal;
    std::string feature;
    double mean = 0.0;
    std::optional<double> sd;  // missing when n < 2
    std::size_t n = 0;
};

// Correlation roster, in table column order.
inline constexpr std::array<std::string_view, 10> kFeatureColumns = {
    "flow_before", "flow_during", "flow_after",     "spectral_centroid", "zcr",
    "rms",         "head_temp_mean", "foot_temp_mean", "ambient_temp",   "rel_humidity",
};

inline constexpr int kFirstTableWeek = 5;
inline constexpr int kLastTableWeek = 20;
inline constexpr int kFirstVideoWeek = 5;
inline constexpr int kLastExcludedThermalWeek = 1;

struct ThermalAggregation {
    std::vector<WeeklySummary> summaries;  // head_temp_mean / foot_temp_mean
    std::size_t excluded = 0;              // records at weeks 0-1
};

struct FlowAggregation {
    std::vector<WeeklySummary> summaries;  // flow_before / flow_during / flow_after
    std::vector<std::string> warnings;
};

struct EnvAggregation {
    // ambient_temp / rel_humidity over all sessions, plus _am / _pm variants.
    std::vector<WeeklySummary> summaries;
    std::vector<std::string> warnings;  // weeks with a single session
};

struct ClipIntensity {
    std::string clip_id;
    int room = 0;
    int week = 0;
    int day = 0;
    flow::ConditionIntensity values;
};

// Output is sorted by room, week, then feature.
ThermalAggregation weekly_thermal(const std::vector<ingest::ThermalRecord>& records);
std::vector<WeeklySummary> weekly_acoustic(const std::vector<acoustic::AcousticFeatureVector>& features);
FlowAggregation weekly_flow(const std::vector<ClipIntensity>& clips);
EnvAggregation weekly_env(const std::vector<ingest::EnvRecord>& records);

struct WeeklyFeatureTable {
    std::vector<int> weeks;
    std::vector<std::string> columns;
    std::vector<std::optional<double>> cells;  // weeks x columns, row-major
    std::vector<std::string> warnings;

    const std::optional<double>& at(std::size_t row, std::size_t col) const {
        return cells[row * columns.size() + col];
    }
    std::optional<double>& at(std::size_t row, std::size_t col) { return cells[row * columns.size() + col]; }
    std::size_t missing_cells() const;
};

// One row per week 5-20 for `room`; env columns average every AM and PM
// reading of the week. Throws ValidationError when fewer than 3 weeks carry
// any value.
WeeklyFeatureTable build_feature_table(const std::vector<WeeklySummary>& summaries,
                                       const std::vector<ingest::EnvRecord>& env_records, int room = 1);

// CSV layout: week,<columns...>,mask with empty missing cells and a 0/1 mask
// string (1 = missing) in column order.
std::string feature_table_to_csv(const WeeklyFeatureTable& table);
WeeklyFeatureTable feature_table_from_csv(std::string_view text);

struct CorrelationEntry {
    std::string feature_a;
    std::string feature_b;
    std::optional<double> r;
    std::optional<double> p_raw;
    std::optional<double> q;
    bool significant = false;
    std::size_t n_pairs = 0;
};

struct CorrelationReport {
    std::vector<CorrelationEntry> entries;  // one per unordered column pair
    std::size_t family_size = 0;            // entries with defined r
    double q_threshold = 0.05;
};

// Pairwise-complete Pearson r for every column pair, BH-adjusted jointly over
// pairs with defined r. A pair with fewer than 3 complete rows or a constant
// side carries missing r. Entries follow the roster order regardless of the
// table's column order.
CorrelationReport correlate_all(const WeeklyFeatureTable& table, double q_threshold = 0.05);

std::string correlations_to_csv(const CorrelationReport& report);
// Inverse of correlations_to_csv; family size counts rows with r present.
CorrelationReport correlations_from_csv(std::string_view text, double q_threshold = 0.05);

struct PhaseRule {
    int early_first = 5;
    int early_last = 10;
    int late_first = 15;
    int late_last = 20;

    void validate() const;
    std::string describe() const;
};

struct WeekConditions {
    int week = 0;
    double before = 0.0;
    double during = 0.0;
    double after = 0.0;
};

struct ContrastResult {
    stats::TestResult early_vs_late;        // paired t on during-minus-before differentials
    std::vector<std::pair<int, int>> pairs; // (early week, late week)
    std::vector<double> early_differentials;
    std::vector<double> late_differentials;
    std::string pairing_rule;
    std::optional<stats::TestResult> during_vs_before;  // paired over every week with data
    std::size_t weeks_during_above_before = 0;
    std::size_t weeks_total = 0;
};

// Weekly condition means for one room from weekly_flow summaries.
std::vector<WeekConditions> flow_condition_means(const std::vector<WeeklySummary>& summaries, int room = 1);

// Paired by ordinal position within each phase; a position missing on either
// side is dropped. Throws ValidationError("insufficient weeks") below 3 pairs.
// Identical phases give t = 0, p = 1; a nonzero constant differential gives an
// infinite t with p = 0.
ContrastResult early_late_contrast(const std::vector<WeekConditions>& weekly, const PhaseRule& rule = {});

nlohmann::ordered_json to_json(const ContrastResult& contrast);

struct TrajectoryPanels {
    std::vector<int> weeks;
    std::vector<std::string> columns;          // z-scored columns kept
    std::vector<std::optional<double>> z;      // weeks x columns
    std::vector<std::pair<std::string, std::vector<std::string>>> panels;  // A, B, C
    std::vector<std::string> warnings;         // dropped columns
};

// Per-column z-scores over non-missing weeks. Panels: A head temperature,
// spectral centroid, baseline flow; B foot temperature and RMS; C the A and B
// series with ambient temperature.
TrajectoryPanels trajectory_panel(const WeeklyFeatureTable& table);

// Per-week observation groups of one feature for ANOVA-style tests, in week
// order, restricted to one room and weeks with at least one observation.
struct WeekGroups {
    std::vector<int> weeks;
    stats::Groups groups;

    std::vector<std::string> labels() const;
};

WeekGroups acoustic_groups(const std::vector<acoustic::AcousticFeatureVector>& features, std::string_view feature,
                           int room = 1);
WeekGroups thermal_groups(const std::vector<ingest::ThermalRecord>& records, ingest::Region region, int room = 1);

double acoustic_value(const acoustic::AcousticFeatureVector& v, std::string_view feature);
inline constexpr std::array<std::string_view, 6> kAcousticFeatures = {
    "spectral_centroid", "spectral_bandwidth", "spectral_rolloff", "zcr", "rms", "ste",
};

std::string summaries_to_csv(const std::vector<WeeklySummary>& summaries);
std::vector<WeeklySummary> summaries_from_csv(std::string_view text);

}  // namespace aviary::aggregate

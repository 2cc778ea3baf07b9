#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "aviary/aggregate/aggregate.hpp"

namespace aviary::report {

// An SVG and the CSV it is rendered from: svg == render_plot(name, csv).
struct Plot {
    std::string name;  // file stem
    std::string csv;
    std::string svg;
    std::string summary;
};

// Backing tables.
//   trajectory:  series,week,mean,sd     (sd empty when n < 2)
//   conditions:  week,condition,mean,sd
//   panels:      panel,series,week,z     (z empty when missing)
//   heatmap:     feature_a,feature_b,r,significant
std::string trajectory_csv(const std::vector<aggregate::WeeklySummary>& summaries, int room,
                           const std::vector<std::string>& features);
std::string conditions_csv(const std::vector<aggregate::WeeklySummary>& summaries, int room);
std::string panels_csv(const aggregate::TrajectoryPanels& panels);
std::string heatmap_csv(const aggregate::CorrelationReport& report);

// Renderers read only the CSV. The x axis carries one tick per distinct week.
std::string render_trajectory_svg(std::string_view csv, std::string_view title, std::string_view y_label);
std::string render_conditions_svg(std::string_view csv, std::string_view title);
std::string render_panels_svg(std::string_view csv, std::string_view title);
// Cells follow the order features first appear in the CSV; significant pairs
// carry an asterisk in both triangles.
std::string render_heatmap_svg(std::string_view csv, std::string_view title);

// Renderer and labels fixed per plot name. Throws ValidationError for an
// unknown name.
std::string render_plot(std::string_view name, std::string_view csv);
std::vector<std::string> plot_names();

// Every plot with data; plots without rows are omitted. Throws
// ValidationError("empty results") when nothing can be drawn.
std::vector<Plot> emit_report(const std::vector<aggregate::WeeklySummary>& summaries,
                              const aggregate::TrajectoryPanels& panels,
                              const aggregate::CorrelationReport& correlations, int room = 1);

}  // namespace aviary::report

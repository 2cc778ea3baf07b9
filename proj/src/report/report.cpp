#include "aviary/report/report.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>

#include <fmt/format.h>

#include "aviary/error.hpp"
#include "aviary/ingest/csv.hpp"

namespace aviary::report {

namespace {

using aggregate::Modality;
using aggregate::WeeklySummary;

constexpr double kWidth = 760.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 170.0;
constexpr double kTop = 48.0;
constexpr double kPlotHeight = 300.0;
constexpr double kBottom = 56.0;

constexpr std::array<std::string_view, 8> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                      "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string xml_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string opt_cell(const std::optional<double>& v) { return v ? ingest::format_double(*v) : std::string(); }

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> lines;
};

Table read_table(std::string_view csv, std::initializer_list<std::string_view> expected) {
    const auto parsed = ingest::parse_csv(csv);
    std::vector<std::string> want(expected.begin(), expected.end());
    if (parsed.header != want) {
        std::string joined;
        for (const auto& w : want) joined += (joined.empty() ? "" : ",") + w;
        throw ParseError("plot data header must be " + joined, ParseError::Unit::Row, 1);
    }
    Table t;
    t.header = parsed.header;
    for (const auto& row : parsed.rows) {
        if (row.fields.size() != want.size()) {
            throw ParseError("plot data field count mismatch", ParseError::Unit::Row, row.line);
        }
        t.rows.push_back(row.fields);
        t.lines.push_back(row.line);
    }
    return t;
}

std::optional<double> number(const Table& t, std::size_t r, std::size_t c, bool required) {
    const auto& cell = t.rows[r][c];
    if (cell.empty()) {
        if (required) throw ParseError("missing " + t.header[c], ParseError::Unit::Row, t.lines[r]);
        return std::nullopt;
    }
    const auto v = ingest::parse_double(cell);
    if (!v) throw ParseError("unparsable " + t.header[c], ParseError::Unit::Row, t.lines[r]);
    return v;
}

int week_cell(const Table& t, std::size_t r, std::size_t c) {
    const auto v = ingest::parse_integer(t.rows[r][c]);
    if (!v) throw ParseError("unparsable week", ParseError::Unit::Row, t.lines[r]);
    return static_cast<int>(*v);
}

// Names in order of first appearance.
void note(std::vector<std::string>& order, const std::string& name) {
    if (std::find(order.begin(), order.end(), name) == order.end()) order.push_back(name);
}

struct Range {
    double lo = 0.0;
    double hi = 1.0;
    double step = 0.0;  // tick spacing; 0 gives four equal intervals

    // Widens to multiples of a 1, 2, 2.5 or 5 step giving about five ticks.
    void pad() {
        if (!(hi > lo)) {
            lo -= 1.0;
            hi += 1.0;
        }
        const double raw = (hi - lo) / 4.0;
        const double mag = std::pow(10.0, std::floor(std::log10(raw)));
        step = 10.0 * mag;
        for (double m : {1.0, 2.0, 2.5, 5.0}) {
            if (m * mag >= raw) {
                step = m * mag;
                break;
            }
        }
        lo = std::floor(lo / step) * step;
        hi = std::ceil(hi / step) * step;
    }
};

struct Frame {
    double top;
    double height;
    Range y;
    std::size_t slots;

    double x(std::size_t i) const {
        const double w = kWidth - kLeft - kRight;
        return kLeft + w * (static_cast<double>(i) + 0.5) / static_cast<double>(slots);
    }
    double slot_width() const { return (kWidth - kLeft - kRight) / static_cast<double>(slots); }
    double yv(double v) const { return top + height * (y.hi - v) / (y.hi - y.lo); }
};

std::string svg_open(double height, std::string_view title) {
    return fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" viewBox=\"0 0 {:.0f} {:.0f}\" "
        "font-family=\"sans-serif\" font-size=\"12\">\n"
        "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n"
        "<text class=\"title\" x=\"{:.2f}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
        kWidth, height, kWidth, height, kWidth / 2.0, xml_escape(title));
}

// Axes box, y ticks and optional week ticks along the bottom.
std::string axes(const Frame& f, std::string_view y_label, const std::vector<int>* weeks) {
    std::string out = fmt::format("<rect class=\"axes\" x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" "
                                  "fill=\"none\" stroke=\"#000000\"/>\n",
                                  kLeft, f.top, kWidth - kLeft - kRight, f.height);
    const double step = f.y.step > 0.0 ? f.y.step : (f.y.hi - f.y.lo) / 4.0;
    const auto ticks = static_cast<int>(std::lround((f.y.hi - f.y.lo) / step));
    for (int i = 0; i <= ticks; ++i) {
        const double v = f.y.lo + step * i;
        const double y = f.yv(v);
        out += fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"#000000\"/>\n",
                           kLeft - 4.0, y, kLeft, y);
        out += fmt::format("<text class=\"ytick\" x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"end\">{:.4g}</text>\n",
                           kLeft - 6.0, y + 4.0, v);
    }
    out += fmt::format(
        "<text class=\"ylabel\" x=\"16\" y=\"{:.2f}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.2f})\">{}</text>\n",
        f.top + f.height / 2.0, f.top + f.height / 2.0, xml_escape(y_label));
    if (weeks) {
        const double base = f.top + f.height;
        for (std::size_t i = 0; i < weeks->size(); ++i) {
            out += fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"#000000\"/>\n",
                               f.x(i), base, f.x(i), base + 4.0);
            out += fmt::format("<text class=\"xtick\" x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">{}</text>\n",
                               f.x(i), base + 18.0, (*weeks)[i]);
        }
        out += fmt::format("<text class=\"xlabel\" x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">Week</text>\n",
                           kLeft + (kWidth - kLeft - kRight) / 2.0, base + 38.0);
    }
    return out;
}

std::string legend(const std::vector<std::string>& names, double top) {
    std::string out;
    for (std::size_t i = 0; i < names.size(); ++i) {
        const double y = top + 10.0 + 20.0 * static_cast<double>(i);
        out += fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"14\" height=\"10\" fill=\"{}\"/>\n",
                           kWidth - kRight + 14.0, y - 9.0, kPalette[i % kPalette.size()]);
        out += fmt::format("<text class=\"legend\" x=\"{:.2f}\" y=\"{:.2f}\">{}</text>\n", kWidth - kRight + 34.0, y,
                           xml_escape(names[i]));
    }
    return out;
}

std::size_t week_slot(const std::vector<int>& weeks, int w) {
    return static_cast<std::size_t>(std::lower_bound(weeks.begin(), weeks.end(), w) - weeks.begin());
}

// Polyline path broken at missing points.
std::string line_path(const std::vector<std::optional<std::pair<double, double>>>& pts) {
    std::string d;
    bool pen = false;
    for (const auto& p : pts) {
        if (!p) {
            pen = false;
            continue;
        }
        d += fmt::format("{}{:.2f},{:.2f} ", pen ? "L" : "M", p->first, p->second);
        pen = true;
    }
    if (!d.empty()) d.pop_back();
    return d;
}

std::string rgb_for(double r) {
    const double t = std::clamp(r, -1.0, 1.0);
    const std::array<double, 3> mid = {247, 247, 247};
    const std::array<double, 3> end = t >= 0 ? std::array<double, 3>{180, 4, 38} : std::array<double, 3>{59, 76, 192};
    const double a = std::abs(t);
    return fmt::format("rgb({},{},{})", static_cast<int>(std::lround(mid[0] + (end[0] - mid[0]) * a)),
                       static_cast<int>(std::lround(mid[1] + (end[1] - mid[1]) * a)),
                       static_cast<int>(std::lround(mid[2] + (end[2] - mid[2]) * a)));
}

struct PlotSpec {
    std::string_view name;
    std::string_view title;
    std::string_view y_label;
    std::vector<std::string> features;  // trajectory plots only
};

const std::vector<PlotSpec>& trajectory_specs() {
    static const std::vector<PlotSpec> specs = {
        {"thermal_trajectory", "Weekly surface temperature", "Temperature (C)", {"head_temp_mean", "foot_temp_mean"}},
        {"acoustic_trajectory",
         "Weekly spectral features",
         "Frequency (Hz)",
         {"spectral_centroid", "spectral_bandwidth", "spectral_rolloff"}},
        {"acoustic_energy", "Weekly RMS amplitude", "RMS amplitude", {"rms"}},
        {"env_temperature", "Weekly ambient temperature", "Temperature (C)", {"ambient_temp_am", "ambient_temp_pm"}},
        {"env_humidity", "Weekly relative humidity", "Relative humidity (%)", {"rel_humidity_am", "rel_humidity_pm"}},
    };
    return specs;
}

constexpr std::string_view kConditionsTitle = "Optical flow intensity around caretaker entry";
constexpr std::string_view kPanelsTitle = "Z-scored weekly features";
constexpr std::string_view kHeatmapTitle = "Pearson correlation of weekly features";

std::size_t count_rows(const std::string& csv) {
    return static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')) - 1;
}

}  // namespace

std::string trajectory_csv(const std::vector<WeeklySummary>& summaries, int room,
                           const std::vector<std::string>& features) {
    std::string out = "series,week,mean,sd\n";
    for (const auto& f : features) {
        std::vector<const WeeklySummary*> rows;
        for (const auto& s : summaries) {
            if (s.room == room && s.feature == f) rows.push_back(&s);
        }
        std::stable_sort(rows.begin(), rows.end(), [](auto* a, auto* b) { return a->week < b->week; });
        for (const auto* s : rows) {
            out += fmt::format("{},{},{},{}\n", ingest::csv_escape(f), s->week, ingest::format_double(s->mean),
                               opt_cell(s->sd));
        }
    }
    return out;
}

std::string conditions_csv(const std::vector<WeeklySummary>& summaries, int room) {
    std::string out = "week,condition,mean,sd\n";
    std::map<int, std::array<const WeeklySummary*, 3>> by_week;
    for (const auto& s : summaries) {
        if (s.room != room || s.modality != Modality::Flow) continue;
        const int slot = s.feature == "flow_before" ? 0 : s.feature == "flow_during" ? 1 : s.feature == "flow_after" ? 2 : -1;
        if (slot < 0) continue;
        auto [it, inserted] = by_week.try_emplace(s.week);
        if (inserted) it->second = {nullptr, nullptr, nullptr};
        it->second[static_cast<std::size_t>(slot)] = &s;
    }
    constexpr std::array<std::string_view, 3> names = {"before", "during", "after"};
    for (const auto& [week, slots] : by_week) {
        for (std::size_t i = 0; i < 3; ++i) {
            if (!slots[i]) continue;
            out += fmt::format("{},{},{},{}\n", week, names[i], ingest::format_double(slots[i]->mean),
                               opt_cell(slots[i]->sd));
        }
    }
    return out;
}

std::string panels_csv(const aggregate::TrajectoryPanels& panels) {
    std::string out = "panel,series,week,z\n";
    for (const auto& [panel, series] : panels.panels) {
        for (const auto& name : series) {
            const auto it = std::find(panels.columns.begin(), panels.columns.end(), name);
            if (it == panels.columns.end()) continue;
            const auto col = static_cast<std::size_t>(it - panels.columns.begin());
            for (std::size_t r = 0; r < panels.weeks.size(); ++r) {
                out += fmt::format("{},{},{},{}\n", ingest::csv_escape(panel), ingest::csv_escape(name),
                                   panels.weeks[r], opt_cell(panels.z[r * panels.columns.size() + col]));
            }
        }
    }
    return out;
}

std::string heatmap_csv(const aggregate::CorrelationReport& report) {
    std::string out = "feature_a,feature_b,r,significant\n";
    for (const auto& e : report.entries) {
        out += fmt::format("{},{},{},{}\n", ingest::csv_escape(e.feature_a), ingest::csv_escape(e.feature_b),
                           opt_cell(e.r), e.significant ? "true" : "false");
    }
    return out;
}

std::string render_trajectory_svg(std::string_view csv, std::string_view title, std::string_view y_label) {
    const auto t = read_table(csv, {"series", "week", "mean", "sd"});
    std::vector<std::string> names;
    std::vector<int> weeks;
    Range y{INFINITY, -INFINITY};
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        note(names, t.rows[r][0]);
        weeks.push_back(week_cell(t, r, 1));
        const double m = *number(t, r, 2, true);
        const double sd = number(t, r, 3, false).value_or(0.0);
        y.lo = std::min(y.lo, m - sd);
        y.hi = std::max(y.hi, m + sd);
    }
    if (t.rows.empty()) throw ValidationError("empty results");
    std::sort(weeks.begin(), weeks.end());
    weeks.erase(std::unique(weeks.begin(), weeks.end()), weeks.end());
    y.pad();
    const Frame f{kTop, kPlotHeight, y, weeks.size()};
    std::string out = svg_open(kTop + kPlotHeight + kBottom, title);
    out += axes(f, y_label, &weeks);
    for (std::size_t s = 0; s < names.size(); ++s) {
        const auto color = kPalette[s % kPalette.size()];
        std::vector<std::optional<std::pair<double, double>>> mid(weeks.size());
        std::vector<std::pair<double, double>> upper, lower;
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            if (t.rows[r][0] != names[s]) continue;
            const auto i = week_slot(weeks, week_cell(t, r, 1));
            const double m = *number(t, r, 2, true);
            const double sd = number(t, r, 3, false).value_or(0.0);
            mid[i] = std::make_pair(f.x(i), f.yv(m));
            upper.emplace_back(f.x(i), f.yv(m + sd));
            lower.emplace_back(f.x(i), f.yv(m - sd));
        }
        out += fmt::format("<g class=\"series\" data-series=\"{}\">\n", xml_escape(names[s]));
        std::string band;
        for (const auto& p : upper) band += fmt::format("{:.2f},{:.2f} ", p.first, p.second);
        for (auto it = lower.rbegin(); it != lower.rend(); ++it) band += fmt::format("{:.2f},{:.2f} ", it->first, it->second);
        if (!band.empty()) band.pop_back();
        out += fmt::format("<polygon class=\"band\" points=\"{}\" fill=\"{}\" fill-opacity=\"0.2\" stroke=\"none\"/>\n",
                           band, color);
        out += fmt::format("<path class=\"line\" d=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"2\"/>\n",
                           line_path(mid), color);
        for (const auto& p : mid) {
            if (p) {
                out += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"3\" fill=\"{}\"/>\n", p->first, p->second,
                                   color);
            }
        }
        out += "</g>\n";
    }
    out += legend(names, kTop);
    out += "</svg>\n";
    return out;
}

std::string render_conditions_svg(std::string_view csv, std::string_view title) {
    const auto t = read_table(csv, {"week", "condition", "mean", "sd"});
    if (t.rows.empty()) throw ValidationError("empty results");
    std::vector<std::string> conditions;
    std::vector<int> weeks;
    Range y{0.0, -INFINITY};
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        note(conditions, t.rows[r][1]);
        weeks.push_back(week_cell(t, r, 0));
        const double m = *number(t, r, 2, true);
        const double sd = number(t, r, 3, false).value_or(0.0);
        y.lo = std::min(y.lo, m - sd);
        y.hi = std::max(y.hi, m + sd);
    }
    std::sort(weeks.begin(), weeks.end());
    weeks.erase(std::unique(weeks.begin(), weeks.end()), weeks.end());
    y.pad();
    const Frame f{kTop, kPlotHeight, y, weeks.size()};
    std::string out = svg_open(kTop + kPlotHeight + kBottom, title);
    out += axes(f, "Mean flow magnitude (px/frame)", &weeks);
    const double bar = 0.8 * f.slot_width() / static_cast<double>(conditions.size());
    const double zero = f.yv(std::max(0.0, y.lo));
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto i = week_slot(weeks, week_cell(t, r, 0));
        const auto c = static_cast<std::size_t>(std::find(conditions.begin(), conditions.end(), t.rows[r][1]) -
                                                conditions.begin());
        const double m = *number(t, r, 2, true);
        const auto sd = number(t, r, 3, false);
        const double x0 = f.x(i) - 0.4 * f.slot_width() + bar * static_cast<double>(c);
        const double ym = f.yv(m);
        out += fmt::format(
            "<rect class=\"bar\" data-week=\"{}\" data-condition=\"{}\" x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" "
            "height=\"{:.2f}\" fill=\"{}\"/>\n",
            weeks[i], xml_escape(conditions[c]), x0, std::min(ym, zero), bar, std::abs(zero - ym),
            kPalette[c % kPalette.size()]);
        if (sd) {
            const double xc = x0 + bar / 2.0;
            out += fmt::format("<line class=\"errorbar\" x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" "
                               "stroke=\"#000000\"/>\n",
                               xc, f.yv(m - *sd), xc, f.yv(m + *sd));
        }
    }
    out += legend(conditions, kTop);
    out += "</svg>\n";
    return out;
}

std::string render_panels_svg(std::string_view csv, std::string_view title) {
    const auto t = read_table(csv, {"panel", "series", "week", "z"});
    if (t.rows.empty()) throw ValidationError("empty results");
    std::vector<std::string> panels;
    std::vector<int> weeks;
    double extent = 1.0;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        note(panels, t.rows[r][0]);
        weeks.push_back(week_cell(t, r, 2));
        if (const auto z = number(t, r, 3, false)) extent = std::max(extent, std::ceil(std::abs(*z)));
    }
    std::sort(weeks.begin(), weeks.end());
    weeks.erase(std::unique(weeks.begin(), weeks.end()), weeks.end());
    constexpr double panel_h = 200.0;
    constexpr double gap = 36.0;
    const double height = kTop + panels.size() * panel_h + (panels.size() - 1) * gap + kBottom;
    std::string out = svg_open(height, title);
    for (std::size_t p = 0; p < panels.size(); ++p) {
        const double top = kTop + static_cast<double>(p) * (panel_h + gap);
        const Frame f{top, panel_h, Range{-extent, extent}, weeks.size()};
        const bool bottom = p + 1 == panels.size();
        out += fmt::format("<g class=\"panel\" data-panel=\"{}\">\n", xml_escape(panels[p]));
        out += fmt::format("<text class=\"panel-label\" x=\"{:.2f}\" y=\"{:.2f}\" font-weight=\"bold\">{}</text>\n",
                           kLeft, top - 6.0, xml_escape(panels[p]));
        out += axes(f, "z-score", bottom ? &weeks : nullptr);
        out += fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"#999999\" "
                           "stroke-dasharray=\"4 3\"/>\n",
                           kLeft, f.yv(0.0), kWidth - kRight, f.yv(0.0));
        std::vector<std::string> names;
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            if (t.rows[r][0] == panels[p]) note(names, t.rows[r][1]);
        }
        for (std::size_t s = 0; s < names.size(); ++s) {
            std::vector<std::optional<std::pair<double, double>>> pts(weeks.size());
            for (std::size_t r = 0; r < t.rows.size(); ++r) {
                if (t.rows[r][0] != panels[p] || t.rows[r][1] != names[s]) continue;
                const auto i = week_slot(weeks, week_cell(t, r, 2));
                if (const auto z = number(t, r, 3, false)) pts[i] = std::make_pair(f.x(i), f.yv(*z));
            }
            out += fmt::format(
                "<path class=\"series\" data-series=\"{}\" d=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"2\"/>\n",
                xml_escape(names[s]), line_path(pts), kPalette[s % kPalette.size()]);
        }
        out += legend(names, top);
        out += "</g>\n";
    }
    out += "</svg>\n";
    return out;
}

std::string render_heatmap_svg(std::string_view csv, std::string_view title) {
    const auto t = read_table(csv, {"feature_a", "feature_b", "r", "significant"});
    if (t.rows.empty()) throw ValidationError("empty results");
    std::vector<std::string> names;
    std::map<std::pair<std::string, std::string>, std::pair<std::optional<double>, bool>> cells;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& a = t.rows[r][0];
        const auto& b = t.rows[r][1];
        note(names, a);
        note(names, b);
        const auto& sig = t.rows[r][3];
        if (sig != "true" && sig != "false") throw ParseError("significant must be true or false", ParseError::Unit::Row, t.lines[r]);
        const auto value = number(t, r, 2, false);
        cells[{a, b}] = {value, sig == "true"};
        cells[{b, a}] = {value, sig == "true"};
    }
    constexpr double cell = 52.0;
    constexpr double left = 130.0;
    const double top = kTop + 10.0;
    const double n = static_cast<double>(names.size());
    const double width = std::max(kWidth, left + n * cell + 20.0);
    const double height = top + n * cell + 110.0;
    std::string out = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" viewBox=\"0 0 {:.0f} {:.0f}\" "
        "font-family=\"sans-serif\" font-size=\"11\">\n"
        "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n"
        "<text class=\"title\" x=\"{:.2f}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
        width, height, width, height, width / 2.0, xml_escape(title));
    for (std::size_t i = 0; i < names.size(); ++i) {
        const double y = top + cell * static_cast<double>(i);
        out += fmt::format("<text class=\"row-label\" x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"end\">{}</text>\n",
                           left - 6.0, y + cell / 2.0 + 4.0, xml_escape(names[i]));
        for (std::size_t j = 0; j < names.size(); ++j) {
            const double x = left + cell * static_cast<double>(j);
            std::optional<double> r;
            bool sig = false;
            if (i == j) {
                r = 1.0;
            } else if (const auto it = cells.find({names[i], names[j]}); it != cells.end()) {
                r = it->second.first;
                sig = it->second.second;
            }
            out += fmt::format("<g class=\"cell\" data-a=\"{}\" data-b=\"{}\">", xml_escape(names[i]), xml_escape(names[j]));
            out += fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"{}\" "
                               "stroke=\"#ffffff\"/>",
                               x, y, cell, cell, r ? rgb_for(*r) : std::string("#cccccc"));
            out += fmt::format("<text class=\"value\" x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">{}</text>",
                               x + cell / 2.0, y + cell / 2.0 + 4.0, r ? fmt::format("{:.2f}", *r) : std::string("NA"));
            if (sig) {
                out += fmt::format("<text class=\"sig\" x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\" "
                                   "font-weight=\"bold\">*</text>",
                                   x + cell / 2.0, y + cell / 2.0 + 17.0);
            }
            out += "</g>\n";
        }
    }
    const double base = top + n * cell;
    for (std::size_t j = 0; j < names.size(); ++j) {
        const double x = left + cell * (static_cast<double>(j) + 0.5);
        out += fmt::format("<text class=\"col-label\" x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"end\" "
                           "transform=\"rotate(-45 {:.2f} {:.2f})\">{}</text>\n",
                           x, base + 12.0, x, base + 12.0, xml_escape(names[j]));
    }
    out += fmt::format("<text class=\"note\" x=\"{:.2f}\" y=\"{:.2f}\">* significant after FDR adjustment</text>\n", left,
                       height - 10.0);
    out += "</svg>\n";
    return out;
}

std::vector<std::string> plot_names() {
    std::vector<std::string> out;
    for (const auto& s : trajectory_specs()) out.emplace_back(s.name);
    out.emplace_back("flow_conditions");
    out.emplace_back("trajectories");
    out.emplace_back("correlation_heatmap");
    return out;
}

std::string render_plot(std::string_view name, std::string_view csv) {
    for (const auto& s : trajectory_specs()) {
        if (s.name == name) return render_trajectory_svg(csv, s.title, s.y_label);
    }
    if (name == "flow_conditions") return render_conditions_svg(csv, kConditionsTitle);
    if (name == "trajectories") return render_panels_svg(csv, kPanelsTitle);
    if (name == "correlation_heatmap") return render_heatmap_svg(csv, kHeatmapTitle);
    throw ValidationError(fmt::format("unknown plot '{}'", name));
}

std::vector<Plot> emit_report(const std::vector<WeeklySummary>& summaries, const aggregate::TrajectoryPanels& panels,
                              const aggregate::CorrelationReport& correlations, int room) {
    std::vector<std::pair<std::string, std::string>> tables;
    for (const auto& s : trajectory_specs()) tables.emplace_back(s.name, trajectory_csv(summaries, room, s.features));
    tables.emplace_back("flow_conditions", conditions_csv(summaries, room));
    tables.emplace_back("trajectories", panels_csv(panels));
    tables.emplace_back("correlation_heatmap", heatmap_csv(correlations));
    std::vector<Plot> out;
    for (auto& [name, csv] : tables) {
        const auto rows = count_rows(csv);
        if (rows == 0) continue;
        auto svg = render_plot(name, csv);
        out.push_back({name, std::move(csv), std::move(svg), fmt::format("{} data rows", rows)});
    }
    if (out.empty()) throw ValidationError("empty results");
    return out;
}

}  // namespace aviary::report

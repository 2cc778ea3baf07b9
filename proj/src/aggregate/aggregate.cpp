#include "aviary/aggregate/aggregate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <tuple>

#include <fmt/format.h>

#include "aviary/error.hpp"
#include "aviary/ingest/csv.hpp"
#include "aviary/stats/report_json.hpp"

namespace aviary::aggregate {

namespace {

using ingest::format_double;

// Key order: room, week, modality, feature rank, feature name.
using SummaryKey = std::tuple<int, int, int, int, std::string>;

int feature_rank(std::string_view feature) {
    static constexpr std::array<std::string_view, 17> order = {
        "head_temp_mean",  "foot_temp_mean",    "spectral_centroid", "spectral_bandwidth", "spectral_rolloff",
        "zcr",             "rms",               "ste",               "flow_before",        "flow_during",
        "flow_after",      "ambient_temp",      "rel_humidity",      "ambient_temp_am",    "ambient_temp_pm",
        "rel_humidity_am", "rel_humidity_pm",
    };
    const auto it = std::find(order.begin(), order.end(), feature);
    return it == order.end() ? static_cast<int>(order.size()) : static_cast<int>(it - order.begin());
}

bool all_equal(const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

class Accumulator {
public:
    void add(int room, int week, Modality m, std::string_view feature, double value) {
        groups_[{room, week, static_cast<int>(m), feature_rank(feature), std::string(feature)}].push_back(value);
    }

    std::vector<WeeklySummary> finish() const {
        std::vector<WeeklySummary> out;
        out.reserve(groups_.size());
        for (const auto& [key, values] : groups_) {
            WeeklySummary s;
            s.room = std::get<0>(key);
            s.week = std::get<1>(key);
            s.modality = static_cast<Modality>(std::get<2>(key));
            s.feature = std::get<4>(key);
            s.n = values.size();
            // Identical observations summarize exactly: no rounding residue in mean or sd.
            const bool constant = all_equal(values);
            s.mean = constant ? values.front() : stats::mean(values);
            if (values.size() >= 2) s.sd = constant ? 0.0 : stats::sample_sd(values);
            out.push_back(std::move(s));
        }
        return out;
    }

private:
    std::map<SummaryKey, std::vector<double>> groups_;
};

std::optional<std::size_t> roster_index(std::string_view name) {
    const auto it = std::find(kFeatureColumns.begin(), kFeatureColumns.end(), name);
    if (it == kFeatureColumns.end()) return std::nullopt;
    return static_cast<std::size_t>(it - kFeatureColumns.begin());
}

}  // namespace

std::string_view modality_name(Modality m) noexcept {
    switch (m) {
        case Modality::Thermal: return "thermal";
        case Modality::Acoustic: return "acoustic";
        case Modality::Flow: return "flow";
        case Modality::Env: return "env";
    }
    return "unknown";
}

double acoustic_value(const acoustic::AcousticFeatureVector& v, std::string_view feature) {
    if (feature == "spectral_centroid") return v.spectral_centroid_hz;
    if (feature == "spectral_bandwidth") return v.spectral_bandwidth_hz;
    if (feature == "spectral_rolloff") return v.spectral_rolloff_hz;
    if (feature == "zcr") return v.zero_crossing_rate;
    if (feature == "rms") return v.rms_amplitude;
    if (feature == "ste") return v.short_term_energy;
    throw ValidationError(fmt::format("unknown acoustic feature '{}'", feature));
}

ThermalAggregation weekly_thermal(const std::vector<ingest::ThermalRecord>& records) {
    ThermalAggregation out;
    Accumulator acc;
    for (const auto& r : records) {
        if (r.week <= kLastExcludedThermalWeek) {
            ++out.excluded;
            continue;
        }
        acc.add(r.room, r.week, Modality::Thermal,
                r.region == ingest::Region::Head ? "head_temp_mean" : "foot_temp_mean", r.t_mean_c);
    }
    out.summaries = acc.finish();
    return out;
}

std::vector<WeeklySummary> weekly_acoustic(const std::vector<acoustic::AcousticFeatureVector>& features) {
    Accumulator acc;
    for (const auto& v : features) {
        for (auto name : kAcousticFeatures) acc.add(v.room, v.week, Modality::Acoustic, name, acoustic_value(v, name));
    }
    return acc.finish();
}

FlowAggregation weekly_flow(const std::vector<ClipIntensity>& clips) {
    FlowAggregation out;
    Accumulator acc;
    for (const auto& c : clips) {
        if (c.week < kFirstVideoWeek) {
            out.warnings.push_back(
                fmt::format("clip '{}' week {} rejected: video unavailable weeks 1-4", c.clip_id, c.week));
            continue;
        }
        acc.add(c.room, c.week, Modality::Flow, "flow_before", c.values.before);
        acc.add(c.room, c.week, Modality::Flow, "flow_during", c.values.during);
        acc.add(c.room, c.week, Modality::Flow, "flow_after", c.values.after);
    }
    out.summaries = acc.finish();
    return out;
}

EnvAggregation weekly_env(const std::vector<ingest::EnvRecord>& records) {
    EnvAggregation out;
    Accumulator acc;
    std::map<std::pair<int, int>, std::set<ingest::Session>> sessions;
    for (const auto& r : records) {
        const bool am = r.session == ingest::Session::AM;
        acc.add(r.room, r.week, Modality::Env, "ambient_temp", r.temp_c);
        acc.add(r.room, r.week, Modality::Env, "rel_humidity", r.rh_pct);
        acc.add(r.room, r.week, Modality::Env, am ? "ambient_temp_am" : "ambient_temp_pm", r.temp_c);
        acc.add(r.room, r.week, Modality::Env, am ? "rel_humidity_am" : "rel_humidity_pm", r.rh_pct);
        sessions[{r.room, r.week}].insert(r.session);
    }
    for (const auto& [key, set] : sessions) {
        if (set.size() == 1) {
            out.warnings.push_back(fmt::format("room {} week {} env readings {} only", key.first, key.second,
                                               ingest::session_name(*set.begin())));
        }
    }
    out.summaries = acc.finish();
    return out;
}

std::size_t WeeklyFeatureTable::missing_cells() const {
    return static_cast<std::size_t>(std::count_if(cells.begin(), cells.end(), [](const auto& c) { return !c; }));
}

WeeklyFeatureTable build_feature_table(const std::vector<WeeklySummary>& summaries,
                                       const std::vector<ingest::EnvRecord>& env_records, int room) {
    WeeklyFeatureTable t;
    for (int w = kFirstTableWeek; w <= kLastTableWeek; ++w) t.weeks.push_back(w);
    t.columns.assign(kFeatureColumns.begin(), kFeatureColumns.end());
    t.cells.assign(t.weeks.size() * t.columns.size(), std::nullopt);

    auto place = [&](const WeeklySummary& s) {
        if (s.room != room || s.week < kFirstTableWeek || s.week > kLastTableWeek) return;
        const auto col = roster_index(s.feature);
        if (!col) return;
        t.at(static_cast<std::size_t>(s.week - kFirstTableWeek), *col) = s.mean;
    };
    for (const auto& s : summaries) {
        if (s.modality != Modality::Env) place(s);
    }
    std::vector<ingest::EnvRecord> room_env;
    std::copy_if(env_records.begin(), env_records.end(), std::back_inserter(room_env),
                 [&](const auto& r) { return r.room == room; });
    auto env = weekly_env(room_env);
    for (const auto& s : env.summaries) place(s);
    for (auto& w : env.warnings) t.warnings.push_back(std::move(w));

    std::size_t populated = 0;
    for (std::size_t r = 0; r < t.weeks.size(); ++r) {
        bool any = false;
        for (std::size_t c = 0; c < t.columns.size(); ++c) any = any || t.at(r, c).has_value();
        if (any) ++populated;
    }
    if (populated < 3) {
        throw ValidationError(fmt::format("feature table has {} populated weeks; at least 3 required", populated));
    }
    return t;
}

std::string feature_table_to_csv(const WeeklyFeatureTable& table) {
    std::string out = "week";
    for (const auto& c : table.columns) out += "," + ingest::csv_escape(c);
    out += ",mask\n";
    for (std::size_t r = 0; r < table.weeks.size(); ++r) {
        out += std::to_string(table.weeks[r]);
        std::string mask;
        for (std::size_t c = 0; c < table.columns.size(); ++c) {
            const auto& v = table.at(r, c);
            out += ",";
            if (v) out += format_double(*v);
            mask += v ? '0' : '1';
        }
        out += "," + mask + "\n";
    }
    return out;
}

WeeklyFeatureTable feature_table_from_csv(std::string_view text) {
    const auto csv = ingest::parse_csv(text);
    if (csv.header.size() < 3 || csv.header.front() != "week" || csv.header.back() != "mask") {
        throw ParseError("feature table header must be week,<features...>,mask", ParseError::Unit::Row, 1);
    }
    WeeklyFeatureTable t;
    t.columns.assign(csv.header.begin() + 1, csv.header.end() - 1);
    const std::size_t cols = t.columns.size();
    for (const auto& row : csv.rows) {
        if (row.fields.size() != cols + 2) {
            throw ParseError("feature table field count mismatch", ParseError::Unit::Row, row.line);
        }
        const auto week = ingest::parse_integer(row.fields.front());
        if (!week) throw ParseError("unparsable week", ParseError::Unit::Row, row.line);
        t.weeks.push_back(static_cast<int>(*week));
        const std::string& mask = row.fields.back();
        if (mask.size() != cols) throw ParseError("mask length mismatch", ParseError::Unit::Row, row.line);
        for (std::size_t c = 0; c < cols; ++c) {
            const std::string& cell = row.fields[c + 1];
            const bool missing = mask[c] == '1';
            if (mask[c] != '0' && mask[c] != '1') throw ParseError("mask must be 0/1", ParseError::Unit::Row, row.line);
            if (missing != cell.empty()) {
                throw ParseError(fmt::format("cell '{}' disagrees with mask", t.columns[c]), ParseError::Unit::Row,
                                 row.line);
            }
            if (missing) {
                t.cells.emplace_back(std::nullopt);
            } else {
                const auto v = ingest::parse_double(cell);
                if (!v) {
                    throw ParseError(fmt::format("unparsable number in {}", t.columns[c]), ParseError::Unit::Row,
                                     row.line);
                }
                t.cells.emplace_back(*v);
            }
        }
    }
    return t;
}

CorrelationReport correlate_all(const WeeklyFeatureTable& table, double q_threshold) {
    if (!(q_threshold > 0.0 && q_threshold <= 1.0)) throw ValidationError("q threshold must lie in (0, 1]");
    // Canonical column order: roster first, then any other columns by name.
    std::vector<std::size_t> order(table.columns.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    auto rank = [&](std::size_t c) {
        const auto r = roster_index(table.columns[c]);
        return std::make_pair(r.value_or(kFeatureColumns.size()), table.columns[c]);
    };
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rank(a) < rank(b); });

    // Rows in week order so results do not depend on row order.
    std::vector<std::size_t> rows(table.weeks.size());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    std::sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t b) { return table.weeks[a] < table.weeks[b]; });

    CorrelationReport report;
    report.q_threshold = q_threshold;
    std::vector<stats::LabeledP> family;
    std::vector<std::size_t> family_index;
    for (std::size_t i = 0; i < order.size(); ++i) {
        for (std::size_t j = i + 1; j < order.size(); ++j) {
            CorrelationEntry e;
            e.feature_a = table.columns[order[i]];
            e.feature_b = table.columns[order[j]];
            std::vector<double> x, y;
            for (std::size_t r : rows) {
                const auto& a = table.at(r, order[i]);
                const auto& b = table.at(r, order[j]);
                if (a && b) {
                    x.push_back(*a);
                    y.push_back(*b);
                }
            }
            e.n_pairs = x.size();
            if (x.size() >= 3 && !all_equal(x) && !all_equal(y)) {
                const auto res = stats::pearson(x, y);
                e.r = res.effect;
                e.p_raw = res.p_value;
                family.push_back({e.feature_a + "|" + e.feature_b, res.p_value});
                family_index.push_back(report.entries.size());
            }
            report.entries.push_back(std::move(e));
        }
    }
    report.family_size = family.size();
    if (!family.empty()) {
        const auto adjusted = stats::bh_fdr(family, q_threshold);
        for (std::size_t k = 0; k < adjusted.size(); ++k) {
            auto& e = report.entries[family_index[k]];
            e.q = adjusted[k].q_value;
            e.significant = adjusted[k].significant;
        }
    }
    return report;
}

std::string correlations_to_csv(const CorrelationReport& report) {
    std::string out = "feature_a,feature_b,r,p_raw,q,significant,n_pairs\n";
    auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
    for (const auto& e : report.entries) {
        out += fmt::format("{},{},{},{},{},{},{}\n", ingest::csv_escape(e.feature_a), ingest::csv_escape(e.feature_b),
                           opt(e.r), opt(e.p_raw), opt(e.q), e.significant ? "true" : "false", e.n_pairs);
    }
    return out;
}

namespace {

std::optional<double> optional_cell(const std::string& cell, std::size_t line, std::string_view what) {
    if (cell.empty()) return std::nullopt;
    const auto v = ingest::parse_double(cell);
    if (!v) throw ParseError(fmt::format("unparsable {}", what), ParseError::Unit::Row, line);
    return *v;
}

std::size_t count_cell(const std::string& cell, std::size_t line, std::string_view what) {
    const auto v = ingest::parse_integer(cell);
    if (!v || *v < 0) throw ParseError(fmt::format("unparsable {}", what), ParseError::Unit::Row, line);
    return static_cast<std::size_t>(*v);
}

void expect_header(const ingest::CsvTable& csv, std::string_view header) {
    std::string got;
    for (const auto& h : csv.header) got += (got.empty() ? "" : ",") + h;
    if (got != header) throw ParseError(fmt::format("header must be {}", header), ParseError::Unit::Row, 1);
}

}  // namespace

CorrelationReport correlations_from_csv(std::string_view text, double q_threshold) {
    const auto csv = ingest::parse_csv(text);
    expect_header(csv, "feature_a,feature_b,r,p_raw,q,significant,n_pairs");
    CorrelationReport rep;
    rep.q_threshold = q_threshold;
    for (const auto& row : csv.rows) {
        if (row.fields.size() != 7) throw ParseError("correlation field count mismatch", ParseError::Unit::Row, row.line);
        CorrelationEntry e;
        e.feature_a = row.fields[0];
        e.feature_b = row.fields[1];
        e.r = optional_cell(row.fields[2], row.line, "r");
        e.p_raw = optional_cell(row.fields[3], row.line, "p_raw");
        e.q = optional_cell(row.fields[4], row.line, "q");
        if (row.fields[5] != "true" && row.fields[5] != "false") {
            throw ParseError("significant must be true or false", ParseError::Unit::Row, row.line);
        }
        e.significant = row.fields[5] == "true";
        e.n_pairs = count_cell(row.fields[6], row.line, "n_pairs");
        if (e.r) ++rep.family_size;
        rep.entries.push_back(std::move(e));
    }
    return rep;
}

std::vector<WeeklySummary> summaries_from_csv(std::string_view text) {
    const auto csv = ingest::parse_csv(text);
    expect_header(csv, "room,week,modality,feature,mean,sd,n");
    std::vector<WeeklySummary> out;
    for (const auto& row : csv.rows) {
        if (row.fields.size() != 7) throw ParseError("summary field count mismatch", ParseError::Unit::Row, row.line);
        WeeklySummary s;
        s.room = static_cast<int>(count_cell(row.fields[0], row.line, "room"));
        s.week = static_cast<int>(count_cell(row.fields[1], row.line, "week"));
        bool known = false;
        for (auto m : {Modality::Thermal, Modality::Acoustic, Modality::Flow, Modality::Env}) {
            if (row.fields[2] == modality_name(m)) {
                s.modality = m;
                known = true;
            }
        }
        if (!known) throw ParseError(fmt::format("unknown modality '{}'", row.fields[2]), ParseError::Unit::Row, row.line);
        s.feature = row.fields[3];
        const auto mean = optional_cell(row.fields[4], row.line, "mean");
        if (!mean) throw ParseError("mean is required", ParseError::Unit::Row, row.line);
        s.mean = *mean;
        s.sd = optional_cell(row.fields[5], row.line, "sd");
        s.n = count_cell(row.fields[6], row.line, "n");
        out.push_back(std::move(s));
    }
    return out;
}

void PhaseRule::validate() const {
    if (early_first > early_last || late_first > late_last) throw ValidationError("phase bounds out of order");
    if (early_last >= late_first) throw ValidationError("early and late phases overlap");
}

std::string PhaseRule::describe() const {
    return fmt::format("weeks {}-{} paired with weeks {}-{} by ordinal position", early_first, early_last, late_first,
                       late_last);
}

std::vector<WeekConditions> flow_condition_means(const std::vector<WeeklySummary>& summaries, int room) {
    std::map<int, std::array<std::optional<double>, 3>> by_week;
    for (const auto& s : summaries) {
        if (s.room != room || s.modality != Modality::Flow) continue;
        auto& slot = by_week[s.week];
        if (s.feature == "flow_before") slot[0] = s.mean;
        if (s.feature == "flow_during") slot[1] = s.mean;
        if (s.feature == "flow_after") slot[2] = s.mean;
    }
    std::vector<WeekConditions> out;
    for (const auto& [week, v] : by_week) {
        if (v[0] && v[1] && v[2]) out.push_back({week, *v[0], *v[1], *v[2]});
    }
    return out;
}

ContrastResult early_late_contrast(const std::vector<WeekConditions>& weekly, const PhaseRule& rule) {
    rule.validate();
    std::map<int, const WeekConditions*> by_week;
    for (const auto& w : weekly) {
        if (!by_week.emplace(w.week, &w).second) throw ValidationError(fmt::format("duplicate week {}", w.week));
    }
    ContrastResult out;
    out.pairing_rule = rule.describe();
    const int positions = std::min(rule.early_last - rule.early_first, rule.late_last - rule.late_first) + 1;
    for (int p = 0; p < positions; ++p) {
        const auto e = by_week.find(rule.early_first + p);
        const auto l = by_week.find(rule.late_first + p);
        if (e == by_week.end() || l == by_week.end()) continue;
        out.pairs.emplace_back(e->first, l->first);
        out.early_differentials.push_back(e->second->during - e->second->before);
        out.late_differentials.push_back(l->second->during - l->second->before);
    }
    if (out.pairs.size() < 3) {
        throw ValidationError(fmt::format("insufficient weeks: {} usable early/late pairs, need 3", out.pairs.size()));
    }

    std::vector<double> d(out.pairs.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = out.early_differentials[i] - out.late_differentials[i];
    if (all_equal(d)) {
        auto& r = out.early_vs_late;
        r.method = stats::Method::PairedT;
        r.df1 = static_cast<double>(d.size()) - 1.0;
        r.n = d.size();
        if (d.front() == 0.0) {
            r.statistic = 0.0;
            r.p_value = 1.0;
            r.notes.push_back("identical phases");
        } else {
            r.statistic = std::copysign(std::numeric_limits<double>::infinity(), d.front());
            r.p_value = 0.0;
            r.notes.push_back("constant nonzero differential");
        }
    } else {
        out.early_vs_late = stats::paired_t(out.early_differentials, out.late_differentials);
    }
    out.early_vs_late.notes.push_back(out.pairing_rule);

    std::vector<double> during, before;
    for (const auto& [week, w] : by_week) {
        during.push_back(w->during);
        before.push_back(w->before);
        if (w->during > w->before) ++out.weeks_during_above_before;
    }
    out.weeks_total = by_week.size();
    std::vector<double> diff(during.size());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = during[i] - before[i];
    if (during.size() >= 2 && !all_equal(diff)) out.during_vs_before = stats::paired_t(during, before);
    return out;
}

nlohmann::ordered_json to_json(const ContrastResult& c) {
    nlohmann::ordered_json j;
    j["pairing_rule"] = c.pairing_rule;
    auto pairs = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < c.pairs.size(); ++i) {
        pairs.push_back({{"early_week", c.pairs[i].first},
                         {"late_week", c.pairs[i].second},
                         {"early_differential", stats::finite_or_null(c.early_differentials[i])},
                         {"late_differential", stats::finite_or_null(c.late_differentials[i])}});
    }
    j["pairs"] = pairs;
    j["early_vs_late"] = stats::to_json(c.early_vs_late, {"early", "late"});
    j["during_vs_before"] = c.during_vs_before ? stats::to_json(*c.during_vs_before, {"during", "before"})
                                               : nlohmann::ordered_json();
    j["weeks_during_above_before"] = c.weeks_during_above_before;
    j["weeks_total"] = c.weeks_total;
    return j;
}

TrajectoryPanels trajectory_panel(const WeeklyFeatureTable& table) {
    TrajectoryPanels out;
    out.weeks = table.weeks;
    std::vector<std::size_t> kept;
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        std::vector<double> values;
        for (std::size_t r = 0; r < table.weeks.size(); ++r) {
            if (const auto& v = table.at(r, c)) values.push_back(*v);
        }
        if (values.size() < 2 || all_equal(values)) {
            out.warnings.push_back(fmt::format("column '{}' dropped from trajectories: zero variance",
                                               table.columns[c]));
            continue;
        }
        kept.push_back(c);
        out.columns.push_back(table.columns[c]);
    }
    out.z.assign(table.weeks.size() * kept.size(), std::nullopt);
    for (std::size_t k = 0; k < kept.size(); ++k) {
        std::vector<double> values;
        std::vector<std::size_t> rows;
        for (std::size_t r = 0; r < table.weeks.size(); ++r) {
            if (const auto& v = table.at(r, kept[k])) {
                values.push_back(*v);
                rows.push_back(r);
            }
        }
        const auto z = stats::zscore(values);
        for (std::size_t i = 0; i < rows.size(); ++i) out.z[rows[i] * kept.size() + k] = z[i];
    }
    auto present = [&](std::vector<std::string> names) {
        std::erase_if(names, [&](const std::string& n) {
            return std::find(out.columns.begin(), out.columns.end(), n) == out.columns.end();
        });
        return names;
    };
    out.panels.emplace_back("A", present({"head_temp_mean", "spectral_centroid", "flow_before"}));
    out.panels.emplace_back("B", present({"foot_temp_mean", "rms"}));
    out.panels.emplace_back("C", present({"head_temp_mean", "spectral_centroid", "flow_before", "foot_temp_mean",
                                          "rms", "ambient_temp"}));
    return out;
}

std::vector<std::string> WeekGroups::labels() const {
    std::vector<std::string> out;
    for (int w : weeks) out.push_back(fmt::format("week {}", w));
    return out;
}

WeekGroups acoustic_groups(const std::vector<acoustic::AcousticFeatureVector>& features, std::string_view feature,
                           int room) {
    std::map<int, std::vector<double>> by_week;
    for (const auto& v : features) {
        if (v.room == room) by_week[v.week].push_back(acoustic_value(v, feature));
    }
    WeekGroups g;
    for (auto& [w, values] : by_week) {
        g.weeks.push_back(w);
        g.groups.push_back(std::move(values));
    }
    return g;
}

WeekGroups thermal_groups(const std::vector<ingest::ThermalRecord>& records, ingest::Region region, int room) {
    std::map<int, std::vector<double>> by_week;
    for (const auto& r : records) {
        if (r.room == room && r.region == region && r.week > kLastExcludedThermalWeek) {
            by_week[r.week].push_back(r.t_mean_c);
        }
    }
    WeekGroups g;
    for (auto& [w, values] : by_week) {
        g.weeks.push_back(w);
        g.groups.push_back(std::move(values));
    }
    return g;
}

std::string summaries_to_csv(const std::vector<WeeklySummary>& summaries) {
    std::string out = "room,week,modality,feature,mean,sd,n\n";
    for (const auto& s : summaries) {
        out += fmt::format("{},{},{},{},{},{},{}\n", s.room, s.week, modality_name(s.modality),
                           ingest::csv_escape(s.feature), format_double(s.mean), s.sd ? format_double(*s.sd) : "",
                           s.n);
    }
    return out;
}

}  // namespace aviary::aggregate

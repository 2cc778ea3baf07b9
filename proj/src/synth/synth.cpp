#include "aviary/synth/synth.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "aviary/error.hpp"
#include "aviary/ingest/audio.hpp"
#include "aviary/ingest/csv.hpp"
#include "aviary/ingest/frames.hpp"
#include "aviary/ingest/records.hpp"
#include "aviary/parallel.hpp"
#include "aviary/synth/rng.hpp"
#include "aviary/synth/texture.hpp"
#include "util/strict_json.hpp"

namespace aviary::synth {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr std::array<const char*, 8> kDrivers = {
    "spectral_centroid", "rms",           "head_temp_mean", "foot_temp_mean",
    "ambient_temp",      "rel_humidity",  "flow_baseline",  "flow_response",
};

constexpr std::array<const char*, 10> kTableFeatures = {
    "flow_before", "flow_during",    "flow_after",     "spectral_centroid", "zcr",
    "rms",         "head_temp_mean", "foot_temp_mean", "ambient_temp",      "rel_humidity",
};

constexpr std::array<const char*, 4> kModalities = {"acoustic", "flow", "thermal", "env"};

// Independent RNG streams; the low digits carry room, week and clip.
enum Stream : std::uint64_t {
    kLatent = 1,
    kAudio = 10'000'000,
    kVideo = 20'000'000,
    kThermal = 30'000'000,
    kEnv = 40'000'000,
};

std::uint64_t stream_id(Stream s, int room, int week, int index) {
    return s + static_cast<std::uint64_t>(room) * 100'000 + static_cast<std::uint64_t>(week) * 1'000 +
           static_cast<std::uint64_t>(index);
}

bool is_driver(std::string_view name) {
    return std::find(kDrivers.begin(), kDrivers.end(), name) != kDrivers.end();
}

// Table features and drivers both resolve to the driver carrying their latent.
std::optional<std::string> resolve_driver(std::string_view name) {
    if (name == "zcr") return "spectral_centroid";
    if (name == "flow_before" || name == "flow_after") return "flow_baseline";
    if (name == "flow_during") return "flow_response";
    if (is_driver(name)) return std::string(name);
    return std::nullopt;
}

std::string_view shape_name(TrendShape s) { return s == TrendShape::Linear ? "linear" : "exp_plateau"; }

double trend_value(const Trend& t, int week, int first_week, int last_week) {
    const double origin = t.origin.value_or(first_week);
    if (t.shape == TrendShape::ExpPlateau) return t.end - (t.end - t.start) * std::exp(-(week - origin) / t.tau);
    if (last_week == origin) return t.start;
    return t.start + (t.end - t.start) * (week - origin) / (last_week - origin);
}

bool affects(const SynthConfig& c, int week, std::string_view modality, double* magnitude) {
    bool hit = false;
    for (const auto& d : c.disturbances) {
        if (d.week == week && std::find(d.modalities.begin(), d.modalities.end(), modality) != d.modalities.end()) {
            *magnitude += d.magnitude;
            hit = true;
        }
    }
    return hit;
}

double sample_mean(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double pearson_r(const std::vector<double>& a, const std::vector<double>& b) {
    const double ma = sample_mean(a), mb = sample_mean(b);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

// Sample mean 0, sample sd 1; nullopt for a constant vector.
std::optional<Eigen::VectorXd> standardize(const Eigen::VectorXd& v) {
    const double m = v.mean();
    const Eigen::VectorXd c = v.array() - m;
    const double sd = std::sqrt(c.squaredNorm() / static_cast<double>(v.size() - 1));
    if (!(sd > 1e-12 * (1.0 + std::abs(m)))) return std::nullopt;
    return Eigen::VectorXd(c / sd);
}

// Couplings grouped by child driver, children in dependency order.
struct ChildPlan {
    std::string child;
    std::vector<std::string> parents;
    std::vector<double> targets;
};

std::vector<ChildPlan> plan_couplings(const SynthConfig& c) {
    std::map<std::string, ChildPlan> by_child;
    for (const auto& cp : c.couplings) {
        const auto a = *resolve_driver(cp.feature_a);
        const auto b = *resolve_driver(cp.feature_b);
        auto& plan = by_child[b];
        plan.child = b;
        if (std::find(plan.parents.begin(), plan.parents.end(), a) != plan.parents.end()) {
            throw ValidationError(fmt::format("coupling {} -> {} listed twice", a, b));
        }
        plan.parents.push_back(a);
        plan.targets.push_back(cp.r);
    }
    std::vector<ChildPlan> order;
    while (!by_child.empty()) {
        bool progressed = false;
        for (auto it = by_child.begin(); it != by_child.end();) {
            const bool ready = std::none_of(it->second.parents.begin(), it->second.parents.end(),
                                            [&](const auto& p) { return by_child.contains(p); });
            if (ready) {
                order.push_back(std::move(it->second));
                it = by_child.erase(it);
                progressed = true;
            } else {
                ++it;
            }
        }
        if (!progressed) throw ValidationError("coupling cycle among " + by_child.begin()->first);
    }
    return order;
}

// Population latent correlation among drivers implied by the couplings.
Eigen::MatrixXd latent_correlation(const std::vector<ChildPlan>& plan) {
    const auto n = static_cast<Eigen::Index>(kDrivers.size());
    Eigen::MatrixXd r = Eigen::MatrixXd::Identity(n, n);
    auto idx = [](const std::string& name) {
        return static_cast<Eigen::Index>(std::find(kDrivers.begin(), kDrivers.end(), name) - kDrivers.begin());
    };
    for (const auto& p : plan) {
        const auto k = static_cast<Eigen::Index>(p.parents.size());
        Eigen::MatrixXd c(k, k);
        Eigen::VectorXd t(k);
        for (Eigen::Index i = 0; i < k; ++i) {
            t(i) = p.targets[static_cast<std::size_t>(i)];
            for (Eigen::Index j = 0; j < k; ++j) c(i, j) = r(idx(p.parents[i]), idx(p.parents[j]));
        }
        const Eigen::VectorXd beta = c.ldlt().solve(t);
        const double residual = 1.0 - t.dot(beta);
        if (!(residual > 1e-9)) {
            throw ValidationError(fmt::format(
                "infeasible coupling matrix: targets into {} leave residual variance {:.3g}", p.child, residual));
        }
        const auto b = idx(p.child);
        for (Eigen::Index other = 0; other < n; ++other) {
            if (other == b) continue;
            double v = 0.0;
            for (Eigen::Index i = 0; i < k; ++i) v += beta(i) * r(idx(p.parents[i]), other);
            r(b, other) = r(other, b) = v;
        }
    }
    return r;
}

// Table feature = deterministic part + sum of loadings on standardized driver latents.
std::map<std::string, double> loadings(const SynthConfig& c, std::string_view feature) {
    auto sd = [&](const char* d) { return c.trends.at(d).weekly_sd; };
    if (feature == "flow_before") return {{"flow_baseline", sd("flow_baseline")}};
    if (feature == "flow_during") return {{"flow_baseline", sd("flow_baseline")}, {"flow_response", sd("flow_response")}};
    if (feature == "flow_after") {
        return {{"flow_baseline", sd("flow_baseline")}, {"flow_response", c.flow.after_fraction * sd("flow_response")}};
    }
    if (feature == "zcr") return {{"spectral_centroid", 2.0 * sd("spectral_centroid") / c.acoustic.sample_rate}};
    return {{std::string(feature), sd(std::string(feature).c_str())}};
}

std::string clip_stem(int room, int week, int day, int index) {
    return fmt::format("r{}_w{:02d}_d{}_c{:02d}", room, week, day, index + 1);
}

int clip_day(int index, int per_week) { return 1 + index * 7 / per_week; }

ingest::Date week_day_date(const ingest::Date& hatch, int week, int day) {
    return ingest::Date{std::chrono::sys_days{hatch} + std::chrono::days{7 * week + day - 1}};
}

ingest::Timestamp at_time(const ingest::Date& date, int hour, double seconds = 0.0) {
    return std::chrono::sys_days{date} + std::chrono::hours{hour} +
           std::chrono::seconds{static_cast<long long>(std::llround(seconds))};
}

double round_to(double v, double step) { return std::nearbyint(v / step) * step; }

// RBJ band-pass biquad (constant 0 dB peak gain) applied in place.
void band_pass(std::vector<double>& x, double sample_rate, double low_hz, double high_hz) {
    const double centre = std::sqrt(low_hz * high_hz);
    const double w0 = 2.0 * std::numbers::pi * centre / sample_rate;
    const double octaves = std::log2(high_hz / low_hz);
    const double alpha = std::sin(w0) * std::sinh(std::log(2.0) / 2.0 * octaves * w0 / std::sin(w0));
    const double a0 = 1.0 + alpha;
    const double b0 = alpha / a0, b2 = -alpha / a0;
    const double a1 = -2.0 * std::cos(w0) / a0, a2 = (1.0 - alpha) / a0;
    double x1 = 0.0, x2 = 0.0, y1 = 0.0, y2 = 0.0;
    for (double& v : x) {
        const double y = b0 * v + b2 * x2 - a1 * y1 - a2 * y2;
        x2 = x1;
        x1 = v;
        y2 = y1;
        y1 = y;
        v = y;
    }
}

using detail::StrictObject;

Trend trend_from_json(const json& j, Trend t, const std::string& path) {
    StrictObject o(j, path);
    o.read("start", t.start);
    o.read("end", t.end);
    std::string shape(shape_name(t.shape));
    o.read("shape", shape);
    if (shape == "linear") {
        t.shape = TrendShape::Linear;
    } else if (shape == "exp_plateau") {
        t.shape = TrendShape::ExpPlateau;
    } else {
        throw ValidationError(fmt::format("{}.shape must be linear or exp_plateau", path));
    }
    o.read("tau", t.tau);
    if (const auto* origin = o.child("origin")) {
        if (origin->is_null()) {
            t.origin.reset();
        } else if (origin->is_number_integer()) {
            t.origin = origin->get<int>();
        } else {
            throw ValidationError(path + ".origin must be an integer");
        }
    }
    o.read("weekly_sd", t.weekly_sd);
    o.read("obs_sd", t.obs_sd);
    o.finish();
    return t;
}

}  // namespace

SynthConfig SynthConfig::defaults() {
    SynthConfig c;
    using enum TrendShape;
    c.trends = {
        {"spectral_centroid", {3600.0, 2400.0, ExpPlateau, 1.0, std::nullopt, 80.0, 40.0}},
        {"rms", {0.04, 0.10, ExpPlateau, 1.5, std::nullopt, 0.004, 0.004}},
        {"head_temp_mean", {37.0, 38.0, ExpPlateau, 1.0, std::nullopt, 0.25, 0.8}},
        {"foot_temp_mean", {30.0, 36.0, ExpPlateau, 2.5, std::nullopt, 0.35, 1.0}},
        {"ambient_temp", {22.0, 22.0, Linear, 3.0, std::nullopt, 1.2, 0.5}},
        {"rel_humidity", {65.0, 65.0, Linear, 3.0, std::nullopt, 5.0, 2.0}},
        {"flow_baseline", {1.0, 1.0, Linear, 3.0, std::nullopt, 0.1, 0.05}},
        {"flow_response", {3.0, 0.8, ExpPlateau, 6.0, 5, 0.15, 0.1}},
    };
    c.couplings = {{"zcr", "rel_humidity", 0.70}, {"head_temp_mean", "foot_temp_mean", 0.85}};
    c.disturbances = {{12, 0.3, {"flow"}}, {19, 0.3, {"acoustic", "flow"}}};
    return c;
}

void SynthConfig::validate() const {
    if (first_week < 0 || last_week < first_week) throw ValidationError("weeks must satisfy 0 <= first <= last");
    if (rooms.empty()) throw ValidationError("rooms must not be empty");
    for (int r : rooms) {
        if (r < ingest::kMinRoom || r > ingest::kMaxRoom) throw ValidationError(fmt::format("room {} out of range", r));
    }
    if (std::set<int>(rooms.begin(), rooms.end()).size() != rooms.size()) throw ValidationError("duplicate room");
    if (!ingest::parse_date(hatch_date)) throw ValidationError("hatch_date must be YYYY-MM-DD");
    if (coupling_first_week < first_week || coupling_last_week > last_week ||
        coupling_last_week - coupling_first_week < 2) {
        throw ValidationError("coupling weeks must span at least 3 configured weeks");
    }
    if (thermal_images_per_week < 0) throw ValidationError("thermal images_per_week must be >= 0");

    if (acoustic.clips_per_week < 0) throw ValidationError("acoustic clips_per_week must be >= 0");
    if (acoustic.sample_rate < 8000 || acoustic.sample_rate > 192000) {
        throw ValidationError("acoustic sample_rate must lie in [8000, 192000]");
    }
    if (!(acoustic.clip_seconds >= 0.1)) throw ValidationError("acoustic clip_seconds must be >= 0.1");
    if (!(acoustic.background_rms >= 0.0)) throw ValidationError("acoustic background_rms must be >= 0");
    if (!(acoustic.background_low_hz > 0.0 && acoustic.background_high_hz > acoustic.background_low_hz &&
          acoustic.background_high_hz < acoustic.sample_rate / 2.0)) {
        throw ValidationError("acoustic background band must satisfy 0 < low < high < sample_rate / 2");
    }
    if (!(acoustic.vibrato_hz > 0.0) || !(acoustic.vibrato_depth_hz >= 0.0)) {
        throw ValidationError("acoustic vibrato must have positive rate and non-negative depth");
    }

    if (flow.clips_per_week < 0) throw ValidationError("flow clips_per_week must be >= 0");
    if (!(flow.fps > 0.0)) throw ValidationError("flow fps must be > 0");
    if (flow.width < 32 || flow.height < 32) throw ValidationError("flow frames must be at least 32x32");
    if (!(flow.before_s > 0.0 && flow.during_s > 0.0 && flow.after_s > 0.0)) {
        throw ValidationError("flow segment lengths must be > 0");
    }
    if (!(flow.after_fraction >= 0.0)) throw ValidationError("flow after_fraction must be >= 0");
    if (!(flow.contrast > 0.0)) throw ValidationError("flow contrast must be > 0");

    for (const char* d : kDrivers) {
        const auto it = trends.find(d);
        if (it == trends.end()) throw ValidationError(fmt::format("trend for '{}' missing", d));
        const auto& t = it->second;
        if (!std::isfinite(t.start) || !std::isfinite(t.end)) throw ValidationError(fmt::format("trend {} not finite", d));
        if (t.shape == TrendShape::ExpPlateau && !(t.tau > 0.0)) throw ValidationError(fmt::format("trend {} tau must be > 0", d));
        if (!(t.weekly_sd >= 0.0) || !(t.obs_sd >= 0.0)) throw ValidationError(fmt::format("trend {} sd must be >= 0", d));
    }
    for (const auto& [name, t] : trends) {
        if (!is_driver(name)) throw ValidationError(fmt::format("unknown trend '{}'", name));
    }
    for (const auto& cp : couplings) {
        const auto a = resolve_driver(cp.feature_a);
        const auto b = resolve_driver(cp.feature_b);
        if (!a) throw ValidationError(fmt::format("unknown coupling feature '{}'", cp.feature_a));
        if (!b) throw ValidationError(fmt::format("unknown coupling feature '{}'", cp.feature_b));
        if (*a == *b) {
            throw ValidationError(fmt::format("coupling {} <-> {} shares one latent", cp.feature_a, cp.feature_b));
        }
        if (!(cp.r > -1.0 && cp.r < 1.0)) throw ValidationError(fmt::format("coupling r {} outside (-1, 1)", cp.r));
        if (!(trends.at(*a).weekly_sd > 0.0) || !(trends.at(*b).weekly_sd > 0.0)) {
            throw ValidationError(fmt::format("coupled features {} and {} need weekly_sd > 0", cp.feature_a, cp.feature_b));
        }
    }
    for (const auto& d : disturbances) {
        if (d.week < first_week || d.week > last_week) throw ValidationError(fmt::format("disturbance week {} out of range", d.week));
        if (!std::isfinite(d.magnitude)) throw ValidationError("disturbance magnitude must be finite");
        if (d.modalities.empty()) throw ValidationError("disturbance needs at least one modality");
        for (const auto& m : d.modalities) {
            if (std::find(kModalities.begin(), kModalities.end(), m) == kModalities.end()) {
                throw ValidationError(fmt::format("unknown disturbance modality '{}'", m));
            }
        }
    }
    (void)latent_correlation(plan_couplings(*this));
}

SynthConfig synth_config_from_json(const json& j) {
    SynthConfig c = SynthConfig::defaults();
    StrictObject o(j, "config");
    o.read("seed", c.seed);
    if (const auto* w = o.child("weeks")) {
        if (!w->is_array() || w->size() != 2) throw ValidationError("weeks must be [first, last]");
        c.first_week = (*w)[0].get<int>();
        c.last_week = (*w)[1].get<int>();
    }
    if (const auto* w = o.child("coupling_weeks")) {
        if (!w->is_array() || w->size() != 2) throw ValidationError("coupling_weeks must be [first, last]");
        c.coupling_first_week = (*w)[0].get<int>();
        c.coupling_last_week = (*w)[1].get<int>();
    }
    o.read("rooms", c.rooms);
    o.read("hatch_date", c.hatch_date);
    o.read("pm_temp_offset", c.pm_temp_offset);
    o.read("pm_rh_offset", c.pm_rh_offset);
    if (const auto* a = o.child("acoustic")) {
        StrictObject s(*a, "acoustic");
        s.read("clips_per_week", c.acoustic.clips_per_week);
        s.read("clip_seconds", c.acoustic.clip_seconds);
        s.read("sample_rate", c.acoustic.sample_rate);
        s.read("vibrato_hz", c.acoustic.vibrato_hz);
        s.read("vibrato_depth_hz", c.acoustic.vibrato_depth_hz);
        s.read("background_rms", c.acoustic.background_rms);
        s.read("background_low_hz", c.acoustic.background_low_hz);
        s.read("background_high_hz", c.acoustic.background_high_hz);
        s.finish();
    }
    if (const auto* f = o.child("flow")) {
        StrictObject s(*f, "flow");
        s.read("clips_per_week", c.flow.clips_per_week);
        s.read("first_week", c.flow.first_week);
        s.read("fps", c.flow.fps);
        s.read("width", c.flow.width);
        s.read("height", c.flow.height);
        s.read("before_s", c.flow.before_s);
        s.read("during_s", c.flow.during_s);
        s.read("after_s", c.flow.after_s);
        s.read("after_fraction", c.flow.after_fraction);
        s.read("contrast", c.flow.contrast);
        s.read("full_geometry", c.flow.full_geometry);
        s.finish();
    }
    if (const auto* t = o.child("thermal")) {
        StrictObject s(*t, "thermal");
        s.read("images_per_week", c.thermal_images_per_week);
        s.finish();
    }
    if (const auto* t = o.child("trends")) {
        if (!t->is_object()) throw ValidationError("trends must be an object");
        for (const auto& [name, value] : t->items()) {
            if (!is_driver(name)) throw ValidationError(fmt::format("unknown trend '{}'", name));
            c.trends[name] = trend_from_json(value, c.trends[name], "trends." + name);
        }
    }
    if (const auto* cps = o.child("couplings")) {
        if (!cps->is_array()) throw ValidationError("couplings must be an array");
        c.couplings.clear();
        for (const auto& item : *cps) {
            StrictObject s(item, "couplings[]");
            Coupling cp;
            s.read("feature_a", cp.feature_a);
            s.read("feature_b", cp.feature_b);
            s.read("r", cp.r);
            s.finish();
            c.couplings.push_back(cp);
        }
    }
    if (const auto* ds = o.child("disturbances")) {
        if (!ds->is_array()) throw ValidationError("disturbances must be an array");
        c.disturbances.clear();
        for (const auto& item : *ds) {
            StrictObject s(item, "disturbances[]");
            Disturbance d;
            s.read("week", d.week);
            s.read("magnitude", d.magnitude);
            s.read("modalities", d.modalities);
            s.finish();
            c.disturbances.push_back(d);
        }
    }
    o.finish();
    c.validate();
    return c;
}

ordered_json to_json(const SynthConfig& c) {
    ordered_json j;
    j["seed"] = c.seed;
    j["weeks"] = {c.first_week, c.last_week};
    j["coupling_weeks"] = {c.coupling_first_week, c.coupling_last_week};
    j["rooms"] = c.rooms;
    j["hatch_date"] = c.hatch_date;
    j["pm_temp_offset"] = c.pm_temp_offset;
    j["pm_rh_offset"] = c.pm_rh_offset;
    j["acoustic"] = {{"clips_per_week", c.acoustic.clips_per_week},
                     {"clip_seconds", c.acoustic.clip_seconds},
                     {"sample_rate", c.acoustic.sample_rate},
                     {"vibrato_hz", c.acoustic.vibrato_hz},
                     {"vibrato_depth_hz", c.acoustic.vibrato_depth_hz},
                     {"background_rms", c.acoustic.background_rms},
                     {"background_low_hz", c.acoustic.background_low_hz},
                     {"background_high_hz", c.acoustic.background_high_hz}};
    j["flow"] = {{"clips_per_week", c.flow.clips_per_week}, {"first_week", c.flow.first_week},
                 {"fps", c.flow.fps},                       {"width", c.flow.width},
                 {"height", c.flow.height},                 {"before_s", c.flow.before_s},
                 {"during_s", c.flow.during_s},             {"after_s", c.flow.after_s},
                 {"after_fraction", c.flow.after_fraction}, {"contrast", c.flow.contrast},
                 {"full_geometry", c.flow.full_geometry}};
    j["thermal"] = {{"images_per_week", c.thermal_images_per_week}};
    ordered_json trends = ordered_json::object();
    for (const char* d : kDrivers) {
        const auto& t = c.trends.at(d);
        trends[d] = {{"start", t.start},
                     {"end", t.end},
                     {"shape", shape_name(t.shape)},
                     {"tau", t.tau},
                     {"origin", t.origin ? ordered_json(*t.origin) : ordered_json(nullptr)},
                     {"weekly_sd", t.weekly_sd},
                     {"obs_sd", t.obs_sd}};
    }
    j["trends"] = trends;
    j["couplings"] = ordered_json::array();
    for (const auto& cp : c.couplings) {
        j["couplings"].push_back({{"feature_a", cp.feature_a}, {"feature_b", cp.feature_b}, {"r", cp.r}});
    }
    j["disturbances"] = ordered_json::array();
    for (const auto& d : c.disturbances) {
        j["disturbances"].push_back({{"week", d.week}, {"magnitude", d.magnitude}, {"modalities", d.modalities}});
    }
    return j;
}

double GroundTruth::planted_at(const std::string& feature, int week) const {
    const auto it = std::find(weeks.begin(), weeks.end(), week);
    if (it == weeks.end()) throw ValidationError(fmt::format("week {} not planted", week));
    return planted.at(feature)[static_cast<std::size_t>(it - weeks.begin())];
}

ordered_json to_json(const GroundTruth& g) {
    ordered_json j;
    j["seed"] = g.seed;
    j["weeks"] = g.weeks;
    ordered_json trend = ordered_json::object(), planted = ordered_json::object();
    for (const auto& [k, v] : g.trend) trend[k] = v;
    for (const auto& [k, v] : g.planted) planted[k] = v;
    j["trend"] = trend;
    j["planted"] = planted;
    j["couplings"] = ordered_json::array();
    for (std::size_t i = 0; i < g.couplings.size(); ++i) {
        const auto& cp = g.couplings[i];
        j["couplings"].push_back({{"feature_a", cp.feature_a},
                                  {"feature_b", cp.feature_b},
                                  {"r", cp.r},
                                  {"realized_r", g.realized_r[i]}});
    }
    j["null_pairs"] = ordered_json::array();
    for (const auto& [a, b] : g.null_pairs) j["null_pairs"].push_back({a, b});
    j["events"] = ordered_json::array();
    for (const auto& e : g.events) {
        j["events"].push_back({{"kind", e.kind},
                               {"room", e.room},
                               {"week", e.week},
                               {"timestamp", e.timestamp},
                               {"magnitude", e.magnitude},
                               {"modalities", e.modalities}});
    }
    return j;
}

namespace {

struct Planted {
    GroundTruth truth;
    std::map<std::string, std::vector<double>> drivers;  // planted driver values per week
};

std::size_t week_index(const SynthConfig& c, int week) { return static_cast<std::size_t>(week - c.first_week); }

Planted plant(const SynthConfig& c) {
    c.validate();
    Planted p;
    auto& g = p.truth;
    g.seed = c.seed;
    for (int w = c.first_week; w <= c.last_week; ++w) g.weeks.push_back(w);
    const std::size_t nw = g.weeks.size();

    // Latent draws in fixed driver order, then couplings in dependency order.
    Rng rng(Rng::derive(c.seed, kLatent));
    std::map<std::string, std::vector<double>> latent;
    for (const char* d : kDrivers) {
        auto& v = latent[d];
        v.resize(nw);
        for (auto& x : v) x = rng.normal();
    }
    std::map<std::string, std::vector<double>> driver_trend;
    for (const char* d : kDrivers) {
        auto& v = driver_trend[d];
        for (int w : g.weeks) v.push_back(trend_value(c.trends.at(d), w, c.first_week, c.last_week));
    }
    auto total = [&](const std::string& d, std::size_t i) {
        return driver_trend[d][i] + c.trends.at(d).weekly_sd * latent[d][i];
    };

    const auto plan = plan_couplings(c);
    const Eigen::MatrixXd population = latent_correlation(plan);
    const std::size_t i0 = week_index(c, c.coupling_first_week);
    const auto nc = static_cast<Eigen::Index>(c.coupling_last_week - c.coupling_first_week + 1);
    for (const auto& cp : plan) {
        const auto k = static_cast<Eigen::Index>(cp.parents.size());
        Eigen::MatrixXd x(nc, k);
        for (Eigen::Index j = 0; j < k; ++j) {
            Eigen::VectorXd col(nc);
            for (Eigen::Index i = 0; i < nc; ++i) col(i) = total(cp.parents[j], i0 + static_cast<std::size_t>(i));
            const auto z = standardize(col);
            if (!z) throw ValidationError(fmt::format("coupling parent {} has no weekly variation", cp.parents[j]));
            x.col(j) = *z;
        }
        Eigen::VectorXd e(nc);
        for (Eigen::Index i = 0; i < nc; ++i) e(i) = latent[cp.child][i0 + static_cast<std::size_t>(i)];
        // Remove the parents' span (the constant is already gone from x).
        e -= x * x.colPivHouseholderQr().solve(e);
        const auto ez = standardize(e);
        const Eigen::MatrixXd corr = x.transpose() * x / static_cast<double>(nc - 1);
        Eigen::VectorXd target(k);
        for (Eigen::Index j = 0; j < k; ++j) target(j) = cp.targets[static_cast<std::size_t>(j)];
        const Eigen::VectorXd beta = corr.colPivHouseholderQr().solve(target);
        const double residual = 1.0 - target.dot(beta);
        if (!ez || !(residual > 0.0)) {
            throw ValidationError(fmt::format(
                "infeasible coupling matrix: sampled parents of {} leave residual variance {:.3g}", cp.child, residual));
        }
        const Eigen::VectorXd child = x * beta + std::sqrt(residual) * *ez;
        for (Eigen::Index i = 0; i < nc; ++i) latent[cp.child][i0 + static_cast<std::size_t>(i)] = child(i);
    }
    for (const char* d : kDrivers) {
        auto& v = p.drivers[d];
        for (std::size_t i = 0; i < nw; ++i) v.push_back(total(d, i));
    }

    // Table features: driver values plus deterministic disturbances. Flow
    // disturbances add pixels per frame, acoustic ones scale the RMS, thermal
    // and env ones add in their own units.
    const double zcr_scale = 2.0 / c.acoustic.sample_rate;
    for (const bool noiseless : {true, false}) {
        auto& out = noiseless ? g.trend : g.planted;
        auto src = [&](const char* d, std::size_t i) { return noiseless ? driver_trend[d][i] : p.drivers[d][i]; };
        for (const char* f : kTableFeatures) out[f].resize(nw);
        out["flow_baseline"].resize(nw);
        out["flow_response"].resize(nw);
        for (std::size_t i = 0; i < nw; ++i) {
            const int w = g.weeks[i];
            double flow_shift = 0.0, gain = 0.0, thermal_shift = 0.0, env_shift = 0.0;
            affects(c, w, "flow", &flow_shift);
            affects(c, w, "acoustic", &gain);
            affects(c, w, "thermal", &thermal_shift);
            affects(c, w, "env", &env_shift);
            const double base = src("flow_baseline", i) + flow_shift;
            const double resp = src("flow_response", i);
            out["flow_baseline"][i] = base;
            out["flow_response"][i] = resp;
            out["flow_before"][i] = base;
            out["flow_during"][i] = base + resp;
            out["flow_after"][i] = base + c.flow.after_fraction * resp;
            out["spectral_centroid"][i] = src("spectral_centroid", i);
            out["zcr"][i] = zcr_scale * src("spectral_centroid", i);
            out["rms"][i] = src("rms", i) * (1.0 + gain);
            out["head_temp_mean"][i] = src("head_temp_mean", i) + thermal_shift;
            out["foot_temp_mean"][i] = src("foot_temp_mean", i) + thermal_shift;
            // Env values are AM/PM session means.
            out["ambient_temp"][i] = src("ambient_temp", i) + env_shift + c.pm_temp_offset / 2.0;
            out["rel_humidity"][i] = src("rel_humidity", i) + env_shift + c.pm_rh_offset / 2.0;
        }
    }

    g.couplings = c.couplings;
    auto window = [&](const std::vector<double>& v) {
        return std::vector<double>(v.begin() + static_cast<std::ptrdiff_t>(i0),
                                   v.begin() + static_cast<std::ptrdiff_t>(i0) + nc);
    };
    for (const auto& cp : c.couplings) {
        const auto& a = g.planted.contains(cp.feature_a) ? g.planted[cp.feature_a] : p.drivers[cp.feature_a];
        const auto& b = g.planted.contains(cp.feature_b) ? g.planted[cp.feature_b] : p.drivers[cp.feature_b];
        g.realized_r.push_back(pearson_r(window(a), window(b)));
    }

    // Expected correlation over the coupling weeks: deterministic trajectories
    // treated as fixed, latents by their population correlation. Pairs under
    // 0.1 in magnitude are structurally null.
    auto driver_index = [](const std::string& d) {
        return static_cast<Eigen::Index>(std::find(kDrivers.begin(), kDrivers.end(), d) - kDrivers.begin());
    };
    auto trend_cov = [&](const char* a, const char* b) {
        const auto va = window(g.trend[a]), vb = window(g.trend[b]);
        const double ma = sample_mean(va), mb = sample_mean(vb);
        double s = 0.0;
        for (std::size_t i = 0; i < va.size(); ++i) s += (va[i] - ma) * (vb[i] - mb);
        return s / static_cast<double>(va.size() - 1);
    };
    auto latent_cov = [&](const char* a, const char* b) {
        double s = 0.0;
        for (const auto& [da, la] : loadings(c, a)) {
            for (const auto& [db, lb] : loadings(c, b)) s += la * lb * population(driver_index(da), driver_index(db));
        }
        return s;
    };
    for (std::size_t i = 0; i < kTableFeatures.size(); ++i) {
        for (std::size_t j = i + 1; j < kTableFeatures.size(); ++j) {
            const char* a = kTableFeatures[i];
            const char* b = kTableFeatures[j];
            const double cov = trend_cov(a, b) + latent_cov(a, b);
            const double va = trend_cov(a, a) + latent_cov(a, a);
            const double vb = trend_cov(b, b) + latent_cov(b, b);
            const double denom = std::sqrt(va * vb);
            if (!(denom > 0.0) || std::abs(cov / denom) < 0.1) g.null_pairs.emplace_back(a, b);
        }
    }
    return p;
}

void add_events(const SynthConfig& c, GroundTruth& g) {
    const auto hatch = *ingest::parse_date(c.hatch_date);
    for (int room : c.rooms) {
        for (int w = std::max(c.first_week, c.flow.first_week); w <= c.last_week; ++w) {
            for (int k = 0; k < c.flow.clips_per_week; ++k) {
                const auto date = week_day_date(hatch, w, clip_day(k, c.flow.clips_per_week));
                const double before = c.flow.full_geometry ? 420.0 : c.flow.before_s;
                g.events.push_back({"caretaker_entry", room, w, ingest::format_timestamp(at_time(date, 9 + k, before)),
                                    0.0, {"flow"}});
            }
        }
        for (const auto& d : c.disturbances) {
            const bool equipment = std::find(d.modalities.begin(), d.modalities.end(), "acoustic") != d.modalities.end();
            const auto date = week_day_date(hatch, d.week, 4);
            g.events.push_back({equipment ? "equipment" : "maintenance", room, d.week,
                                ingest::format_timestamp(at_time(date, 12)), d.magnitude, d.modalities});
        }
    }
    std::stable_sort(g.events.begin(), g.events.end(),
                     [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
}

struct AudioJob {
    int room, week, day, index;
    std::string stem;
};

ingest::AudioSignal render_audio(const SynthConfig& c, const Planted& p, const AudioJob& job) {
    const auto& a = c.acoustic;
    Rng rng(Rng::derive(c.seed, stream_id(kAudio, job.room, job.week, job.index)));
    const auto i = week_index(c, job.week);
    const double centre = p.truth.planted.at("spectral_centroid")[i] + rng.normal(0.0, c.trends.at("spectral_centroid").obs_sd);
    const double rms = std::max(0.0, p.truth.planted.at("rms")[i] + rng.normal(0.0, c.trends.at("rms").obs_sd));
    const double amplitude = std::sqrt(2.0) * rms;
    const double phase0 = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double vib_phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const auto n = static_cast<std::size_t>(std::llround(a.clip_seconds * a.sample_rate));

    std::vector<double> noise(n);
    for (auto& x : noise) x = rng.normal();
    band_pass(noise, a.sample_rate, a.background_low_hz, a.background_high_hz);
    double power = 0.0;
    for (double x : noise) power += x * x;
    const double noise_gain = power > 0.0 ? a.background_rms / std::sqrt(power / static_cast<double>(n)) : 0.0;

    ingest::AudioSignal s;
    s.sample_rate = a.sample_rate;
    s.channels = 1;
    s.samples.resize(n);
    const double two_pi = 2.0 * std::numbers::pi;
    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) / a.sample_rate;
        // Phase of a tone whose frequency swings by +-depth around the centre.
        const double phase = two_pi * centre * t -
                             (a.vibrato_depth_hz / a.vibrato_hz) * std::cos(two_pi * a.vibrato_hz * t + vib_phase) +
                             phase0;
        s.samples[k] = std::clamp(amplitude * std::sin(phase) + noise_gain * noise[k], -1.0, 1.0);
    }
    return s;
}

struct VideoJob {
    int room, week, day, index;
    std::string stem;
};

struct FlowGeometry {
    double before, during, after;
};

FlowGeometry geometry(const FlowSynth& f) {
    if (f.full_geometry) return {420.0, 90.0, 420.0};
    return {f.before_s, f.during_s, f.after_s};
}

void render_video(const SynthConfig& c, const Planted& p, const VideoJob& job, const std::filesystem::path& dir) {
    const auto& f = c.flow;
    const auto geo = geometry(f);
    Rng rng(Rng::derive(c.seed, stream_id(kVideo, job.room, job.week, job.index)));
    const auto i = week_index(c, job.week);
    const double sd_before = c.trends.at("flow_baseline").obs_sd;
    const double sd_during = std::hypot(sd_before, c.trends.at("flow_response").obs_sd);
    const std::array<double, 3> magnitude = {
        std::max(0.0, p.truth.planted.at("flow_before")[i] + rng.normal(0.0, sd_before)),
        std::max(0.0, p.truth.planted.at("flow_during")[i] + rng.normal(0.0, sd_during)),
        std::max(0.0, p.truth.planted.at("flow_after")[i] + rng.normal(0.0, sd_before)),
    };
    std::array<double, 3> angle{};
    for (auto& a : angle) a = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const Texture texture(f.width, f.height, rng.next());

    const double duration = geo.before + geo.during + geo.after;
    const auto frames = static_cast<std::size_t>(std::llround(duration * f.fps)) + 1;
    ingest::FrameManifest m;
    m.fps = f.fps;
    m.width = f.width;
    m.height = f.height;
    m.room = job.room;
    m.week = job.week;
    m.day = job.day;
    m.clip_id = job.stem;
    const auto hatch = *ingest::parse_date(c.hatch_date);
    m.start_time = ingest::format_timestamp(at_time(week_day_date(hatch, job.week, job.day), 9 + job.index));
    m.entry_start_s = geo.before;
    m.entry_end_s = geo.before + geo.during;

    double sx = 0.0, sy = 0.0;
    for (std::size_t k = 0; k < frames; ++k) {
        const auto name = fmt::format("f{:05d}.pgm", k);
        ingest::write_binary_file((dir / name).string(), ingest::write_pgm(texture.render(sx, sy, f.contrast)));
        m.frames.push_back(name);
        // Segment of the pair (k, k + 1) by its midpoint.
        const double mid = (static_cast<double>(k) + 0.5) / f.fps;
        const int seg = mid < geo.before ? 0 : (mid < geo.before + geo.during ? 1 : 2);
        sx += magnitude[static_cast<std::size_t>(seg)] * std::cos(angle[static_cast<std::size_t>(seg)]);
        sy += magnitude[static_cast<std::size_t>(seg)] * std::sin(angle[static_cast<std::size_t>(seg)]);
    }
    ingest::write_text_file((dir / "manifest.json").string(), ingest::manifest_to_json(m));
}

}  // namespace

GroundTruth planted_truth(const SynthConfig& config) {
    auto p = plant(config);
    add_events(config, p.truth);
    return p.truth;
}

GroundTruth generate_dataset(const SynthConfig& c, const std::filesystem::path& out_dir) {
    auto p = plant(c);
    add_events(c, p.truth);
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec || !std::filesystem::is_directory(out_dir)) throw IoError("cannot create output directory " + out_dir.string());

    const auto hatch = *ingest::parse_date(c.hatch_date);

    // Audio.
    std::vector<AudioJob> audio;
    for (int room : c.rooms) {
        for (int w : p.truth.weeks) {
            for (int k = 0; k < c.acoustic.clips_per_week; ++k) {
                const int day = clip_day(k, c.acoustic.clips_per_week);
                audio.push_back({room, w, day, k, clip_stem(room, w, day, k)});
            }
        }
    }
    parallel_for(audio.size(), [&](std::size_t j) {
        const auto& job = audio[j];
        ingest::write_binary_file((out_dir / "audio" / (job.stem + ".wav")).string(),
                                  ingest::write_wav(render_audio(c, p, job)));
    });
    std::string audio_index = "clip_id,room,week,day,path\n";
    for (const auto& job : audio) {
        audio_index += fmt::format("{},{},{},{},{}.wav\n", job.stem, job.room, job.week, job.day, job.stem);
    }
    if (!audio.empty()) ingest::write_text_file((out_dir / "audio" / "clips.csv").string(), audio_index);

    // Video.
    std::vector<VideoJob> video;
    for (int room : c.rooms) {
        for (int w = std::max(c.first_week, c.flow.first_week); w <= c.last_week; ++w) {
            for (int k = 0; k < c.flow.clips_per_week; ++k) {
                const int day = clip_day(k, c.flow.clips_per_week);
                video.push_back({room, w, day, k, clip_stem(room, w, day, k)});
            }
        }
    }
    parallel_for(video.size(), [&](std::size_t j) { render_video(c, p, video[j], out_dir / "video" / video[j].stem); });
    std::string video_index = "clip_id,manifest\n";
    for (const auto& job : video) video_index += fmt::format("{},{}/manifest.json\n", job.stem, job.stem);
    if (!video.empty()) ingest::write_text_file((out_dir / "video" / "clips.csv").string(), video_index);

    // Thermal.
    std::vector<ingest::ThermalRecord> thermal;
    for (int room : c.rooms) {
        for (int w : p.truth.weeks) {
            Rng rng(Rng::derive(c.seed, stream_id(kThermal, room, w, 0)));
            const auto i = week_index(c, w);
            for (const auto region : {ingest::Region::Head, ingest::Region::Foot}) {
                const char* feature = region == ingest::Region::Head ? "head_temp_mean" : "foot_temp_mean";
                for (int k = 0; k < c.thermal_images_per_week; ++k) {
                    ingest::ThermalRecord r;
                    r.room = room;
                    r.week = w;
                    r.capture_date = week_day_date(hatch, w, clip_day(k, c.thermal_images_per_week));
                    r.region = region;
                    r.t_mean_c = round_to(p.truth.planted.at(feature)[i] + rng.normal(0.0, c.trends.at(feature).obs_sd), 0.01);
                    r.t_min_c = round_to(r.t_mean_c - rng.uniform(1.0, 3.0), 0.01);
                    r.t_max_c = round_to(r.t_mean_c + rng.uniform(1.0, 3.0), 0.01);
                    thermal.push_back(r);
                }
            }
        }
    }
    ingest::write_text_file((out_dir / "thermal.csv").string(), ingest::write_thermal_csv(thermal));

    // Environment: one AM and one PM reading per day.
    std::vector<ingest::EnvRecord> env;
    for (int room : c.rooms) {
        for (int w : p.truth.weeks) {
            Rng rng(Rng::derive(c.seed, stream_id(kEnv, room, w, 0)));
            const auto i = week_index(c, w);
            for (int day = 1; day <= 7; ++day) {
                for (const auto session : {ingest::Session::AM, ingest::Session::PM}) {
                    const double half = session == ingest::Session::AM ? -0.5 : 0.5;
                    ingest::EnvRecord r;
                    r.room = room;
                    r.week = w;
                    r.date = week_day_date(hatch, w, day);
                    r.session = session;
                    r.temp_c = round_to(p.truth.planted.at("ambient_temp")[i] + half * c.pm_temp_offset +
                                            rng.normal(0.0, c.trends.at("ambient_temp").obs_sd),
                                        0.01);
                    r.rh_pct = std::clamp(round_to(p.truth.planted.at("rel_humidity")[i] + half * c.pm_rh_offset +
                                                       rng.normal(0.0, c.trends.at("rel_humidity").obs_sd),
                                                   0.01),
                                          0.0, 100.0);
                    r.extras["co2_ppm"] = fmt::format("{}", std::lround(900.0 + rng.normal(0.0, 60.0)));
                    env.push_back(r);
                }
            }
        }
    }
    ingest::write_text_file((out_dir / "env.csv").string(), ingest::write_env_csv(env, {"co2_ppm"}));

    // Events.
    std::vector<ingest::EventRecord> events;
    for (const auto& e : p.truth.events) {
        ingest::EventRecord r;
        r.room = e.room;
        r.week = e.week;
        r.timestamp = *ingest::parse_timestamp(e.timestamp);
        r.kind = e.kind == "caretaker_entry" ? ingest::EventKind::CaretakerEntry
                 : e.kind == "equipment"     ? ingest::EventKind::Equipment
                                             : ingest::EventKind::Maintenance;
        r.note = e.kind == "caretaker_entry" ? "routine entry" : fmt::format("disturbance magnitude {}", e.magnitude);
        events.push_back(r);
    }
    ingest::write_text_file((out_dir / "events.csv").string(), ingest::write_event_csv(events));

    ordered_json gt = to_json(p.truth);
    gt["config"] = to_json(c);
    ingest::write_text_file((out_dir / "ground_truth.json").string(), gt.dump(2) + "\n");
    return p.truth;
}

}  // namespace aviary::synth

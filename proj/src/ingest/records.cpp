#include "aviary/ingest/records.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include <fmt/format.h>

#include "aviary/error.hpp"

namespace aviary::ingest {

namespace {

constexpr std::array<std::string_view, 7> kThermalHeader{
    "room", "week", "date", "region", "t_min_c", "t_max_c", "t_mean_c"};
constexpr std::array<std::string_view, 6> kEnvHeader{"room", "date",   "week",
                                                      "session", "temp_c", "rh_pct"};
constexpr std::array<std::string_view, 5> kEventHeader{"room", "timestamp", "week", "kind", "note"};

[[noreturn]] void row_error(const std::string& what, std::size_t line) {
    throw ParseError(what, ParseError::Unit::Row, line);
}

template <std::size_t N>
void check_header(const CsvTable& table, const std::array<std::string_view, N>& expected,
                  bool allow_extra) {
    const auto& h = table.header;
    const bool prefix_ok =
        h.size() >= N && std::equal(expected.begin(), expected.end(), h.begin(),
                                    [](std::string_view a, const std::string& b) { return a == b; });
    if (!prefix_ok || (!allow_extra && h.size() != N)) {
        std::string want;
        for (auto name : expected) want += (want.empty() ? "" : ",") + std::string(name);
        throw ParseError("header mismatch: expected " + want, ParseError::Unit::Row, 1);
    }
}

void require_fields(const CsvRow& row, std::size_t n) {
    if (row.fields.size() < n) row_error("missing field", row.line);
}

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::string_view strip(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())) != 0) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())) != 0) s.remove_suffix(1);
    return s;
}

double number(const CsvRow& row, std::size_t col, std::string_view name) {
    const auto v = parse_double(row.fields[col]);
    if (!v) row_error(fmt::format("unparsable number in {}", name), row.line);
    return *v;
}

int integer(const CsvRow& row, std::size_t col, std::string_view name) {
    const auto v = parse_integer(row.fields[col]);
    if (!v || *v < -1'000'000 || *v > 1'000'000) {
        row_error(fmt::format("unparsable integer in {}", name), row.line);
    }
    return static_cast<int>(*v);
}

int room(const CsvRow& row, std::size_t col) {
    const int r = integer(row, col, "room");
    if (r < kMinRoom || r > kMaxRoom) row_error("room out of range", row.line);
    return r;
}

int week(const CsvRow& row, std::size_t col) {
    const int w = integer(row, col, "week");
    if (w < 0) row_error("negative week", row.line);
    return w;
}

Date date(const CsvRow& row, std::size_t col) {
    const auto d = parse_date(row.fields[col]);
    if (!d) row_error("unparsable date", row.line);
    return *d;
}

}  // namespace

std::string_view region_name(Region r) noexcept { return r == Region::Head ? "Head" : "Foot"; }

std::string_view session_name(Session s) noexcept { return s == Session::AM ? "AM" : "PM"; }

std::string_view event_kind_name(EventKind k) noexcept {
    switch (k) {
        case EventKind::CaretakerEntry: return "caretaker_entry";
        case EventKind::Maintenance: return "maintenance";
        case EventKind::Equipment: return "equipment";
        case EventKind::Other: return "other";
    }
    return "other";
}

std::vector<ThermalRecord> parse_thermal_csv(std::string_view text) {
    const CsvTable table = parse_csv(text);
    check_header(table, kThermalHeader, false);
    std::vector<ThermalRecord> out;
    out.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        require_fields(row, kThermalHeader.size());
        if (row.fields.size() > kThermalHeader.size()) row_error("too many fields", row.line);
        ThermalRecord r;
        r.room = room(row, 0);
        r.week = week(row, 1);
        r.capture_date = date(row, 2);
        const std::string region = lower(strip(row.fields[3]));
        if (region == "head") {
            r.region = Region::Head;
        } else if (region == "foot") {
            r.region = Region::Foot;
        } else {
            row_error(fmt::format("unknown region '{}'", row.fields[3]), row.line);
        }
        r.t_min_c = number(row, 4, "t_min_c");
        r.t_max_c = number(row, 5, "t_max_c");
        r.t_mean_c = number(row, 6, "t_mean_c");
        for (double t : {r.t_min_c, r.t_max_c, r.t_mean_c}) {
            if (t < kMinPlausibleTempC || t > kMaxPlausibleTempC) {
                row_error("temperature out of range", row.line);
            }
        }
        if (!(r.t_min_c <= r.t_mean_c && r.t_mean_c <= r.t_max_c)) {
            row_error("ordering violation", row.line);
        }
        out.push_back(r);
    }
    return out;
}

std::vector<EnvRecord> parse_env_csv(std::string_view text) {
    const CsvTable table = parse_csv(text);
    check_header(table, kEnvHeader, true);
    std::vector<EnvRecord> out;
    out.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        require_fields(row, kEnvHeader.size());
        EnvRecord r;
        r.room = room(row, 0);
        r.date = date(row, 1);
        r.week = week(row, 2);
        const std::string session = std::string(strip(row.fields[3]));
        if (session == "AM" || session == "am") {
            r.session = Session::AM;
        } else if (session == "PM" || session == "pm") {
            r.session = Session::PM;
        } else {
            row_error(fmt::format("unknown session '{}'", row.fields[3]), row.line);
        }
        r.temp_c = number(row, 4, "temp_c");
        if (r.temp_c < kMinPlausibleTempC || r.temp_c > kMaxPlausibleTempC) {
            row_error("temperature out of range", row.line);
        }
        r.rh_pct = number(row, 5, "rh_pct");
        if (r.rh_pct < 0.0 || r.rh_pct > 100.0) row_error("humidity out of range", row.line);

        for (std::size_t c = kEnvHeader.size(); c < row.fields.size(); ++c) {
            const std::string_view cell = row.fields[c];
            if (c < table.header.size()) {
                r.extras[table.header[c]] = std::string(cell);
                continue;
            }
            const auto eq = cell.find('=');
            if (eq == std::string_view::npos || eq == 0) row_error("too many fields", row.line);
            r.extras[std::string(strip(cell.substr(0, eq)))] = std::string(strip(cell.substr(eq + 1)));
        }
        out.push_back(std::move(r));
    }
    return out;
}

EventLog parse_event_log(std::string_view text) {
    const CsvTable table = parse_csv(text);
    check_header(table, kEventHeader, false);
    EventLog log;
    log.records.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        if (row.fields.size() < kEventHeader.size() - 1) row_error("missing field", row.line);
        if (row.fields.size() > kEventHeader.size()) row_error("too many fields", row.line);
        EventRecord r;
        r.room = room(row, 0);
        const auto ts = parse_timestamp(row.fields[1]);
        if (!ts) row_error("unparsable timestamp", row.line);
        r.timestamp = *ts;
        r.week = week(row, 2);
        const std::string kind = lower(strip(row.fields[3]));
        if (kind == "caretaker_entry") {
            r.kind = EventKind::CaretakerEntry;
        } else if (kind == "maintenance") {
            r.kind = EventKind::Maintenance;
        } else if (kind == "equipment") {
            r.kind = EventKind::Equipment;
        } else {
            r.kind = EventKind::Other;
            if (kind != "other") {
                log.warnings.push_back(fmt::format("unknown event kind '{}' row {} mapped to other",
                                                   row.fields[3], row.line));
            }
        }
        if (row.fields.size() == kEventHeader.size()) r.note = row.fields[4];
        log.records.push_back(std::move(r));
    }
    std::stable_sort(log.records.begin(), log.records.end(),
                     [](const EventRecord& a, const EventRecord& b) { return a.timestamp < b.timestamp; });
    return log;
}

std::string write_thermal_csv(const std::vector<ThermalRecord>& records) {
    std::string out = "room,week,date,region,t_min_c,t_max_c,t_mean_c\n";
    for (const auto& r : records) {
        out += fmt::format("{},{},{},{},{},{},{}\n", r.room, r.week, format_date(r.capture_date),
                           region_name(r.region), r.t_min_c, r.t_max_c, r.t_mean_c);
    }
    return out;
}

std::string write_env_csv(const std::vector<EnvRecord>& records,
                          const std::vector<std::string>& extra_columns) {
    std::string out = "room,date,week,session,temp_c,rh_pct";
    for (const auto& c : extra_columns) out += "," + csv_escape(c);
    out += "\n";
    for (const auto& r : records) {
        out += fmt::format("{},{},{},{},{},{}", r.room, format_date(r.date), r.week,
                           session_name(r.session), r.temp_c, r.rh_pct);
        for (const auto& c : extra_columns) {
            const auto it = r.extras.find(c);
            out += "," + (it == r.extras.end() ? std::string{} : csv_escape(it->second));
        }
        out += "\n";
    }
    return out;
}

std::string write_event_csv(const std::vector<EventRecord>& records) {
    std::string out = "room,timestamp,week,kind,note\n";
    for (const auto& r : records) {
        out += fmt::format("{},{},{},{},{}\n", r.room, format_timestamp(r.timestamp), r.week,
                           event_kind_name(r.kind), csv_escape(r.note));
    }
    return out;
}

}  // namespace aviary::ingest

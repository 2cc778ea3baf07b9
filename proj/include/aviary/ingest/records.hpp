#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "aviary/ingest/csv.hpp"

namespace aviary::ingest {

enum class Region { Head, Foot };
enum class Session { AM, PM };
enum class EventKind { CaretakerEntry, Maintenance, Equipment, Other };

std::string_view region_name(Region r) noexcept;
std::string_view session_name(Session s) noexcept;
// Snake-case label as written in events.csv.
std::string_view event_kind_name(EventKind k) noexcept;

inline constexpr int kMinRoom = 1;
inline constexpr int kMaxRoom = 5;
inline constexpr double kMinPlausibleTempC = -10.0;
inline constexpr double kMaxPlausibleTempC = 60.0;

struct ThermalRecord {
    int room = 0;
    int week = 0;
    Date capture_date{};
    Region region = Region::Head;
    double t_min_c = 0.0;
    double t_max_c = 0.0;
    double t_mean_c = 0.0;
};

struct EnvRecord {
    int room = 0;
    Date date{};
    int week = 0;
    Session session = Session::AM;
    double temp_c = 0.0;
    double rh_pct = 0.0;
    std::map<std::string, std::string> extras;  // pass-through columns
};

struct EventRecord {
    int room = 0;
    Timestamp timestamp{};
    int week = 0;
    EventKind kind = EventKind::Other;
    std::string note;
};

struct EventLog {
    std::vector<EventRecord> records;  // sorted by timestamp, stable
    std::vector<std::string> warnings;
};

// Header: room,week,date,region,t_min_c,t_max_c,t_mean_c
std::vector<ThermalRecord> parse_thermal_csv(std::string_view text);
// Header: room,date,week,session,temp_c,rh_pct[,extra...]. Extra columns are
// kept verbatim in `extras` keyed by header name; surplus unnamed cells of the
// form key=value are keyed by `key`.
std::vector<EnvRecord> parse_env_csv(std::string_view text);
// Header: room,timestamp,week,kind,note
EventLog parse_event_log(std::string_view text);

// Writers emit the same schemas; `extra_columns` fixes the env extras order.
std::string write_thermal_csv(const std::vector<ThermalRecord>& records);
std::string write_env_csv(const std::vector<EnvRecord>& records,
                          const std::vector<std::string>& extra_columns = {});
std::string write_event_csv(const std::vector<EventRecord>& records);

}  // namespace aviary::ingest

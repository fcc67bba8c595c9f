#include "gainml/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>
#include <unordered_map>

#include "gainml/error.hpp"

namespace gainml {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '"' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            cells.push_back(trim(line.substr(start)));
            break;
        }
        cells.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
    return cells;
}

std::optional<int> parse_int(std::string_view s) {
    int value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return value;
}

double parse_measurement(std::string_view cell) {
    if (cell.empty()) return kMissing;
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(value)) return kMissing;
    return value;
}

std::string format_number(double v) {
    if (std::isnan(v)) return {};
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

Instant parse_timestamp(std::string_view text) {
    auto fail = [&]() -> Error {
        return Error(ErrorCode::MalformedTimestamp, "malformed timestamp '" + std::string(text) + "'");
    };
    auto s = trim(text);
    if (s.ends_with('Z')) {
        s.remove_suffix(1);
    } else if (s.ends_with("+00:00")) {
        s.remove_suffix(6);
    }
    // YYYY-MM-DD?HH:MM:SS
    if (s.size() != 19 || s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != ' ') ||
        s[13] != ':' || s[16] != ':') {
        throw fail();
    }
    auto y = parse_int(s.substr(0, 4));
    auto mo = parse_int(s.substr(5, 2));
    auto d = parse_int(s.substr(8, 2));
    auto h = parse_int(s.substr(11, 2));
    auto mi = parse_int(s.substr(14, 2));
    auto se = parse_int(s.substr(17, 2));
    if (!y || !mo || !d || !h || !mi || !se) throw fail();
    std::chrono::year_month_day ymd{std::chrono::year{*y}, std::chrono::month{static_cast<unsigned>(*mo)},
                                    std::chrono::day{static_cast<unsigned>(*d)}};
    if (!ymd.ok() || *h > 23 || *mi > 59 || *se > 59) throw fail();
    return std::chrono::sys_days{ymd} + std::chrono::hours{*h} + std::chrono::minutes{*mi} +
           std::chrono::seconds{*se};
}

std::string format_timestamp(Instant t) {
    auto day = std::chrono::floor<std::chrono::days>(t);
    std::chrono::year_month_day ymd{day};
    std::chrono::hh_mm_ss hms{t - day};
    char buf[64];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:%02ld:%02ldZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<long>(hms.hours().count()), static_cast<long>(hms.minutes().count()),
                  static_cast<long>(hms.seconds().count()));
    return buf;
}

TurbineSeries parse_series_csv(std::istream& in, const ColumnMapping& mapping, std::string turbine_id) {
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::IoError, "empty CSV input");
    auto header = split_csv_line(line);
    std::unordered_map<std::string, std::size_t> position;
    for (std::size_t i = 0; i < header.size(); ++i) position.emplace(std::string(header[i]), i);

    auto column = [&](const std::string& name, bool required) -> std::optional<std::size_t> {
        if (name.empty()) return std::nullopt;
        auto it = position.find(name);
        if (it == position.end()) {
            if (required) throw Error(ErrorCode::ConfigError, "CSV has no column '" + name + "'");
            return std::nullopt;
        }
        return it->second;
    };
    const auto ts_col = column(mapping.timestamp, true);
    const std::array<std::optional<std::size_t>, 5> cols = {
        column(mapping.wind_speed, false), column(mapping.power, false), column(mapping.direction, false),
        column(mapping.temperature, false), column(mapping.pressure, false)};

    TurbineSeries series{std::move(turbine_id), {}};
    std::size_t row_number = 1;
    while (std::getline(in, line)) {
        ++row_number;
        if (trim(line).empty()) continue;
        auto cells = split_csv_line(line);
        auto cell = [&](std::optional<std::size_t> c) -> std::string_view {
            if (!c || *c >= cells.size()) return {};
            return cells[*c];
        };
        SeriesRow row;
        try {
            row.timestamp = parse_timestamp(cell(ts_col));
        } catch (const Error&) {
            throw Error(ErrorCode::MalformedTimestamp,
                        "malformed timestamp at row " + std::to_string(row_number) + ": '" +
                            std::string(cell(ts_col)) + "'");
        }
        row.wind_speed = parse_measurement(cell(cols[0]));
        row.power = parse_measurement(cell(cols[1]));
        row.direction = parse_measurement(cell(cols[2]));
        row.temperature = parse_measurement(cell(cols[3]));
        row.pressure = parse_measurement(cell(cols[4]));
        series.rows.push_back(row);
    }

    std::stable_sort(series.rows.begin(), series.rows.end(),
                     [](const SeriesRow& a, const SeriesRow& b) { return a.timestamp < b.timestamp; });
    auto dup = std::adjacent_find(series.rows.begin(), series.rows.end(),
                                  [](const SeriesRow& a, const SeriesRow& b) { return a.timestamp == b.timestamp; });
    if (dup != series.rows.end()) {
        throw Error(ErrorCode::DuplicateTimestamp, "duplicate timestamp " + format_timestamp(dup->timestamp));
    }
    return series;
}

TurbineSeries ingest_series(const std::filesystem::path& path, const ColumnMapping& mapping,
                            std::string turbine_id) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::FileNotFound, "cannot open " + path.string());
    if (turbine_id.empty()) turbine_id = path.stem().string();
    return parse_series_csv(in, mapping, std::move(turbine_id));
}

void write_series_csv(const TurbineSeries& series, std::ostream& out) {
    out << "timestamp,wind_speed,power,direction,temperature,pressure\n";
    for (const auto& r : series.rows) {
        out << format_timestamp(r.timestamp) << ',' << format_number(r.wind_speed) << ','
            << format_number(r.power) << ',' << format_number(r.direction) << ','
            << format_number(r.temperature) << ',' << format_number(r.pressure) << '\n';
    }
}

std::string_view role_name(Role role) {
    switch (role) {
        case Role::Ref: return "REF";
        case Role::CtrB: return "CTR-b";
        case Role::CtrN: return "CTR-n";
    }
    return "?";
}

std::string_view period_name(Period period) { return period == Period::P1 ? "P1" : "P2"; }

std::string_view covariate_name(Covariate c) {
    switch (c) {
        case Covariate::WindSpeed: return "V-CTRn";
        case Covariate::WindSpeedDelta: return "dV-CTRn";
        case Covariate::NeutralPower: return "PW-CTRn";
        case Covariate::Direction: return "Direction";
        case Covariate::Density: return "Density";
        case Covariate::Hour: return "Hour";
    }
    return "?";
}

Covariate covariate_from_name(std::string_view name) {
    for (auto c : kCandidateCovariates) {
        if (covariate_name(c) == name) return c;
    }
    throw Error(ErrorCode::InvalidArgument, "unknown covariate '" + std::string(name) + "'");
}

std::vector<std::string> candidate_covariates() {
    return covariate_names(kCandidateCovariates);
}

std::size_t expanded_width(Covariate c) {
    return (c == Covariate::Direction || c == Covariate::Hour) ? 2 : 1;
}

std::vector<std::string> covariate_names(std::span<const Covariate> variables) {
    std::vector<std::string> names;
    for (auto c : variables) names.emplace_back(covariate_name(c));
    return names;
}

std::vector<Covariate> covariates_from_names(std::span<const std::string> names) {
    std::vector<Covariate> out;
    for (const auto& n : names) out.push_back(covariate_from_name(n));
    return out;
}

std::vector<std::string> expanded_column_names(std::span<const Covariate> variables) {
    std::vector<std::string> names;
    for (auto c : variables) {
        std::string base(covariate_name(c));
        if (expanded_width(c) == 2) {
            names.push_back(base + "_sin");
            names.push_back(base + "_cos");
        } else {
            names.push_back(base);
        }
    }
    return names;
}

void AlignedRecord::append_covariate(Covariate c, std::vector<double>& out) const {
    switch (c) {
        case Covariate::WindSpeed: out.push_back(wind_speed); break;
        case Covariate::WindSpeedDelta: out.push_back(wind_speed_delta); break;
        case Covariate::NeutralPower: out.push_back(neutral_power); break;
        case Covariate::Direction:
            out.push_back(direction_sin);
            out.push_back(direction_cos);
            break;
        case Covariate::Density: out.push_back(density); break;
        case Covariate::Hour:
            out.push_back(hour_sin);
            out.push_back(hour_cos);
            break;
    }
}

std::vector<std::size_t> AlignedDataset::indices(Period period) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (records[i].period == period) out.push_back(i);
    }
    return out;
}

std::size_t AlignedDataset::count(Period period) const {
    return static_cast<std::size_t>(std::count_if(records.begin(), records.end(),
                                                  [&](const AlignedRecord& r) { return r.period == period; }));
}

double air_density(double pressure_pa, double temperature_k) {
    return pressure_pa / (kDryAirGasConstant * temperature_k);
}

namespace {

void check_cadence(const TurbineSeries& s, std::int64_t cadence, std::int64_t phase) {
    for (std::size_t i = 0; i < s.rows.size(); ++i) {
        const auto t = s.rows[i].timestamp.time_since_epoch().count();
        if (((t % cadence) + cadence) % cadence != phase) {
            throw Error(ErrorCode::CadenceMismatch,
                        "series '" + s.turbine_id + "' is off the " + std::to_string(cadence) + " s grid at " +
                            format_timestamp(s.rows[i].timestamp));
        }
        if (i > 0 && s.rows[i].timestamp <= s.rows[i - 1].timestamp) {
            throw Error(ErrorCode::DuplicateTimestamp,
                        "series '" + s.turbine_id + "' timestamps not strictly increasing at " +
                            format_timestamp(s.rows[i].timestamp));
        }
    }
}

struct JoinedRow {
    Instant timestamp;
    const SeriesRow* ref;
    const SeriesRow* ctrb;
    const SeriesRow* ctrn;
};

}  // namespace

AlignedDataset align(const TurbineSeries& ref, const TurbineSeries& ctrb, const TurbineSeries& ctrn,
                     Instant boundary, std::int64_t cadence_seconds) {
    if (cadence_seconds <= 0) throw Error(ErrorCode::InvalidArgument, "cadence must be positive");
    std::int64_t phase = 0;
    for (const auto* s : {&ref, &ctrb, &ctrn}) {
        if (!s->rows.empty()) {
            const auto t = s->rows.front().timestamp.time_since_epoch().count();
            phase = ((t % cadence_seconds) + cadence_seconds) % cadence_seconds;
            break;
        }
    }
    for (const auto* s : {&ref, &ctrb, &ctrn}) check_cadence(*s, cadence_seconds, phase);

    // Three-way merge join over sorted timestamps.
    std::vector<JoinedRow> joined;
    std::size_t i = 0, j = 0, k = 0;
    while (i < ref.rows.size() && j < ctrb.rows.size() && k < ctrn.rows.size()) {
        const auto t = std::max({ref.rows[i].timestamp, ctrb.rows[j].timestamp, ctrn.rows[k].timestamp});
        while (i < ref.rows.size() && ref.rows[i].timestamp < t) ++i;
        while (j < ctrb.rows.size() && ctrb.rows[j].timestamp < t) ++j;
        while (k < ctrn.rows.size() && ctrn.rows[k].timestamp < t) ++k;
        if (i < ref.rows.size() && j < ctrb.rows.size() && k < ctrn.rows.size() && ref.rows[i].timestamp == t &&
            ctrb.rows[j].timestamp == t && ctrn.rows[k].timestamp == t) {
            joined.push_back({t, &ref.rows[i], &ctrb.rows[j], &ctrn.rows[k]});
            ++i;
            ++j;
            ++k;
        }
    }

    AlignedDataset out;
    out.cadence_seconds = cadence_seconds;
    out.boundary = boundary;
    out.roles = {{ref.turbine_id, Role::Ref}, {ctrb.turbine_id, Role::CtrB}, {ctrn.turbine_id, Role::CtrN}};

    const std::chrono::seconds cadence{cadence_seconds};
    constexpr double two_pi = 2.0 * std::numbers::pi;
    for (std::size_t r = 0; r < joined.size(); ++r) {
        const auto& row = joined[r];
        // dV needs the joined row exactly one cadence earlier.
        if (r == 0 || joined[r - 1].timestamp != row.timestamp - cadence) continue;
        const double v = row.ctrn->wind_speed;
        const double v_prev = joined[r - 1].ctrn->wind_speed;
        const double required[] = {row.ref->power, row.ref->direction, row.ref->temperature, row.ref->pressure,
                                   row.ctrb->power, row.ctrn->power, v, v_prev};
        if (std::any_of(std::begin(required), std::end(required), [](double x) { return std::isnan(x); })) continue;
        const double density = air_density(row.ref->pressure, row.ref->temperature);
        if (!(density > 0.0) || !std::isfinite(density)) continue;

        AlignedRecord rec;
        rec.timestamp = row.timestamp;
        rec.y_ref = row.ref->power;
        rec.y_ctrb = row.ctrb->power;
        rec.wind_speed = v;
        rec.wind_speed_delta = v - v_prev;
        rec.neutral_power = row.ctrn->power;
        const double dir = two_pi * row.ref->direction / 360.0;
        rec.direction_sin = std::sin(dir);
        rec.direction_cos = std::cos(dir);
        rec.density = density;
        const auto since_midnight = row.timestamp - std::chrono::floor<std::chrono::days>(row.timestamp);
        const auto hour = std::chrono::duration_cast<std::chrono::hours>(since_midnight).count();
        const double hour_angle = two_pi * static_cast<double>(hour) / 24.0;
        rec.hour_sin = std::sin(hour_angle);
        rec.hour_cos = std::cos(hour_angle);
        rec.period = row.timestamp < boundary ? Period::P1 : Period::P2;
        out.records.push_back(rec);
    }

    if (out.count(Period::P1) == 0) throw Error(ErrorCode::EmptyPeriod, "no aligned records in Period 1");
    if (out.count(Period::P2) == 0) throw Error(ErrorCode::EmptyPeriod, "no aligned records in Period 2");
    return out;
}

std::vector<double> feature_rows(const AlignedDataset& data, std::span<const std::size_t> indices,
                                 std::span<const Covariate> variables) {
    std::vector<double> out;
    std::size_t width = 0;
    for (auto c : variables) width += expanded_width(c);
    out.reserve(indices.size() * width);
    for (auto idx : indices) {
        for (auto c : variables) data.records[idx].append_covariate(c, out);
    }
    return out;
}

void write_aligned_csv(const AlignedDataset& data, std::ostream& out) {
    out << "timestamp,period,y_ref,y_ctrb";
    for (const auto& name : expanded_column_names(kCandidateCovariates)) out << ',' << name;
    out << '\n';
    std::vector<double> values;
    for (const auto& r : data.records) {
        out << format_timestamp(r.timestamp) << ',' << period_name(r.period) << ',' << format_number(r.y_ref)
            << ',' << format_number(r.y_ctrb);
        values.clear();
        for (auto c : kCandidateCovariates) r.append_covariate(c, values);
        for (double v : values) out << ',' << format_number(v);
        out << '\n';
    }
}

}  // namespace gainml

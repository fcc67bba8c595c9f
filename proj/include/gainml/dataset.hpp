#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gainml {

using Instant = std::chrono::sys_seconds;

/// Parses "YYYY-MM-DDTHH:MM:SS" with an optional "Z" or "+00:00" suffix. A
/// space may replace the "T". Throws MalformedTimestamp.
Instant parse_timestamp(std::string_view text);
std::string format_timestamp(Instant t);

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
inline constexpr double kDryAirGasConstant = 287.05;  // J kg^-1 K^-1
inline constexpr std::int64_t kDefaultCadenceSeconds = 600;

struct SeriesRow {
    Instant timestamp;
    double wind_speed = kMissing;   // m/s
    double power = kMissing;        // kW
    double direction = kMissing;    // degrees
    double temperature = kMissing;  // K
    double pressure = kMissing;     // Pa
};

struct TurbineSeries {
    std::string turbine_id;
    std::vector<SeriesRow> rows;
};

/// CSV header names for each TurbineSeries field. An empty name means the
/// column is absent and the field is missing on every row.
struct ColumnMapping {
    std::string timestamp = "timestamp";
    std::string wind_speed = "wind_speed";
    std::string power = "power";
    std::string direction = "direction";
    std::string temperature = "temperature";
    std::string pressure = "pressure";
};

TurbineSeries ingest_series(const std::filesystem::path& path,
                            const ColumnMapping& mapping,
                            std::string turbine_id = {});
TurbineSeries parse_series_csv(std::istream& in, const ColumnMapping& mapping,
                               std::string turbine_id = {});
void write_series_csv(const TurbineSeries& series, std::ostream& out);

enum class Role { Ref, CtrB, CtrN };
enum class Period { P1, P2 };

std::string_view role_name(Role role);
std::string_view period_name(Period period);

/// The logical covariates. Direction and Hour expand to sin/cos pairs.
enum class Covariate { WindSpeed, WindSpeedDelta, NeutralPower, Direction, Density, Hour };

inline constexpr std::array<Covariate, 6> kCandidateCovariates = {
    Covariate::WindSpeed, Covariate::WindSpeedDelta, Covariate::NeutralPower,
    Covariate::Direction, Covariate::Density,        Covariate::Hour,
};

std::vector<std::string> candidate_covariates();
std::string_view covariate_name(Covariate c);
Covariate covariate_from_name(std::string_view name);
std::size_t expanded_width(Covariate c);
std::vector<std::string> expanded_column_names(std::span<const Covariate> variables);
std::vector<std::string> covariate_names(std::span<const Covariate> variables);
std::vector<Covariate> covariates_from_names(std::span<const std::string> names);

struct AlignedRecord {
    Instant timestamp;
    double y_ref = 0.0;
    double y_ctrb = 0.0;
    double wind_speed = 0.0;        // V-CTRn
    double wind_speed_delta = 0.0;  // dV-CTRn
    double neutral_power = 0.0;     // PW-CTRn
    double direction_sin = 0.0;
    double direction_cos = 1.0;
    double density = 0.0;
    double hour_sin = 0.0;
    double hour_cos = 1.0;
    Period period = Period::P1;

    /// Appends the expanded column values of `c` to `out`.
    void append_covariate(Covariate c, std::vector<double>& out) const;
};

struct AlignedDataset {
    std::vector<AlignedRecord> records;
    std::int64_t cadence_seconds = kDefaultCadenceSeconds;
    Instant boundary;
    std::map<std::string, Role> roles;

    std::vector<std::size_t> indices(Period period) const;
    std::size_t count(Period period) const;
};

/// Inner-joins the three series on timestamp, engineers the covariates and
/// drops every row with a missing required field.
AlignedDataset align(const TurbineSeries& ref, const TurbineSeries& ctrb,
                     const TurbineSeries& ctrn, Instant boundary,
                     std::int64_t cadence_seconds = kDefaultCadenceSeconds);

/// Row-major raw (unstandardized) feature values for the selected records.
std::vector<double> feature_rows(const AlignedDataset& data,
                                 std::span<const std::size_t> indices,
                                 std::span<const Covariate> variables);

void write_aligned_csv(const AlignedDataset& data, std::ostream& out);

double air_density(double pressure_pa, double temperature_k);

}  // namespace gainml

#include "gainml/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "gainml/error.hpp"
#include "gainml/random.hpp"

namespace gainml {

double PowerCurve::operator()(double v) const {
    if (v < cut_in) return 0.0;
    return rated_kw / (1.0 + std::exp(-slope * (v - inflection)));
}

void validate(const FarmScenario& s) {
    auto fail = [](const std::string& what) { return Error(ErrorCode::InvalidScenario, what); };
    if (s.n_p1 < 200 || s.n_p2 < 200) throw fail("n_p1 and n_p2 must be at least 200");
    if (!(s.power_curve.rated_kw > 0.0)) throw fail("rated power must be positive");
    if (!(s.power_curve.slope > 0.0)) throw fail("power curve slope must be positive");
    if (!(s.upgrade_gamma >= 1.0)) throw fail("upgrade_gamma must be at least 1");
    if (!(s.noise_sd >= 0.0)) throw fail("noise_sd must be non-negative");
    if (!(s.weibull_shape > 0.0 && s.weibull_scale > 0.0)) throw fail("Weibull parameters must be positive");
    if (!(s.wind_autocorrelation >= 0.0 && s.wind_autocorrelation < 1.0)) {
        throw fail("wind_autocorrelation must lie in [0, 1)");
    }
    if (s.ref_spread < 0.0 || s.ctrb_spread < 0.0 || s.ctrn_spread < 0.0 || s.anemometer_sd < 0.0) {
        throw fail("spreads must be non-negative");
    }
    if (!(s.missing_rate >= 0.0 && s.missing_rate < 1.0)) throw fail("missing_rate must lie in [0, 1)");
    if (s.cadence_seconds <= 0) throw fail("cadence must be positive");
    if (s.ref_id == s.ctrb_id || s.ref_id == s.ctrn_id || s.ctrb_id == s.ctrn_id) {
        throw fail("turbine ids must be distinct");
    }
    try {
        (void)parse_timestamp(s.start);
    } catch (const Error&) {
        throw fail("start is not an ISO-8601 timestamp");
    }
}

namespace {

constexpr double kDiurnalShear = 0.04;
constexpr double kReferenceDensity = 1.225;
constexpr double kQuadratureUpper = 40.0;  // m/s

double weibull_pdf(double v, double shape, double scale) {
    if (v <= 0.0) return 0.0;
    const double z = v / scale;
    return (shape / scale) * std::pow(z, shape - 1.0) * std::exp(-std::pow(z, shape));
}

double weibull_quantile(double u, double shape, double scale) {
    return scale * std::pow(-std::log1p(-u), 1.0 / shape);
}

template <typename F>
double simpson(F&& f, double a, double b, int intervals) {
    const double h = (b - a) / intervals;
    double s = f(a) + f(b);
    for (int i = 1; i < intervals; ++i) s += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
    return s * h / 3.0;
}

/// Integral of P(v) f(v) dv, split at cut-in where the curve jumps.
double expected_power(const FarmScenario& s) {
    auto integrand = [&](double v) { return s.power_curve(v) * weibull_pdf(v, s.weibull_shape, s.weibull_scale); };
    return simpson(integrand, s.power_curve.cut_in, kQuadratureUpper, 40000);
}

}  // namespace

SyntheticFarm generate(const FarmScenario& s, double bin_width) {
    validate(s);
    const std::size_t n = s.n_p1 + s.n_p2;
    const Instant start = parse_timestamp(s.start);
    const std::chrono::seconds cadence{s.cadence_seconds};

    std::mt19937_64 rng(mix_seed(s.seed));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    SyntheticFarm farm;
    farm.ref.turbine_id = s.ref_id;
    farm.ctrb.turbine_id = s.ctrb_id;
    farm.ctrn.turbine_id = s.ctrn_id;
    farm.boundary = start + cadence * static_cast<std::int64_t>(s.n_p1);

    const double phi = s.wind_autocorrelation;
    const double innovation = std::sqrt(1.0 - phi * phi);
    double z = normal(rng);
    double direction = 360.0 * unit(rng);
    constexpr double two_pi = 2.0 * std::numbers::pi;

    auto maybe_missing = [&](double value) { return (s.missing_rate > 0.0 && unit(rng) < s.missing_rate) ? kMissing : value; };

    for (std::size_t i = 0; i < n; ++i) {
        const Instant t = start + cadence * static_cast<std::int64_t>(i);
        const bool period2 = i >= s.n_p1;
        const auto since_midnight = t - std::chrono::floor<std::chrono::days>(t);
        const double hour = static_cast<double>(std::chrono::duration_cast<std::chrono::hours>(since_midnight).count());

        z = phi * z + innovation * normal(rng);
        const double u = std::clamp(0.5 * std::erfc(-z / std::numbers::sqrt2), 1e-12, 1.0 - 1e-12);
        const double farm_wind = weibull_quantile(u, s.weibull_shape, s.weibull_scale);

        direction = std::fmod(direction + 8.0 * normal(rng) + 360.0, 360.0);
        const double temperature = 283.0 + 6.0 * std::sin(two_pi * (hour - 9.0) / 24.0) + 1.5 * normal(rng);
        const double pressure = 101325.0 + 600.0 * normal(rng);
        const double density = air_density(pressure, temperature);

        const double shear = s.diurnal_effect ? 1.0 + kDiurnalShear * std::cos(two_pi * (hour - 3.0) / 24.0) : 1.0;
        const double density_factor = s.density_effect ? density / kReferenceDensity : 1.0;

        const double v_ref = std::max(0.0, farm_wind * (1.0 + s.ref_spread * normal(rng)));
        const double v_ctrb = std::max(0.0, farm_wind * (1.0 + s.ctrb_spread * normal(rng)));
        const double v_ctrn = std::max(0.0, farm_wind * (1.0 + s.ctrn_spread * normal(rng)));

        double p_ref = s.power_curve(v_ref * shear) * density_factor;
        double p_ctrb = s.power_curve(v_ctrb * shear) * density_factor;
        const double p_ctrn = s.power_curve(v_ctrn) * density_factor + s.noise_sd * normal(rng);
        if (period2) {
            p_ref = p_ref * s.upgrade_gamma + s.shared_drift;
            p_ctrb += s.shared_drift;
        }
        p_ref += s.noise_sd * normal(rng);
        p_ctrb += s.noise_sd * normal(rng);
        const double anemometer = std::max(0.0, v_ctrn + s.anemometer_sd * normal(rng));

        auto row = [&](double wind, double power, double dir_offset) {
            SeriesRow r;
            r.timestamp = t;
            r.wind_speed = maybe_missing(wind);
            r.power = maybe_missing(power);
            r.direction = maybe_missing(std::fmod(direction + dir_offset + 360.0, 360.0));
            r.temperature = maybe_missing(temperature);
            r.pressure = maybe_missing(pressure);
            return r;
        };
        farm.ref.rows.push_back(row(v_ref + s.anemometer_sd * normal(rng), p_ref, 0.0));
        farm.ctrb.rows.push_back(row(v_ctrb + s.anemometer_sd * normal(rng), p_ctrb, 2.0));
        farm.ctrn.rows.push_back(row(anemometer, p_ctrn, -2.0));
    }

    // The uplift is multiplicative on REF power, so the gained energy is
    // (gamma - 1) times the expected baseline energy.
    const double baseline = expected_power(s);
    const double gained = simpson(
        [&](double v) {
            return (s.upgrade_gamma - 1.0) * s.power_curve(v) * weibull_pdf(v, s.weibull_shape, s.weibull_scale);
        },
        s.power_curve.cut_in, kQuadratureUpper, 40000);
    farm.truth = gained / baseline;
    farm.aep_kwh = kHoursPerYear * baseline;

    // Long-term CTR-b power frequency: wind probability mass mapped through the
    // noiseless curve (midpoint rule).
    farm.long_term_frequency.bin_width = bin_width;
    constexpr int steps = 200000;
    const double h = kQuadratureUpper / steps;
    for (int i = 0; i < steps; ++i) {
        const double v = (i + 0.5) * h;
        const double mass = weibull_pdf(v, s.weibull_shape, s.weibull_scale) * h;
        farm.long_term_frequency.hours[bin_index(s.power_curve(v), bin_width)] += mass * kHoursPerYear;
    }
    return farm;
}

}  // namespace gainml

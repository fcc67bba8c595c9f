#pragma once

#include <cstdint>
#include <string>

#include "gainml/dataset.hpp"
#include "gainml/period2.hpp"

namespace gainml {

/// Logistic power curve with a hard cut-in.
struct PowerCurve {
    double rated_kw = 2000.0;
    double cut_in = 3.0;      // m/s
    double inflection = 8.5;  // m/s
    double slope = 0.9;       // 1/(m/s)

    double operator()(double wind_speed) const;
};

struct FarmScenario {
    std::uint64_t seed = 1;
    std::size_t n_p1 = 2000;
    std::size_t n_p2 = 2000;
    PowerCurve power_curve;
    double noise_sd = 15.0;        // kW, per turbine and record
    double shared_drift = 0.0;     // kW added to REF and CTR-b in Period 2
    double upgrade_gamma = 1.0;    // REF Period-2 multiplier
    double weibull_shape = 2.0;
    double weibull_scale = 8.5;    // m/s
    double wind_autocorrelation = 0.9;
    // Relative sd of each turbine's deviation from the farm wind.
    double ref_spread = 0.02;
    double ctrb_spread = 0.02;
    double ctrn_spread = 0.02;
    double anemometer_sd = 0.1;    // m/s, CTR-n wind measurement noise
    // Nuisance effects: power scales with density / REF and CTR-b see a diurnal wind shear cycle.
    bool density_effect = false;
    bool diurnal_effect = false;
    double missing_rate = 0.0;     // per measurement cell
    std::int64_t cadence_seconds = kDefaultCadenceSeconds;
    std::string start = "2020-01-01T00:00:00Z";
    std::string ref_id = "REF";
    std::string ctrb_id = "CTRB";
    std::string ctrn_id = "CTRN";
};

struct SyntheticFarm {
    TurbineSeries ref;
    TurbineSeries ctrb;
    TurbineSeries ctrn;
    Instant boundary;
    /// Expected annualized gain fraction implied by upgrade_gamma under the
    /// scenario's wind distribution.
    double truth = 0.0;
    /// Long-term hours per CTR-b power bin and REF baseline AEP, both from
    /// quadrature over the wind distribution.
    PowerFrequency long_term_frequency;
    double aep_kwh = 0.0;
};

void validate(const FarmScenario& scenario);
SyntheticFarm generate(const FarmScenario& scenario, double bin_width = kDefaultBinWidthKw);

}  // namespace gainml

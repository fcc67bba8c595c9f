#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gainml/dataset.hpp"
#include "gainml/evaluation.hpp"

namespace gainml {

inline constexpr double kHoursPerYear = 8766.0;
inline constexpr std::size_t kDefaultBootstrapReplicates = 10;
inline constexpr double kDefaultCiLevel = 0.8;
/// Share of bootstrap replicates that must succeed before an interval is reported.
inline constexpr double kMinBootstrapSuccess = 0.8;

/// Long-term hours per year spent in each power bin.
struct PowerFrequency {
    double bin_width = kDefaultBinWidthKw;
    std::map<std::int64_t, double> hours;

    double total_hours() const;
};

/// Two columns: bin_mid, hours.
PowerFrequency read_power_frequency_csv(std::istream& in, double bin_width = kDefaultBinWidthKw);
PowerFrequency read_power_frequency_csv(const std::filesystem::path& path, double bin_width = kDefaultBinWidthKw);
void write_power_frequency_csv(const PowerFrequency& pi, std::ostream& out);

/// Record counts per CTR-b power bin converted to hours and scaled to one
/// year. This is a short-term stand-in, not a long-term frequency.
PowerFrequency empirical_power_frequency(const AlignedDataset& data, double bin_width = kDefaultBinWidthKw);
PowerFrequency empirical_power_frequency(std::span<const double> powers, std::int64_t cadence_seconds,
                                         double bin_width = kDefaultBinWidthKw);

struct PeriodCurves {
    BiasCurve p1;  // cross-validated on Period 1
    BiasCurve p2;  // one model on all of Period 1, evaluated on Period 2
};

struct PairedPeriodCurves {
    PeriodCurves ref;
    PeriodCurves ctrb;
};

PeriodCurves period_curves(const AlignedDataset& data, Target target, std::span<const Covariate> variables,
                           const FoldPlan& folds, const EvaluationOptions& options = {});
PairedPeriodCurves period_curves_paired(const AlignedDataset& data, std::span<const Covariate> variables,
                                        const FoldPlan& folds, const EvaluationOptions& options = {});

struct ExcludedBin {
    std::int64_t bin_id = 0;
    double bin_mid = 0.0;
    std::string reason;
};

struct GainCurves {
    BiasCurve effect;
    BiasCurve offset;
    BiasCurve gain;
    std::vector<ExcludedBin> excluded;
};

/// Effect = REF(p2) - REF(p1), Offset = CTR-b(p2) - CTR-b(p1), Gain = Effect -
/// Offset, over the bins retained in all four curves.
GainCurves effect_offset_gain(const BiasCurve& ref_p1, const BiasCurve& ref_p2, const BiasCurve& ctrb_p1,
                              const BiasCurve& ctrb_p2);

struct AnnualizedGain {
    double value = 0.0;          // fraction of AEP
    double covered_hours = 0.0;  // pi mass on bins with a gain value
    double total_hours = 0.0;

    double coverage() const { return total_hours > 0.0 ? covered_hours / total_hours : 0.0; }
};

AnnualizedGain annualized_gain(const BiasCurve& gain_curve, const PowerFrequency& pi, double aep_kwh);

struct BootstrapConfig {
    std::size_t replicates = kDefaultBootstrapReplicates;
    double ci_level = kDefaultCiLevel;
    std::uint64_t seed = 0;
};

struct ReplicateOutcome {
    std::size_t replicate = 0;  // 1-based
    std::optional<double> gain;
    std::string failure;
};

struct BootstrapResult {
    std::vector<ReplicateOutcome> replicates;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double level = kDefaultCiLevel;
    std::size_t requested = 0;
    std::uint64_t seed = 0;

    std::vector<double> successful_gains() const;
    double standard_error() const;
};

/// Symmetric order-statistic interval: drops floor(B (1 - level) / 2) values
/// from each end of the sorted replicates.
std::pair<double, double> percentile_interval(std::vector<double> values, double level);

BootstrapResult bootstrap_gain(const AlignedDataset& data, std::span<const Covariate> variables,
                               const BootstrapConfig& config, const PowerFrequency& pi, double aep_kwh,
                               const EvaluationOptions& options = {});

struct GainReport {
    PairedPeriodCurves curves;
    GainCurves gain_curves;
    AnnualizedGain annualized;
    double aep_kwh = 0.0;
    std::uint64_t fold_seed = 0;
    std::optional<BootstrapResult> bootstrap;
};

/// One complete gain estimate: period curves, Effect/Offset/Gain and the
/// annualized gain. Bootstrap is run when `bootstrap` is set.
GainReport quantify_gain(const AlignedDataset& data, std::span<const Covariate> variables, std::uint64_t fold_seed,
                         const PowerFrequency& pi, double aep_kwh, const EvaluationOptions& options = {},
                         std::optional<BootstrapConfig> bootstrap = std::nullopt);

/// Columns: bin_mid, effect, offset, gain, count.
void write_gain_curves_csv(const GainCurves& curves, std::ostream& out);
void write_replicates_csv(const BootstrapResult& result, std::ostream& out);

}  // namespace gainml

#include "gainml/period2.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include "gainml/error.hpp"
#include "gainml/random.hpp"

namespace gainml {

double PowerFrequency::total_hours() const {
    double total = 0.0;
    for (const auto& [id, h] : hours) total += h;
    return total;
}

PowerFrequency read_power_frequency_csv(std::istream& in, double bin_width) {
    PowerFrequency pi{bin_width, {}};
    std::string line;
    bool header_seen = false;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        std::istringstream ls(line);
        std::string mid_s, hours_s;
        std::getline(ls, mid_s, ',');
        std::getline(ls, hours_s, ',');
        double mid = 0.0, hours = 0.0;
        try {
            std::size_t used = 0;
            mid = std::stod(mid_s, &used);
            hours = std::stod(hours_s);
        } catch (const std::exception&) {
            if (!header_seen && row == 1) {
                header_seen = true;
                continue;
            }
            throw Error(ErrorCode::IoError, "power frequency row " + std::to_string(row) + " is not numeric");
        }
        if (hours < 0.0) throw Error(ErrorCode::InvalidArgument, "negative hours in power frequency");
        pi.hours[bin_index(mid, bin_width)] += hours;
    }
    if (pi.total_hours() > kHoursPerYear + 1e-6) {
        throw Error(ErrorCode::InvalidArgument, "power frequency exceeds 8766 hours");
    }
    return pi;
}

PowerFrequency read_power_frequency_csv(const std::filesystem::path& path, double bin_width) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::FileNotFound, "cannot open " + path.string());
    return read_power_frequency_csv(in, bin_width);
}

void write_power_frequency_csv(const PowerFrequency& pi, std::ostream& out) {
    out << "bin_mid,hours\n";
    const auto old = out.precision(17);
    for (const auto& [id, h] : pi.hours) out << bin_midpoint(id, pi.bin_width) << ',' << h << '\n';
    out.precision(old);
}

PowerFrequency empirical_power_frequency(std::span<const double> powers, std::int64_t cadence_seconds,
                                         double bin_width) {
    if (powers.empty()) throw Error(ErrorCode::InvalidArgument, "empty power series");
    PowerFrequency pi{bin_width, {}};
    const double hours_per_record = static_cast<double>(cadence_seconds) / 3600.0;
    for (double p : powers) pi.hours[bin_index(p, bin_width)] += hours_per_record;
    const double scale = kHoursPerYear / pi.total_hours();
    for (auto& [id, h] : pi.hours) h *= scale;
    return pi;
}

PowerFrequency empirical_power_frequency(const AlignedDataset& data, double bin_width) {
    std::vector<double> powers;
    powers.reserve(data.records.size());
    for (const auto& r : data.records) powers.push_back(r.y_ctrb);
    return empirical_power_frequency(powers, data.cadence_seconds, bin_width);
}

namespace {

PredictionSet period2_predictions(const AlignedDataset& data, const KernelModel& model,
                                  std::span<const std::size_t> p2, std::span<const double> test_rows, Target target) {
    const auto y_hat = model.predict_rows(test_rows);
    PredictionSet preds;
    preds.reserve(p2.size());
    for (std::size_t j = 0; j < p2.size(); ++j) {
        const auto& r = data.records[p2[j]];
        preds.push_back({p2[j], target == Target::Ref ? r.y_ref : r.y_ctrb, y_hat[j], r.y_ctrb});
    }
    return preds;
}

}  // namespace

PairedPeriodCurves period_curves_paired(const AlignedDataset& data, std::span<const Covariate> variables,
                                        const FoldPlan& folds, const EvaluationOptions& options) {
    const auto p1 = data.indices(Period::P1);
    const auto p2 = data.indices(Period::P2);
    if (p1.empty()) throw Error(ErrorCode::EmptyPeriod, "Period 1 is empty");
    if (p2.empty()) throw Error(ErrorCode::EmptyPeriod, "Period 2 is empty");

    auto cv = cv_evaluate_paired(data, variables, folds, options);

    std::size_t width = 0;
    for (auto c : variables) width += expanded_width(c);
    auto x = std::make_shared<const DesignMatrix>(
        DesignMatrix::standardize(feature_rows(data, p1, variables), width, expanded_column_names(variables)));
    std::vector<double> y_ref, y_ctrb;
    for (auto i : p1) {
        y_ref.push_back(data.records[i].y_ref);
        y_ctrb.push_back(data.records[i].y_ctrb);
    }
    auto models = fit_responses(x, {std::move(y_ref), std::move(y_ctrb)}, options.k_grid.for_size(p1.size()));
    const auto test_rows = x->transform(feature_rows(data, p2, variables));

    PairedPeriodCurves out;
    out.ref.p1 = std::move(cv.ref.cv_bias_curve);
    out.ctrb.p1 = std::move(cv.ctrb.cv_bias_curve);
    out.ref.p2 = bias_curve(period2_predictions(data, models[0], p2, test_rows, Target::Ref), options.bin_width,
                            options.min_bin_count);
    out.ctrb.p2 = bias_curve(period2_predictions(data, models[1], p2, test_rows, Target::CtrB), options.bin_width,
                             options.min_bin_count);
    return out;
}

PeriodCurves period_curves(const AlignedDataset& data, Target target, std::span<const Covariate> variables,
                           const FoldPlan& folds, const EvaluationOptions& options) {
    auto both = period_curves_paired(data, variables, folds, options);
    return target == Target::Ref ? both.ref : both.ctrb;
}

GainCurves effect_offset_gain(const BiasCurve& ref_p1, const BiasCurve& ref_p2, const BiasCurve& ctrb_p1,
                              const BiasCurve& ctrb_p2) {
    const double w = ref_p1.bin_width;
    for (const auto* c : {&ref_p2, &ctrb_p1, &ctrb_p2}) {
        if (c->bin_width != w) throw Error(ErrorCode::BinWidthMismatch, "curves use different bin widths");
    }
    const BiasCurve* curves[] = {&ref_p1, &ref_p2, &ctrb_p1, &ctrb_p2};
    const char* labels[] = {"REF p1", "REF p2", "CTR-b p1", "CTR-b p2"};
    std::set<std::int64_t> all;
    for (const auto* c : curves) {
        for (const auto& b : c->bins) all.insert(b.bin_id);
    }

    GainCurves out{{w, {}}, {w, {}}, {w, {}}, {}};
    for (auto id : all) {
        const BiasBin* found[4];
        std::string missing;
        for (int i = 0; i < 4; ++i) {
            found[i] = curves[i]->find(id);
            if (!found[i]) missing += (missing.empty() ? "" : ", ") + std::string(labels[i]);
        }
        const double mid = bin_midpoint(id, w);
        if (!missing.empty()) {
            out.excluded.push_back({id, mid, "not retained in " + missing});
            continue;
        }
        const double effect = found[1]->value - found[0]->value;
        const double offset = found[3]->value - found[2]->value;
        const std::size_t count = std::min({found[0]->count, found[1]->count, found[2]->count, found[3]->count});
        out.effect.bins.push_back({id, mid, effect, count});
        out.offset.bins.push_back({id, mid, offset, count});
        out.gain.bins.push_back({id, mid, effect - offset, count});
    }
    return out;
}

AnnualizedGain annualized_gain(const BiasCurve& gain_curve, const PowerFrequency& pi, double aep_kwh) {
    if (!(aep_kwh > 0.0)) throw Error(ErrorCode::NonpositiveAEP, "AEP must be positive");
    if (!gain_curve.bins.empty() && gain_curve.bin_width != pi.bin_width) {
        throw Error(ErrorCode::BinWidthMismatch, "power frequency and gain curve use different bin widths");
    }
    AnnualizedGain out;
    out.total_hours = pi.total_hours();
    double energy = 0.0;
    for (const auto& b : gain_curve.bins) {
        auto it = pi.hours.find(b.bin_id);
        if (it == pi.hours.end()) continue;
        energy += it->second * b.value;
        out.covered_hours += it->second;
    }
    out.value = energy / aep_kwh;
    return out;
}

std::vector<double> BootstrapResult::successful_gains() const {
    std::vector<double> out;
    for (const auto& r : replicates) {
        if (r.gain) out.push_back(*r.gain);
    }
    return out;
}

double BootstrapResult::standard_error() const {
    const auto g = successful_gains();
    if (g.size() < 2) return 0.0;
    const double mean = std::accumulate(g.begin(), g.end(), 0.0) / static_cast<double>(g.size());
    double ss = 0.0;
    for (double v : g) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(g.size() - 1));
}

std::pair<double, double> percentile_interval(std::vector<double> values, double level) {
    if (values.empty()) throw Error(ErrorCode::InvalidArgument, "percentile interval of no values");
    if (!(level > 0.0 && level < 1.0)) throw Error(ErrorCode::InvalidArgument, "CI level must lie in (0, 1)");
    std::sort(values.begin(), values.end());
    const std::size_t b = values.size();
    auto drop = static_cast<std::size_t>(std::floor(static_cast<double>(b) * (1.0 - level) / 2.0 + 1e-9));
    drop = std::min(drop, (b - 1) / 2);
    return {values[drop], values[b - 1 - drop]};
}

namespace {

double estimate_gain(const AlignedDataset& data, std::span<const Covariate> variables, const FoldPlan& folds,
                     const PowerFrequency& pi, double aep_kwh, const EvaluationOptions& options) {
    auto curves = period_curves_paired(data, variables, folds, options);
    auto gc = effect_offset_gain(curves.ref.p1, curves.ref.p2, curves.ctrb.p1, curves.ctrb.p2);
    return annualized_gain(gc.gain, pi, aep_kwh).value;
}

}  // namespace

BootstrapResult bootstrap_gain(const AlignedDataset& data, std::span<const Covariate> variables,
                               const BootstrapConfig& config, const PowerFrequency& pi, double aep_kwh,
                               const EvaluationOptions& options) {
    if (config.replicates < 2) throw Error(ErrorCode::InvalidArgument, "bootstrap needs at least 2 replicates");
    if (!(config.ci_level > 0.0 && config.ci_level < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "CI level must lie in (0, 1)");
    }
    if (!(aep_kwh > 0.0)) throw Error(ErrorCode::NonpositiveAEP, "AEP must be positive");
    const std::size_t n = data.records.size();
    if (n == 0) throw Error(ErrorCode::EmptyPeriod, "empty dataset");

    BootstrapResult result;
    result.level = config.ci_level;
    result.requested = config.replicates;
    result.seed = config.seed;
    for (std::size_t g = 1; g <= config.replicates; ++g) {
        std::mt19937_64 rng(derive_seed(config.seed, 2 * g));
        std::vector<std::size_t> draw(n);
        for (auto& d : draw) d = static_cast<std::size_t>(uniform_index(rng, n));
        // Records are in time order, so sorted indices keep the replicate in time order.
        std::sort(draw.begin(), draw.end());

        AlignedDataset replicate;
        replicate.cadence_seconds = data.cadence_seconds;
        replicate.boundary = data.boundary;
        replicate.roles = data.roles;
        replicate.records.reserve(n);
        for (auto i : draw) replicate.records.push_back(data.records[i]);

        ReplicateOutcome outcome{g, std::nullopt, {}};
        try {
            const auto folds = make_folds(replicate.count(Period::P1), derive_seed(config.seed, 2 * g + 1));
            outcome.gain = estimate_gain(replicate, variables, folds, pi, aep_kwh, options);
        } catch (const Error& e) {
            outcome.failure = std::string(error_code_name(e.code())) + ": " + e.what();
        }
        result.replicates.push_back(std::move(outcome));
    }

    const auto gains = result.successful_gains();
    if (static_cast<double>(gains.size()) < kMinBootstrapSuccess * static_cast<double>(config.replicates)) {
        throw Error(ErrorCode::BootstrapInsufficient, std::to_string(gains.size()) + " of " +
                                                          std::to_string(config.replicates) +
                                                          " bootstrap replicates succeeded");
    }
    std::tie(result.ci_low, result.ci_high) = percentile_interval(gains, config.ci_level);
    return result;
}

GainReport quantify_gain(const AlignedDataset& data, std::span<const Covariate> variables, std::uint64_t fold_seed,
                         const PowerFrequency& pi, double aep_kwh, const EvaluationOptions& options,
                         std::optional<BootstrapConfig> bootstrap) {
    if (!(aep_kwh > 0.0)) throw Error(ErrorCode::NonpositiveAEP, "AEP must be positive");
    GainReport report;
    report.aep_kwh = aep_kwh;
    report.fold_seed = fold_seed;
    const auto folds = make_folds(data.count(Period::P1), fold_seed);
    report.curves = period_curves_paired(data, variables, folds, options);
    report.gain_curves = effect_offset_gain(report.curves.ref.p1, report.curves.ref.p2, report.curves.ctrb.p1,
                                            report.curves.ctrb.p2);
    report.annualized = annualized_gain(report.gain_curves.gain, pi, aep_kwh);
    if (bootstrap) report.bootstrap = bootstrap_gain(data, variables, *bootstrap, pi, aep_kwh, options);
    return report;
}

void write_gain_curves_csv(const GainCurves& curves, std::ostream& out) {
    out << "bin_mid,effect,offset,gain,count\n";
    const auto old = out.precision(17);
    for (std::size_t i = 0; i < curves.gain.bins.size(); ++i) {
        out << curves.gain.bins[i].bin_mid << ',' << curves.effect.bins[i].value << ','
            << curves.offset.bins[i].value << ',' << curves.gain.bins[i].value << ',' << curves.gain.bins[i].count
            << '\n';
    }
    out.precision(old);
}

void write_replicates_csv(const BootstrapResult& result, std::ostream& out) {
    out << "replicate,gain,status\n";
    const auto old = out.precision(17);
    for (const auto& r : result.replicates) {
        out << r.replicate << ',';
        if (r.gain) out << *r.gain;
        out << ',' << (r.gain ? "ok" : "failed") << '\n';
    }
    out.precision(old);
}

}  // namespace gainml

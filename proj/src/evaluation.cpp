#include "gainml/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <ostream>

#include "gainml/error.hpp"
#include "gainml/random.hpp"

namespace gainml {

std::vector<std::size_t> FoldPlan::test_positions(int fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < fold_of.size(); ++i) {
        if (fold_of[i] == fold) out.push_back(i);
    }
    return out;
}

std::vector<std::size_t> FoldPlan::train_positions(int fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < fold_of.size(); ++i) {
        if (fold_of[i] != fold) out.push_back(i);
    }
    return out;
}

FoldPlan make_folds(std::size_t n_p1, std::uint64_t seed) {
    if (n_p1 < static_cast<std::size_t>(kFoldCount)) {
        throw Error(ErrorCode::TooFewRecords,
                    "5-fold CV needs at least 5 Period-1 records, got " + std::to_string(n_p1));
    }
    std::vector<std::size_t> order(n_p1);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(mix_seed(seed));
    shuffle(std::span<std::size_t>(order), rng);
    FoldPlan plan{std::vector<int>(n_p1), seed};
    for (std::size_t i = 0; i < n_p1; ++i) plan.fold_of[order[i]] = static_cast<int>(i % kFoldCount) + 1;
    return plan;
}

double rmse(const PredictionSet& preds) {
    if (preds.empty()) throw Error(ErrorCode::EmptyPredictionSet, "RMSE of an empty prediction set");
    double ss = 0.0;
    for (const auto& p : preds) {
        const double r = p.y_true - p.y_hat;
        ss += r * r;
    }
    return std::sqrt(ss / static_cast<double>(preds.size()));
}

double relative_bias(const PredictionSet& preds) {
    if (preds.empty()) throw Error(ErrorCode::EmptyPredictionSet, "BIAS of an empty prediction set");
    double num = 0.0;
    double den = 0.0;
    for (const auto& p : preds) {
        num += p.y_hat - p.y_true;
        den += p.y_hat;
    }
    // 1 kW * n * 1e-6
    if (!(den > 1e-6 * static_cast<double>(preds.size()))) {
        throw Error(ErrorCode::DegenerateDenominator, "sum of predictions is not positive");
    }
    return num / den;
}

const BiasBin* BiasCurve::find(std::int64_t bin_id) const {
    auto it = std::lower_bound(bins.begin(), bins.end(), bin_id,
                               [](const BiasBin& b, std::int64_t id) { return b.bin_id < id; });
    return (it != bins.end() && it->bin_id == bin_id) ? &*it : nullptr;
}

std::int64_t bin_index(double power, double bin_width) {
    return static_cast<std::int64_t>(std::floor(power / bin_width));
}

double bin_midpoint(std::int64_t bin_id, double bin_width) {
    return (static_cast<double>(bin_id) + 0.5) * bin_width;
}

namespace {

double median_in_place(std::vector<double>& v) {
    const std::size_t n = v.size();
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
    std::nth_element(v.begin(), mid, v.end());
    if (n % 2 == 1) return *mid;
    const double upper = *mid;
    const double lower = *std::max_element(v.begin(), mid);
    return 0.5 * (lower + upper);
}

void check_widths(const BiasCurve& a, const BiasCurve& b) {
    if (a.bin_width != b.bin_width) {
        throw Error(ErrorCode::BinWidthMismatch, "curves use different bin widths");
    }
}

}  // namespace

BiasCurve bias_curve(const PredictionSet& preds, double bin_width, std::size_t min_bin_count) {
    if (!(bin_width > 0.0)) throw Error(ErrorCode::InvalidArgument, "bin width must be positive");
    std::map<std::int64_t, std::vector<double>> groups;
    for (const auto& p : preds) groups[bin_index(p.bin_power, bin_width)].push_back(p.y_true - p.y_hat);
    BiasCurve curve{bin_width, {}};
    for (auto& [id, residuals] : groups) {
        if (residuals.size() < min_bin_count || residuals.empty()) continue;
        const std::size_t count = residuals.size();
        curve.bins.push_back({id, bin_midpoint(id, bin_width), median_in_place(residuals), count});
    }
    return curve;
}

BiasCurve average_curves(std::span<const BiasCurve> curves, std::size_t min_presence) {
    if (curves.empty()) return {};
    struct Acc {
        double sum = 0.0;
        std::size_t present = 0;
        std::size_t count = 0;
    };
    std::map<std::int64_t, Acc> acc;
    for (const auto& c : curves) {
        check_widths(curves.front(), c);
        for (const auto& b : c.bins) {
            auto& a = acc[b.bin_id];
            a.sum += b.value;
            a.present += 1;
            a.count += b.count;
        }
    }
    BiasCurve out{curves.front().bin_width, {}};
    for (const auto& [id, a] : acc) {
        if (a.present < min_presence) continue;
        out.bins.push_back({id, bin_midpoint(id, out.bin_width), a.sum / static_cast<double>(a.present), a.count});
    }
    return out;
}

BiasCurve curve_diff(const BiasCurve& a, const BiasCurve& b) {
    check_widths(a, b);
    BiasCurve out{a.bin_width, {}};
    for (const auto& bin : a.bins) {
        if (const auto* other = b.find(bin.bin_id)) {
            out.bins.push_back({bin.bin_id, bin.bin_mid, bin.value - other->value, std::min(bin.count, other->count)});
        }
    }
    return out;
}

std::string_view target_name(Target t) { return t == Target::Ref ? "REF" : "CTR-b"; }

namespace {

double response_of(const AlignedRecord& r, Target t) { return t == Target::Ref ? r.y_ref : r.y_ctrb; }

std::vector<CvMetrics> cross_validate(const AlignedDataset& data, std::span<const Target> targets,
                                      std::span<const Covariate> variables, const FoldPlan& folds,
                                      const EvaluationOptions& options) {
    if (variables.empty()) throw Error(ErrorCode::InvalidArgument, "cross-validation needs at least one covariate");
    const auto p1 = data.indices(Period::P1);
    if (folds.size() != p1.size()) {
        throw Error(ErrorCode::InvalidArgument, "fold plan covers " + std::to_string(folds.size()) +
                                                    " records but Period 1 has " + std::to_string(p1.size()));
    }
    std::size_t width = 0;
    for (auto c : variables) width += expanded_width(c);
    const auto names = expanded_column_names(variables);

    std::vector<CvMetrics> out(targets.size());
    for (int fold = 1; fold <= kFoldCount; ++fold) {
        std::vector<std::size_t> train, test;
        for (auto pos : folds.train_positions(fold)) train.push_back(p1[pos]);
        for (auto pos : folds.test_positions(fold)) test.push_back(p1[pos]);
        if (train.size() < 2) throw Error(ErrorCode::TooFewRecords, "fold training split has fewer than 2 records");

        auto x = std::make_shared<const DesignMatrix>(
            DesignMatrix::standardize(feature_rows(data, train, variables), width, names));
        std::vector<std::vector<double>> ys;
        for (auto t : targets) {
            std::vector<double> y;
            y.reserve(train.size());
            for (auto idx : train) y.push_back(response_of(data.records[idx], t));
            ys.push_back(std::move(y));
        }
        const auto grid = options.k_grid.for_size(train.size());
        auto models = fit_responses(x, std::move(ys), grid);
        const auto test_rows = x->transform(feature_rows(data, test, variables));

        for (std::size_t ti = 0; ti < targets.size(); ++ti) {
            const auto y_hat = models[ti].predict_rows(test_rows);
            FoldMetrics fm;
            fm.fold = fold;
            fm.k = models[ti].k();
            fm.predictions.reserve(test.size());
            for (std::size_t j = 0; j < test.size(); ++j) {
                const auto& rec = data.records[test[j]];
                fm.predictions.push_back({test[j], response_of(rec, targets[ti]), y_hat[j], rec.y_ctrb});
            }
            fm.rmse = rmse(fm.predictions);
            fm.bias = relative_bias(fm.predictions);
            fm.curve = bias_curve(fm.predictions, options.bin_width, options.min_bin_count);
            out[ti].per_fold.push_back(std::move(fm));
        }
    }

    for (auto& m : out) {
        double rs = 0.0, bs = 0.0;
        std::vector<BiasCurve> curves;
        for (const auto& f : m.per_fold) {
            rs += f.rmse;
            bs += f.bias;
            curves.push_back(f.curve);
        }
        m.cv_rmse = rs / kFoldCount;
        m.cv_bias = bs / kFoldCount;
        m.cv_bias_curve = average_curves(curves, kMinFoldPresence);
        if (m.cv_bias_curve.bins.empty()) m.cv_bias_curve.bin_width = options.bin_width;
    }
    return out;
}

}  // namespace

CvMetrics cv_evaluate(const AlignedDataset& data, Target target, std::span<const Covariate> variables,
                      const FoldPlan& folds, const EvaluationOptions& options) {
    const Target targets[] = {target};
    return std::move(cross_validate(data, targets, variables, folds, options).front());
}

PairedCv cv_evaluate_paired(const AlignedDataset& data, std::span<const Covariate> variables, const FoldPlan& folds,
                            const EvaluationOptions& options) {
    const Target targets[] = {Target::Ref, Target::CtrB};
    auto metrics = cross_validate(data, targets, variables, folds, options);
    PairedCv out;
    out.ref = std::move(metrics[0]);
    out.ctrb = std::move(metrics[1]);
    for (std::size_t f = 0; f < out.ref.per_fold.size(); ++f) {
        out.fold_diffs.push_back(curve_diff(out.ref.per_fold[f].curve, out.ctrb.per_fold[f].curve));
    }
    out.cv_diff = average_curves(out.fold_diffs, kMinFoldPresence);
    out.cv_diff.bin_width = options.bin_width;
    return out;
}

void write_curve_csv(const BiasCurve& curve, std::string_view fold_label, std::ostream& out, bool header) {
    if (header) out << "bin_mid,value,count,fold\n";
    const auto old_precision = out.precision(17);
    for (const auto& b : curve.bins) {
        out << b.bin_mid << ',' << b.value << ',' << b.count << ',' << fold_label << '\n';
    }
    out.precision(old_precision);
}

void write_cv_curves_csv(const CvMetrics& metrics, std::ostream& out) {
    out << "bin_mid,value,count,fold\n";
    for (const auto& f : metrics.per_fold) write_curve_csv(f.curve, std::to_string(f.fold), out, false);
    write_curve_csv(metrics.cv_bias_curve, "cv", out, false);
}

}  // namespace gainml

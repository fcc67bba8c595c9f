#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "gainml/dataset.hpp"
#include "gainml/kernel.hpp"

namespace gainml {

inline constexpr int kFoldCount = 5;
inline constexpr double kDefaultBinWidthKw = 100.0;
inline constexpr std::size_t kDefaultMinBinCount = 5;
/// A cross-validated bin must be retained in at least this many folds.
inline constexpr std::size_t kMinFoldPresence = 3;

/// Balanced random assignment of Period-1 positions (0-based, in
/// dataset.indices(P1) order) to folds 1..5.
struct FoldPlan {
    std::vector<int> fold_of;
    std::uint64_t seed = 0;

    std::size_t size() const { return fold_of.size(); }
    std::vector<std::size_t> test_positions(int fold) const;
    std::vector<std::size_t> train_positions(int fold) const;
};

FoldPlan make_folds(std::size_t n_p1, std::uint64_t seed);

struct Prediction {
    std::size_t index = 0;  // record index in the dataset
    double y_true = 0.0;
    double y_hat = 0.0;
    double bin_power = 0.0;  // CTR-b power of the record
};

using PredictionSet = std::vector<Prediction>;

double rmse(const PredictionSet& preds);
/// sum(y_hat - y) / sum(y_hat); positive means over-prediction.
double relative_bias(const PredictionSet& preds);

struct BiasBin {
    std::int64_t bin_id = 0;  // floor(bin_power / bin_width)
    double bin_mid = 0.0;     // (bin_id + 0.5) * bin_width
    double value = 0.0;       // kW
    std::size_t count = 0;
};

struct BiasCurve {
    double bin_width = kDefaultBinWidthKw;
    std::vector<BiasBin> bins;  // ordered by bin_id

    const BiasBin* find(std::int64_t bin_id) const;
};

std::int64_t bin_index(double power, double bin_width);
double bin_midpoint(std::int64_t bin_id, double bin_width);

/// Per-bin median residual (y - y_hat), binned by CTR-b power.
BiasCurve bias_curve(const PredictionSet& preds, double bin_width = kDefaultBinWidthKw,
                     std::size_t min_bin_count = kDefaultMinBinCount);

/// Per-bin mean over the curves where the bin is present; bins present in
/// fewer than `min_presence` curves are dropped. Counts are summed.
BiasCurve average_curves(std::span<const BiasCurve> curves, std::size_t min_presence);

/// a - b over the bins retained in both; count is the smaller of the two.
BiasCurve curve_diff(const BiasCurve& a, const BiasCurve& b);

enum class Target { Ref, CtrB };
std::string_view target_name(Target t);

struct EvaluationOptions {
    double bin_width = kDefaultBinWidthKw;
    std::size_t min_bin_count = kDefaultMinBinCount;
    KGrid k_grid;
};

struct FoldMetrics {
    int fold = 0;
    double rmse = 0.0;
    double bias = 0.0;
    BiasCurve curve;
    std::size_t k = 0;
    PredictionSet predictions;
};

struct CvMetrics {
    double cv_rmse = 0.0;
    double cv_bias = 0.0;
    BiasCurve cv_bias_curve;
    std::vector<FoldMetrics> per_fold;
};

CvMetrics cv_evaluate(const AlignedDataset& data, Target target, std::span<const Covariate> variables,
                      const FoldPlan& folds, const EvaluationOptions& options = {});

/// REF and CTR-b cross-validated on one shared fold plan and design. The
/// neighbour search is shared between the two responses.
struct PairedCv {
    CvMetrics ref;
    CvMetrics ctrb;
    std::vector<BiasCurve> fold_diffs;  // per-fold DIFF_b
    BiasCurve cv_diff;                  // CV_DIFF_b
};

PairedCv cv_evaluate_paired(const AlignedDataset& data, std::span<const Covariate> variables,
                            const FoldPlan& folds, const EvaluationOptions& options = {});

/// Columns: bin_mid, value, count, fold ("cv" for the averaged curve).
void write_cv_curves_csv(const CvMetrics& metrics, std::ostream& out);
void write_curve_csv(const BiasCurve& curve, std::string_view fold_label, std::ostream& out,
                     bool header = true);

}  // namespace gainml

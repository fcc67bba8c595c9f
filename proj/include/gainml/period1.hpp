#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gainml/dataset.hpp"
#include "gainml/evaluation.hpp"

namespace gainml {

/// |CV_DIFF_b| limit (kW) a good CTR-b/CTR-n pair should respect in every bin.
inline constexpr double kPairDiffThresholdKw = 10.0;

struct RemovalCandidate {
    Covariate variable;
    double cv_rmse = 0.0;
};

/// One pass of backward elimination. The first step records the full model
/// (no removal, always accepted).
struct SelectionStep {
    std::vector<Covariate> candidate_set;
    std::optional<Covariate> removed;
    std::vector<RemovalCandidate> removals;
    double cv_rmse = 0.0;  // T for the first step, CV_{l*} afterwards
    bool accepted = false;
};

struct SelectionTrace {
    std::vector<SelectionStep> steps;
    std::vector<Covariate> final_set;
    double final_cv_rmse = 0.0;
};

/// Backward elimination on the REF model's cross-validated RMSE, starting
/// from `candidates` (all six covariates by default).
SelectionTrace select_variables(const AlignedDataset& data, const FoldPlan& folds,
                                const EvaluationOptions& options = {},
                                std::span<const Covariate> candidates = kCandidateCovariates);

struct PairAssessment {
    std::string ctrb_id;
    std::string ctrn_id;
    CvMetrics ref_metrics;
    CvMetrics ctrb_metrics;
    std::vector<BiasCurve> fold_diffs;
    BiasCurve diff_curve;  // CV_DIFF_b
    double max_abs_diff = 0.0;
    bool passes_threshold = false;
};

/// `data` must be aligned with the pair's roles (CTR-b response, CTR-n covariates).
PairAssessment assess_pair(const AlignedDataset& data, std::string ctrb_id, std::string ctrn_id,
                           std::span<const Covariate> variables, const FoldPlan& folds,
                           const EvaluationOptions& options = {});

double max_abs_value(const BiasCurve& curve);
/// Inclusive: a pair with max |DIFF| of exactly the threshold passes.
bool within_pair_threshold(double max_abs_diff);

/// True when `a` ranks strictly ahead of `b`.
bool ranks_before(const PairAssessment& a, const PairAssessment& b);

/// Sorted by (passes threshold, max |DIFF|, REF CV_RMSE, |REF CV_BIAS|, ids).
std::vector<PairAssessment> rank_pairs(std::vector<PairAssessment> assessments);

void write_selection_text(const SelectionTrace& trace, std::ostream& out);
void write_ranking_text(std::span<const PairAssessment> ranked, std::ostream& out);

}  // namespace gainml

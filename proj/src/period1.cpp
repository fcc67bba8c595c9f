#include "gainml/period1.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <tuple>

#include "gainml/error.hpp"

namespace gainml {

namespace {

double ref_cv_rmse(const AlignedDataset& data, std::span<const Covariate> variables, const FoldPlan& folds,
                   const EvaluationOptions& options) {
    return cv_evaluate(data, Target::Ref, variables, folds, options).cv_rmse;
}

}  // namespace

SelectionTrace select_variables(const AlignedDataset& data, const FoldPlan& folds, const EvaluationOptions& options,
                                std::span<const Covariate> candidates) {
    if (candidates.empty()) throw Error(ErrorCode::InvalidArgument, "variable selection needs candidates");
    std::vector<Covariate> current(candidates.begin(), candidates.end());

    SelectionTrace trace;
    double best = ref_cv_rmse(data, current, folds, options);
    trace.steps.push_back({current, std::nullopt, {}, best, true});

    while (current.size() > 1) {
        SelectionStep step;
        step.candidate_set = current;
        std::size_t arg = 0;
        for (std::size_t l = 0; l < current.size(); ++l) {
            std::vector<Covariate> reduced = current;
            reduced.erase(reduced.begin() + static_cast<std::ptrdiff_t>(l));
            const double cv = ref_cv_rmse(data, reduced, folds, options);
            step.removals.push_back({current[l], cv});
            if (cv < step.removals[arg].cv_rmse) arg = l;
        }
        step.removed = current[arg];
        step.cv_rmse = step.removals[arg].cv_rmse;
        step.accepted = step.cv_rmse < best;
        trace.steps.push_back(step);
        if (!step.accepted) break;
        current.erase(current.begin() + static_cast<std::ptrdiff_t>(arg));
        best = step.cv_rmse;
    }
    trace.final_set = current;
    trace.final_cv_rmse = best;
    return trace;
}

PairAssessment assess_pair(const AlignedDataset& data, std::string ctrb_id, std::string ctrn_id,
                           std::span<const Covariate> variables, const FoldPlan& folds,
                           const EvaluationOptions& options) {
    for (const auto& [id, role] : data.roles) {
        if (role == Role::Ref && (id == ctrb_id || id == ctrn_id)) {
            throw Error(ErrorCode::InvalidArgument, "control turbine '" + id + "' is the REF turbine");
        }
    }
    if (ctrb_id == ctrn_id) {
        throw Error(ErrorCode::InvalidArgument, "CTR-b and CTR-n must be different turbines");
    }
    auto paired = cv_evaluate_paired(data, variables, folds, options);
    PairAssessment out;
    out.ctrb_id = std::move(ctrb_id);
    out.ctrn_id = std::move(ctrn_id);
    out.ref_metrics = std::move(paired.ref);
    out.ctrb_metrics = std::move(paired.ctrb);
    out.fold_diffs = std::move(paired.fold_diffs);
    out.diff_curve = std::move(paired.cv_diff);
    out.max_abs_diff = max_abs_value(out.diff_curve);
    out.passes_threshold = within_pair_threshold(out.max_abs_diff);
    return out;
}

double max_abs_value(const BiasCurve& curve) {
    double m = 0.0;
    for (const auto& b : curve.bins) m = std::max(m, std::abs(b.value));
    return m;
}

bool within_pair_threshold(double max_abs_diff) { return max_abs_diff <= kPairDiffThresholdKw; }

bool ranks_before(const PairAssessment& a, const PairAssessment& b) {
    auto key = [](const PairAssessment& p) {
        return std::tuple<bool, double, double, double, const std::string&, const std::string&>(
            !p.passes_threshold, p.max_abs_diff, p.ref_metrics.cv_rmse, std::abs(p.ref_metrics.cv_bias), p.ctrb_id,
            p.ctrn_id);
    };
    return key(a) < key(b);
}

std::vector<PairAssessment> rank_pairs(std::vector<PairAssessment> assessments) {
    std::stable_sort(assessments.begin(), assessments.end(), ranks_before);
    return assessments;
}

void write_selection_text(const SelectionTrace& trace, std::ostream& out) {
    char buf[160];
    for (std::size_t i = 0; i < trace.steps.size(); ++i) {
        const auto& s = trace.steps[i];
        out << "step " << i << ": {";
        for (std::size_t j = 0; j < s.candidate_set.size(); ++j) {
            out << (j ? ", " : "") << covariate_name(s.candidate_set[j]);
        }
        out << "}\n";
        if (!s.removed) {
            std::snprintf(buf, sizeof buf, "  full model CV_RMSE = %.4f kW\n", s.cv_rmse);
            out << buf;
            continue;
        }
        for (const auto& r : s.removals) {
            std::snprintf(buf, sizeof buf, "  without %-9s CV_RMSE = %.4f kW\n",
                          std::string(covariate_name(r.variable)).c_str(), r.cv_rmse);
            out << buf;
        }
        out << "  best removal: " << covariate_name(*s.removed) << (s.accepted ? " (accepted)" : " (rejected)")
            << '\n';
    }
    out << "selected: {";
    for (std::size_t j = 0; j < trace.final_set.size(); ++j) {
        out << (j ? ", " : "") << covariate_name(trace.final_set[j]);
    }
    out << "}\n";
}

void write_ranking_text(std::span<const PairAssessment> ranked, std::ostream& out) {
    char buf[200];
    std::snprintf(buf, sizeof buf, "%-4s %-12s %-12s %10s %10s %12s %6s\n", "rank", "CTR-b", "CTR-n",
                  "CV_RMSE", "CV_BIAS%", "max|DIFF|", "<=10kW");
    out << buf;
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        const auto& p = ranked[i];
        std::snprintf(buf, sizeof buf, "%-4zu %-12s %-12s %10.3f %10.3f %12.3f %6s\n", i + 1, p.ctrb_id.c_str(),
                      p.ctrn_id.c_str(), p.ref_metrics.cv_rmse, 100.0 * p.ref_metrics.cv_bias, p.max_abs_diff,
                      p.passes_threshold ? "yes" : "no");
        out << buf;
    }
}

}  // namespace gainml

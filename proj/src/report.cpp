#include "gainml/report.hpp"

namespace gainml {

using nlohmann::json;

json curve_to_json(const BiasCurve& curve) {
    json bins = json::array();
    for (const auto& b : curve.bins) {
        bins.push_back({{"bin_id", b.bin_id}, {"bin_mid", b.bin_mid}, {"value", b.value}, {"count", b.count}});
    }
    return {{"bin_width", curve.bin_width}, {"bins", bins}};
}

json cv_metrics_to_json(const CvMetrics& m) {
    json folds = json::array();
    for (const auto& f : m.per_fold) {
        folds.push_back({{"fold", f.fold},
                         {"rmse", f.rmse},
                         {"bias", f.bias},
                         {"k", f.k},
                         {"n_test", f.predictions.size()},
                         {"bias_curve", curve_to_json(f.curve)}});
    }
    return {{"cv_rmse", m.cv_rmse},
            {"cv_bias", m.cv_bias},
            {"cv_bias_curve", curve_to_json(m.cv_bias_curve)},
            {"per_fold", folds}};
}

json selection_to_json(const SelectionTrace& trace) {
    json steps = json::array();
    for (const auto& s : trace.steps) {
        json removals = json::array();
        for (const auto& r : s.removals) {
            removals.push_back({{"variable", covariate_name(r.variable)}, {"cv_rmse", r.cv_rmse}});
        }
        steps.push_back({{"candidate_set", covariate_names(s.candidate_set)},
                         {"removed", s.removed ? json(covariate_name(*s.removed)) : json(nullptr)},
                         {"removals", removals},
                         {"cv_rmse", s.cv_rmse},
                         {"accepted", s.accepted}});
    }
    return {{"steps", steps}, {"final_set", covariate_names(trace.final_set)}, {"final_cv_rmse", trace.final_cv_rmse}};
}

json ranking_to_json(std::span<const PairAssessment> ranked) {
    json rows = json::array();
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        const auto& p = ranked[i];
        json fold_diffs = json::array();
        for (const auto& d : p.fold_diffs) fold_diffs.push_back(curve_to_json(d));
        rows.push_back({{"rank", i + 1},
                        {"ctrb", p.ctrb_id},
                        {"ctrn", p.ctrn_id},
                        {"max_abs_diff", p.max_abs_diff},
                        {"passes_10kw", p.passes_threshold},
                        {"ref", cv_metrics_to_json(p.ref_metrics)},
                        {"ctrb_model", cv_metrics_to_json(p.ctrb_metrics)},
                        {"cv_diff_curve", curve_to_json(p.diff_curve)},
                        {"fold_diff_curves", fold_diffs}});
    }
    return rows;
}

json gain_report_to_json(const GainReport& r) {
    json excluded = json::array();
    for (const auto& e : r.gain_curves.excluded) {
        excluded.push_back({{"bin_id", e.bin_id}, {"bin_mid", e.bin_mid}, {"reason", e.reason}});
    }
    json j{{"annualized_gain", r.annualized.value},
           {"covered_hours", r.annualized.covered_hours},
           {"total_hours", r.annualized.total_hours},
           {"coverage", r.annualized.coverage()},
           {"aep_kwh", r.aep_kwh},
           {"fold_seed", r.fold_seed},
           {"effect_curve", curve_to_json(r.gain_curves.effect)},
           {"offset_curve", curve_to_json(r.gain_curves.offset)},
           {"gain_curve", curve_to_json(r.gain_curves.gain)},
           {"bias_curves",
            {{"ref_p1", curve_to_json(r.curves.ref.p1)},
             {"ref_p2", curve_to_json(r.curves.ref.p2)},
             {"ctrb_p1", curve_to_json(r.curves.ctrb.p1)},
             {"ctrb_p2", curve_to_json(r.curves.ctrb.p2)}}},
           {"excluded_bins", excluded}};
    if (r.bootstrap) {
        const auto& b = *r.bootstrap;
        json reps = json::array();
        for (const auto& rep : b.replicates) {
            reps.push_back({{"replicate", rep.replicate},
                            {"gain", rep.gain ? json(*rep.gain) : json(nullptr)},
                            {"failure", rep.failure}});
        }
        j["bootstrap"] = {{"replicates", b.requested}, {"seed", b.seed},         {"ci_level", b.level},
                          {"ci_low", b.ci_low},        {"ci_high", b.ci_high},   {"standard_error", b.standard_error()},
                          {"results", reps}};
    } else {
        j["bootstrap"] = nullptr;
    }
    return j;
}

}  // namespace gainml

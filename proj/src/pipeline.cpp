#include "gainml/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <json.hpp>
#include <map>
#include <sstream>

#include "gainml/report.hpp"

namespace gainml {

using nlohmann::json;

int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument:
        case ErrorCode::ConfigError:
        case ErrorCode::InvalidScenario: return 2;
        case ErrorCode::FileNotFound:
        case ErrorCode::IoError: return 3;
        case ErrorCode::MalformedTimestamp:
        case ErrorCode::DuplicateTimestamp:
        case ErrorCode::CadenceMismatch:
        case ErrorCode::EmptyPeriod:
        case ErrorCode::ConstantColumn:
        case ErrorCode::TooFewRecords: return 4;
        case ErrorCode::DimensionMismatch:
        case ErrorCode::SaturatedSmoother:
        case ErrorCode::NoAdmissibleK:
        case ErrorCode::EmptyPredictionSet:
        case ErrorCode::DegenerateDenominator:
        case ErrorCode::BinWidthMismatch:
        case ErrorCode::NonpositiveAEP: return 5;
        case ErrorCode::BootstrapInsufficient: return 6;
        case ErrorCode::ManifestMissing: return 7;
    }
    return 1;
}

namespace {

template <typename Writer>
std::string render(Writer&& w) {
    std::ostringstream out;
    w(out);
    return out.str();
}

class SeriesCache {
public:
    explicit SeriesCache(const AnalysisConfig& config) : config_(config) {}

    const TurbineSeries& get(const std::string& id) {
        auto it = cache_.find(id);
        if (it != cache_.end()) return it->second;
        auto src = config_.turbines.find(id);
        if (src == config_.turbines.end()) {
            throw Error(ErrorCode::ConfigError, "turbine '" + id + "' is not configured");
        }
        return cache_.emplace(id, ingest_series(config_.resolve(src->second.path), src->second.columns, id))
            .first->second;
    }

private:
    const AnalysisConfig& config_;
    std::map<std::string, TurbineSeries> cache_;
};

AlignedDataset align_pair(SeriesCache& cache, const AnalysisConfig& config, const PairChoice& pair) {
    return align(cache.get(config.ref), cache.get(pair.ctrb), cache.get(pair.ctrn), parse_timestamp(config.boundary),
                 config.cadence_seconds);
}

std::string pair_label(const PairChoice& p) { return p.ctrb + "_" + p.ctrn; }

}  // namespace

Period1Outcome run_period1(const AnalysisConfig& config, const Period1Options& options) {
    const auto options_eval = config.evaluation_options();
    const std::uint64_t fold_seed = options.fold_seed.value_or(config.fold_seed);
    SeriesCache cache(config);

    std::vector<PairChoice> pairs = config.candidate_pairs;
    if (options.override_pair) {
        const auto& o = *options.override_pair;
        if (o.ctrb == o.ctrn || o.ctrb == config.ref || o.ctrn == config.ref) {
            throw Error(ErrorCode::ConfigError, "override pair reuses a turbine");
        }
        if (std::find(pairs.begin(), pairs.end(), o) == pairs.end()) pairs.push_back(o);
    }
    const PairChoice selection_pair = options.override_pair.value_or(config.candidate_pairs.front());

    std::map<std::string, AlignedDataset> datasets;
    for (const auto& p : pairs) datasets.emplace(pair_label(p), align_pair(cache, config, p));

    Period1Outcome outcome;
    const auto& selection_data = datasets.at(pair_label(selection_pair));
    outcome.selection =
        select_variables(selection_data, make_folds(selection_data.count(Period::P1), fold_seed), options_eval);
    const auto& variables = outcome.selection.final_set;

    std::vector<PairAssessment> assessments;
    for (const auto& p : pairs) {
        const auto& data = datasets.at(pair_label(p));
        assessments.push_back(
            assess_pair(data, p.ctrb, p.ctrn, variables, make_folds(data.count(Period::P1), fold_seed), options_eval));
    }
    outcome.ranking = rank_pairs(std::move(assessments));

    PairChoice chosen{outcome.ranking.front().ctrb_id, outcome.ranking.front().ctrn_id};
    if (options.override_pair) chosen = *options.override_pair;
    const auto& chosen_assessment = *std::find_if(outcome.ranking.begin(), outcome.ranking.end(), [&](const auto& a) {
        return a.ctrb_id == chosen.ctrb && a.ctrn_id == chosen.ctrn;
    });

    const auto out_dir = config.resolve(config.output_dir);
    std::filesystem::create_directories(out_dir);
    write_file_atomic(out_dir / "selection_trace.json", selection_to_json(outcome.selection).dump(2) + "\n");
    write_file_atomic(out_dir / "selection_trace.txt",
                      render([&](std::ostream& o) { write_selection_text(outcome.selection, o); }));
    write_file_atomic(out_dir / "pair_ranking.json", ranking_to_json(outcome.ranking).dump(2) + "\n");
    write_file_atomic(out_dir / "pair_ranking.txt",
                      render([&](std::ostream& o) { write_ranking_text(outcome.ranking, o); }));
    write_file_atomic(out_dir / "cv_metrics.json",
                      json{{"ref", cv_metrics_to_json(chosen_assessment.ref_metrics)},
                           {"ctrb", cv_metrics_to_json(chosen_assessment.ctrb_metrics)}}
                              .dump(2) +
                          "\n");
    write_file_atomic(out_dir / "bias_curves_ref.csv",
                      render([&](std::ostream& o) { write_cv_curves_csv(chosen_assessment.ref_metrics, o); }));
    write_file_atomic(out_dir / "bias_curves_ctrb.csv",
                      render([&](std::ostream& o) { write_cv_curves_csv(chosen_assessment.ctrb_metrics, o); }));
    write_file_atomic(out_dir / "diff_curves.csv", render([&](std::ostream& o) {
                          o << "bin_mid,value,count,fold\n";
                          for (std::size_t f = 0; f < chosen_assessment.fold_diffs.size(); ++f) {
                              write_curve_csv(chosen_assessment.fold_diffs[f], std::to_string(f + 1), o, false);
                          }
                          write_curve_csv(chosen_assessment.diff_curve, "cv", o, false);
                      }));
    write_file_atomic(out_dir / "aligned.csv",
                      render([&](std::ostream& o) { write_aligned_csv(datasets.at(pair_label(chosen)), o); }));

    outcome.manifest.ref = config.ref;
    outcome.manifest.ctrb = chosen.ctrb;
    outcome.manifest.ctrn = chosen.ctrn;
    outcome.manifest.variables = variables;
    outcome.manifest.fold_seed = fold_seed;
    outcome.manifest.selection_pair = selection_pair;
    outcome.manifest.selection_cv_rmse = outcome.selection.final_cv_rmse;
    outcome.manifest.pair_overridden = options.override_pair.has_value();
    outcome.manifest_path = out_dir / "manifest.json";
    write_file_atomic(outcome.manifest_path, dump_manifest(outcome.manifest));
    return outcome;
}

Period2Outcome run_period2(const AnalysisConfig& config, const Manifest& manifest,
                           std::optional<std::uint64_t> bootstrap_seed) {
    if (manifest.ref != config.ref) {
        throw Error(ErrorCode::ConfigError, "manifest REF '" + manifest.ref + "' differs from config REF");
    }
    if (!config.aep_kwh) throw Error(ErrorCode::ConfigError, "period2 needs aep_kwh in the config");
    SeriesCache cache(config);
    const auto data = align_pair(cache, config, {manifest.ctrb, manifest.ctrn});

    Period2Outcome outcome;
    PowerFrequency pi;
    if (config.power_frequency) {
        pi = read_power_frequency_csv(config.resolve(*config.power_frequency), config.bin_width);
    } else {
        pi = empirical_power_frequency(data, config.bin_width);
        outcome.empirical_frequency = true;
    }
    auto boot = config.bootstrap;
    if (bootstrap_seed) boot.seed = *bootstrap_seed;
    outcome.report = quantify_gain(data, manifest.variables, manifest.fold_seed, pi, *config.aep_kwh,
                                   config.evaluation_options(), boot);

    const auto out_dir = config.resolve(config.output_dir);
    std::filesystem::create_directories(out_dir);
    auto j = gain_report_to_json(outcome.report);
    j["ref"] = manifest.ref;
    j["ctrb"] = manifest.ctrb;
    j["ctrn"] = manifest.ctrn;
    j["variables"] = covariate_names(manifest.variables);
    j["power_frequency_source"] = outcome.empirical_frequency ? "empirical (short-term, not long-term)" : "input";
    write_file_atomic(out_dir / "gain_curves.csv",
                      render([&](std::ostream& o) { write_gain_curves_csv(outcome.report.gain_curves, o); }));
    write_file_atomic(out_dir / "period_bias_curves.csv", render([&](std::ostream& o) {
                          o << "bin_mid,value,count,fold\n";
                          write_curve_csv(outcome.report.curves.ref.p1, "ref_p1", o, false);
                          write_curve_csv(outcome.report.curves.ref.p2, "ref_p2", o, false);
                          write_curve_csv(outcome.report.curves.ctrb.p1, "ctrb_p1", o, false);
                          write_curve_csv(outcome.report.curves.ctrb.p2, "ctrb_p2", o, false);
                      }));
    write_file_atomic(out_dir / "bootstrap_replicates.csv",
                      render([&](std::ostream& o) { write_replicates_csv(*outcome.report.bootstrap, o); }));
    outcome.report_path = out_dir / "gain_report.json";
    write_file_atomic(outcome.report_path, j.dump(2) + "\n");
    return outcome;
}

SynthOutcome run_synth(const SynthConfig& config, std::optional<std::uint64_t> seed) {
    auto scenario = config.scenario;
    if (seed) scenario.seed = *seed;
    SynthOutcome outcome{generate(scenario, config.bin_width), {}};
    const auto& farm = outcome.farm;

    const auto& dir = config.output_dir;
    std::filesystem::create_directories(dir);
    for (const auto* s : {&farm.ref, &farm.ctrb, &farm.ctrn}) {
        write_file_atomic(dir / (s->turbine_id + ".csv"), render([&](std::ostream& o) { write_series_csv(*s, o); }));
    }
    write_file_atomic(dir / "power_frequency.csv",
                      render([&](std::ostream& o) { write_power_frequency_csv(farm.long_term_frequency, o); }));
    json truth{{"truth", farm.truth},
               {"aep_kwh", farm.aep_kwh},
               {"boundary", format_timestamp(farm.boundary)},
               {"scenario", json::parse(dump_scenario(scenario))}};
    write_file_atomic(dir / "truth.json", truth.dump(2) + "\n");

    AnalysisConfig analysis;
    for (const auto* s : {&farm.ref, &farm.ctrb, &farm.ctrn}) {
        analysis.turbines[s->turbine_id] = {s->turbine_id + ".csv", ColumnMapping{}};
    }
    analysis.ref = scenario.ref_id;
    analysis.candidate_pairs = {{scenario.ctrb_id, scenario.ctrn_id}};
    analysis.boundary = format_timestamp(farm.boundary);
    analysis.cadence_seconds = scenario.cadence_seconds;
    analysis.bin_width = config.bin_width;
    analysis.power_frequency = "power_frequency.csv";
    analysis.aep_kwh = farm.aep_kwh;
    analysis.output_dir = "analysis_output";
    outcome.analysis_config_path = dir / "analysis.json";
    write_file_atomic(outcome.analysis_config_path, dump_config(analysis));
    return outcome;
}

}  // namespace gainml

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "gainml/config.hpp"
#include "gainml/error.hpp"
#include "gainml/period1.hpp"
#include "gainml/period2.hpp"
#include "gainml/synthgen.hpp"

namespace gainml {

/// Process exit status for each error class:
///   2 configuration / usage, 3 missing or unreadable file, 4 input data,
///   5 model fitting or numerics, 6 bootstrap insufficient, 7 manifest missing.
int exit_code_for(ErrorCode code);

struct Period1Options {
    std::optional<PairChoice> override_pair;
    std::optional<std::uint64_t> fold_seed;
};

struct Period1Outcome {
    SelectionTrace selection;
    std::vector<PairAssessment> ranking;
    Manifest manifest;
    std::filesystem::path manifest_path;
};

/// Variable selection on the selection pair (the override pair if given,
/// otherwise the first candidate), then assessment and ranking of every
/// candidate pair. The manifest is written last.
Period1Outcome run_period1(const AnalysisConfig& config, const Period1Options& options = {});

struct Period2Outcome {
    GainReport report;
    bool empirical_frequency = false;
    std::filesystem::path report_path;
};

Period2Outcome run_period2(const AnalysisConfig& config, const Manifest& manifest,
                           std::optional<std::uint64_t> bootstrap_seed = std::nullopt);

struct SynthOutcome {
    SyntheticFarm farm;
    std::filesystem::path analysis_config_path;
};

/// Writes one CSV per turbine, the long-term power frequency, truth.json and
/// a ready-to-run analysis.json into the scenario's output directory.
SynthOutcome run_synth(const SynthConfig& config, std::optional<std::uint64_t> seed = std::nullopt);

}  // namespace gainml

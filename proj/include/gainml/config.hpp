#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gainml/dataset.hpp"
#include "gainml/evaluation.hpp"
#include "gainml/kernel.hpp"
#include "gainml/period2.hpp"
#include "gainml/synthgen.hpp"

namespace gainml {

struct TurbineSource {
    std::filesystem::path path;
    ColumnMapping columns;
};

struct PairChoice {
    std::string ctrb;
    std::string ctrn;

    bool operator==(const PairChoice&) const = default;
};

/// Everything period1/period2 need. Relative paths are resolved against
/// `base_dir` (the directory holding the config file).
struct AnalysisConfig {
    std::map<std::string, TurbineSource> turbines;
    std::string ref;
    std::vector<PairChoice> candidate_pairs;
    std::string boundary;
    std::int64_t cadence_seconds = kDefaultCadenceSeconds;
    double bin_width = kDefaultBinWidthKw;
    std::size_t min_bin_count = kDefaultMinBinCount;
    KGrid k_grid;
    std::uint64_t fold_seed = 1;
    BootstrapConfig bootstrap{kDefaultBootstrapReplicates, kDefaultCiLevel, 1};
    std::optional<std::filesystem::path> power_frequency;
    std::optional<double> aep_kwh;
    std::filesystem::path output_dir = "output";
    std::filesystem::path base_dir;

    std::filesystem::path resolve(const std::filesystem::path& p) const;
    EvaluationOptions evaluation_options() const;
};

AnalysisConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir = {});
AnalysisConfig load_config(const std::filesystem::path& path);
std::string dump_config(const AnalysisConfig& config);

/// The hand-off from period1 to period2.
struct Manifest {
    std::string ref;
    std::string ctrb;
    std::string ctrn;
    std::vector<Covariate> variables;
    std::uint64_t fold_seed = 0;
    PairChoice selection_pair;
    double selection_cv_rmse = 0.0;
    bool pair_overridden = false;
};

Manifest parse_manifest(std::string_view json_text);
Manifest load_manifest(const std::filesystem::path& path);
std::string dump_manifest(const Manifest& manifest);

/// Scenario file for `synth`: FarmScenario fields plus "output_dir".
struct SynthConfig {
    FarmScenario scenario;
    double bin_width = kDefaultBinWidthKw;
    std::filesystem::path output_dir = "synth";
};

SynthConfig parse_synth_config(std::string_view json_text, const std::filesystem::path& base_dir = {});
SynthConfig load_synth_config(const std::filesystem::path& path);
std::string dump_scenario(const FarmScenario& scenario);

/// Writes `contents` to a sibling temp file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace gainml

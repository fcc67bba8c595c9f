#include "gainml/config.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "gainml/error.hpp"

namespace gainml {

using nlohmann::json;

namespace {

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return fallback;
    return it->get<T>();
}

ColumnMapping mapping_from_json(const json& j) {
    ColumnMapping m;
    m.timestamp = get_or(j, "timestamp", m.timestamp);
    m.wind_speed = get_or(j, "wind_speed", m.wind_speed);
    m.power = get_or(j, "power", m.power);
    m.direction = get_or(j, "direction", m.direction);
    m.temperature = get_or(j, "temperature", m.temperature);
    m.pressure = get_or(j, "pressure", m.pressure);
    return m;
}

json mapping_to_json(const ColumnMapping& m) {
    return {{"timestamp", m.timestamp},     {"wind_speed", m.wind_speed},   {"power", m.power},
            {"direction", m.direction},     {"temperature", m.temperature}, {"pressure", m.pressure}};
}

json parse_json(std::string_view text, const char* what) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ConfigError, std::string(what) + " is not valid JSON: " + e.what());
    }
}

}  // namespace

std::filesystem::path AnalysisConfig::resolve(const std::filesystem::path& p) const {
    return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
}

EvaluationOptions AnalysisConfig::evaluation_options() const {
    return {bin_width, min_bin_count, k_grid};
}

AnalysisConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir) {
    const json j = parse_json(json_text, "analysis config");
    AnalysisConfig c;
    c.base_dir = base_dir;
    try {
        for (const auto& [id, t] : j.at("turbines").items()) {
            TurbineSource src;
            src.path = t.at("path").get<std::string>();
            if (t.contains("columns")) src.columns = mapping_from_json(t.at("columns"));
            c.turbines.emplace(id, std::move(src));
        }
        c.ref = j.at("ref").get<std::string>();
        for (const auto& p : j.at("candidate_pairs")) {
            c.candidate_pairs.push_back({p.at("ctrb").get<std::string>(), p.at("ctrn").get<std::string>()});
        }
        c.boundary = j.at("boundary").get<std::string>();
        c.cadence_seconds = get_or(j, "cadence_seconds", c.cadence_seconds);
        c.bin_width = get_or(j, "bin_width", c.bin_width);
        c.min_bin_count = get_or(j, "min_bin_count", c.min_bin_count);
        if (auto it = j.find("k_grid"); it != j.end()) {
            c.k_grid.min = get_or(*it, "min", c.k_grid.min);
            c.k_grid.max = get_or(*it, "max", c.k_grid.max);
        }
        c.fold_seed = get_or(j, "fold_seed", c.fold_seed);
        if (auto it = j.find("bootstrap"); it != j.end()) {
            c.bootstrap.replicates = get_or(*it, "replicates", c.bootstrap.replicates);
            c.bootstrap.ci_level = get_or(*it, "ci_level", c.bootstrap.ci_level);
            c.bootstrap.seed = get_or(*it, "seed", c.bootstrap.seed);
        }
        if (auto it = j.find("power_frequency"); it != j.end() && !it->is_null()) {
            c.power_frequency = it->get<std::string>();
        }
        if (auto it = j.find("aep_kwh"); it != j.end() && !it->is_null()) c.aep_kwh = it->get<double>();
        c.output_dir = get_or<std::string>(j, "output_dir", c.output_dir.string());
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ConfigError, std::string("analysis config: ") + e.what());
    }

    auto require_turbine = [&](const std::string& id) {
        if (!c.turbines.contains(id)) throw Error(ErrorCode::ConfigError, "turbine '" + id + "' is not configured");
    };
    require_turbine(c.ref);
    if (c.candidate_pairs.empty()) throw Error(ErrorCode::ConfigError, "no candidate (CTR-b, CTR-n) pairs");
    for (const auto& p : c.candidate_pairs) {
        require_turbine(p.ctrb);
        require_turbine(p.ctrn);
        if (p.ctrb == p.ctrn || p.ctrb == c.ref || p.ctrn == c.ref) {
            throw Error(ErrorCode::ConfigError, "pair (" + p.ctrb + ", " + p.ctrn + ") reuses a turbine");
        }
    }
    (void)parse_timestamp(c.boundary);
    if (c.cadence_seconds <= 0) throw Error(ErrorCode::ConfigError, "cadence_seconds must be positive");
    if (!(c.bin_width > 0.0)) throw Error(ErrorCode::ConfigError, "bin_width must be positive");
    if (c.k_grid.min < 1 || c.k_grid.max < c.k_grid.min) throw Error(ErrorCode::ConfigError, "invalid k_grid bounds");
    if (c.bootstrap.replicates < 2) throw Error(ErrorCode::ConfigError, "bootstrap.replicates must be at least 2");
    if (!(c.bootstrap.ci_level > 0.0 && c.bootstrap.ci_level < 1.0)) {
        throw Error(ErrorCode::ConfigError, "bootstrap.ci_level must lie in (0, 1)");
    }
    return c;
}

AnalysisConfig load_config(const std::filesystem::path& path) {
    return parse_config(read_file(path), path.parent_path());
}

std::string dump_config(const AnalysisConfig& c) {
    json j;
    json turbines = json::object();
    for (const auto& [id, t] : c.turbines) {
        turbines[id] = {{"path", t.path.string()}, {"columns", mapping_to_json(t.columns)}};
    }
    j["turbines"] = turbines;
    j["ref"] = c.ref;
    j["candidate_pairs"] = json::array();
    for (const auto& p : c.candidate_pairs) j["candidate_pairs"].push_back({{"ctrb", p.ctrb}, {"ctrn", p.ctrn}});
    j["boundary"] = c.boundary;
    j["cadence_seconds"] = c.cadence_seconds;
    j["bin_width"] = c.bin_width;
    j["min_bin_count"] = c.min_bin_count;
    j["k_grid"] = {{"min", c.k_grid.min}, {"max", c.k_grid.max}};
    j["fold_seed"] = c.fold_seed;
    j["bootstrap"] = {{"replicates", c.bootstrap.replicates},
                      {"ci_level", c.bootstrap.ci_level},
                      {"seed", c.bootstrap.seed}};
    j["power_frequency"] = c.power_frequency ? json(c.power_frequency->string()) : json(nullptr);
    j["aep_kwh"] = c.aep_kwh ? json(*c.aep_kwh) : json(nullptr);
    j["output_dir"] = c.output_dir.string();
    return j.dump(2) + "\n";
}

Manifest parse_manifest(std::string_view json_text) {
    const json j = parse_json(json_text, "manifest");
    Manifest m;
    try {
        m.ref = j.at("ref").get<std::string>();
        m.ctrb = j.at("ctrb").get<std::string>();
        m.ctrn = j.at("ctrn").get<std::string>();
        m.variables = covariates_from_names(j.at("variables").get<std::vector<std::string>>());
        m.fold_seed = j.at("fold_seed").get<std::uint64_t>();
        m.selection_pair = {j.at("selection_pair").at("ctrb").get<std::string>(),
                            j.at("selection_pair").at("ctrn").get<std::string>()};
        m.selection_cv_rmse = j.at("selection_cv_rmse").get<double>();
        m.pair_overridden = j.at("pair_overridden").get<bool>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ConfigError, std::string("manifest: ") + e.what());
    }
    if (m.variables.empty()) throw Error(ErrorCode::ConfigError, "manifest names no variables");
    return m;
}

Manifest load_manifest(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) {
        throw Error(ErrorCode::ManifestMissing, "manifest " + path.string() + " does not exist");
    }
    return parse_manifest(read_file(path));
}

std::string dump_manifest(const Manifest& m) {
    json j;
    j["ref"] = m.ref;
    j["ctrb"] = m.ctrb;
    j["ctrn"] = m.ctrn;
    j["variables"] = covariate_names(m.variables);
    j["fold_seed"] = m.fold_seed;
    j["selection_pair"] = {{"ctrb", m.selection_pair.ctrb}, {"ctrn", m.selection_pair.ctrn}};
    j["selection_cv_rmse"] = m.selection_cv_rmse;
    j["pair_overridden"] = m.pair_overridden;
    return j.dump(2) + "\n";
}

SynthConfig parse_synth_config(std::string_view json_text, const std::filesystem::path& base_dir) {
    const json j = parse_json(json_text, "scenario");
    SynthConfig c;
    auto& s = c.scenario;
    try {
        s.seed = get_or(j, "seed", s.seed);
        s.n_p1 = get_or(j, "n_p1", s.n_p1);
        s.n_p2 = get_or(j, "n_p2", s.n_p2);
        if (auto it = j.find("power_curve"); it != j.end()) {
            s.power_curve.rated_kw = get_or(*it, "rated_kw", s.power_curve.rated_kw);
            s.power_curve.cut_in = get_or(*it, "cut_in", s.power_curve.cut_in);
            s.power_curve.inflection = get_or(*it, "inflection", s.power_curve.inflection);
            s.power_curve.slope = get_or(*it, "slope", s.power_curve.slope);
        }
        s.noise_sd = get_or(j, "noise_sd", s.noise_sd);
        s.shared_drift = get_or(j, "shared_drift", s.shared_drift);
        s.upgrade_gamma = get_or(j, "upgrade_gamma", s.upgrade_gamma);
        s.weibull_shape = get_or(j, "weibull_shape", s.weibull_shape);
        s.weibull_scale = get_or(j, "weibull_scale", s.weibull_scale);
        s.wind_autocorrelation = get_or(j, "wind_autocorrelation", s.wind_autocorrelation);
        s.ref_spread = get_or(j, "ref_spread", s.ref_spread);
        s.ctrb_spread = get_or(j, "ctrb_spread", s.ctrb_spread);
        s.ctrn_spread = get_or(j, "ctrn_spread", s.ctrn_spread);
        s.anemometer_sd = get_or(j, "anemometer_sd", s.anemometer_sd);
        s.density_effect = get_or(j, "density_effect", s.density_effect);
        s.diurnal_effect = get_or(j, "diurnal_effect", s.diurnal_effect);
        s.missing_rate = get_or(j, "missing_rate", s.missing_rate);
        s.cadence_seconds = get_or(j, "cadence_seconds", s.cadence_seconds);
        s.start = get_or(j, "start", s.start);
        s.ref_id = get_or(j, "ref_id", s.ref_id);
        s.ctrb_id = get_or(j, "ctrb_id", s.ctrb_id);
        s.ctrn_id = get_or(j, "ctrn_id", s.ctrn_id);
        c.bin_width = get_or(j, "bin_width", c.bin_width);
        const std::filesystem::path out = get_or<std::string>(j, "output_dir", c.output_dir.string());
        c.output_dir = out.is_absolute() || base_dir.empty() ? out : base_dir / out;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ConfigError, std::string("scenario: ") + e.what());
    }
    validate(s);
    return c;
}

SynthConfig load_synth_config(const std::filesystem::path& path) {
    return parse_synth_config(read_file(path), path.parent_path());
}

std::string dump_scenario(const FarmScenario& s) {
    json j;
    j["seed"] = s.seed;
    j["n_p1"] = s.n_p1;
    j["n_p2"] = s.n_p2;
    j["power_curve"] = {{"rated_kw", s.power_curve.rated_kw},
                        {"cut_in", s.power_curve.cut_in},
                        {"inflection", s.power_curve.inflection},
                        {"slope", s.power_curve.slope}};
    j["noise_sd"] = s.noise_sd;
    j["shared_drift"] = s.shared_drift;
    j["upgrade_gamma"] = s.upgrade_gamma;
    j["weibull_shape"] = s.weibull_shape;
    j["weibull_scale"] = s.weibull_scale;
    j["wind_autocorrelation"] = s.wind_autocorrelation;
    j["ref_spread"] = s.ref_spread;
    j["ctrb_spread"] = s.ctrb_spread;
    j["ctrn_spread"] = s.ctrn_spread;
    j["anemometer_sd"] = s.anemometer_sd;
    j["density_effect"] = s.density_effect;
    j["diurnal_effect"] = s.diurnal_effect;
    j["missing_rate"] = s.missing_rate;
    j["cadence_seconds"] = s.cadence_seconds;
    j["start"] = s.start;
    j["ref_id"] = s.ref_id;
    j["ctrb_id"] = s.ctrb_id;
    j["ctrn_id"] = s.ctrn_id;
    return j.dump(2) + "\n";
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
        out << contents;
        if (!out) throw Error(ErrorCode::IoError, "write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::FileNotFound, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace gainml

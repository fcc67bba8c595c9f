#pragma once

#include <json.hpp>
#include <span>

#include "gainml/evaluation.hpp"
#include "gainml/period1.hpp"
#include "gainml/period2.hpp"

namespace gainml {

nlohmann::json curve_to_json(const BiasCurve& curve);
nlohmann::json cv_metrics_to_json(const CvMetrics& metrics);
nlohmann::json selection_to_json(const SelectionTrace& trace);
nlohmann::json ranking_to_json(std::span<const PairAssessment> ranked);
nlohmann::json gain_report_to_json(const GainReport& report);

}  // namespace gainml

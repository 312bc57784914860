#pragma once

#include <string>

#include <json.hpp>

#include "hazfit/bootstrap.hpp"
#include "hazfit/cox.hpp"
#include "hazfit/fit.hpp"
#include "hazfit/influence.hpp"
#include "hazfit/local.hpp"
#include "hazfit/simulate.hpp"

namespace hazfit {

using json = nlohmann::json;

json to_json(const Mat& m);
json to_json(const FitResult& fr);
json to_json(const ConfidenceRegion& cr);
json to_json(const CoxFitResult& fr);
json to_json(const BootstrapRun& run);
json to_json(const ScenarioResult& sr);
json to_json(const EfficiencyStudyResult& es);

void write_text_file(const std::string& path, const std::string& content);

std::string influence_csv(const SurvivalDataset& ds, const InfluenceReport& rep,
                          double flag_threshold);
std::string replicates_csv(const BootstrapRun& run);
std::string local_curve_csv(const LocalCurve& curve);

}  // namespace hazfit

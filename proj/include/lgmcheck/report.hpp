#pragma once

#include <string>

#include <json.hpp>

#include "lgmcheck/check.hpp"
#include "lgmcheck/matern.hpp"

namespace lgmcheck {

[[nodiscard]] nlohmann::json hyper_json(const HyperParams& hp);
[[nodiscard]] HyperParams hyper_from_json(const nlohmann::json& j);
[[nodiscard]] nlohmann::json check_json(const CheckReport& c);
[[nodiscard]] nlohmann::json sensitivity_json(const SensitivityReport& s);
// fit.json: hyperparameter mode (and grid), log marginal, posterior summaries.
[[nodiscard]] nlohmann::json fit_json(const GaussianLGM& m, const EbResult& eb, const HyperGrid& grid);

void write_json(const std::string& path, const nlohmann::json& j);
[[nodiscard]] nlohmann::json read_json(const std::string& path);
// index,d
void write_d_scores(const std::string& path, const Vec& d);
void write_ref_samples(const std::string& path, const Vec& s);
// d_obs,d_rep,weight
void write_matern_scatter(const std::string& path, const std::vector<ScatterRow>& rows);

}  // namespace lgmcheck

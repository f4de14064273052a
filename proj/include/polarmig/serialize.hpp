#pragma once

#include <json.hpp>

#include "polarmig/scene.hpp"

namespace polarmig {

nlohmann::json to_json(const Vec3d& v);
nlohmann::json to_json(const CMat2d& m);
nlohmann::json to_json(const CMat3d& m);
nlohmann::json to_json(const ArrayGeom& a);
nlohmann::json to_json(const SourceSpec& s);
nlohmann::json to_json(const FrequencyBand& b);
nlohmann::json to_json(const ImagingWindow& w);

Vec3d vec3_from_json(const nlohmann::json& j);
// Complex entries are [re, im] pairs or plain numbers; matrices are row-major lists of rows.
CMat2d cmat2_from_json(const nlohmann::json& j);
CMat3d cmat3_from_json(const nlohmann::json& j);
ArrayGeom array_from_json(const nlohmann::json& j);
SourceSpec source_from_json(const nlohmann::json& j);
FrequencyBand band_from_json(const nlohmann::json& j);
ImagingWindow window_from_json(const nlohmann::json& j);

}  // namespace polarmig

#pragma once

// JSON conversions for the shared domain types (trace payloads, scenario files).

#include <json.hpp>

#include "mumt/core.hpp"

namespace mumt {

using json = nlohmann::json;

void to_json(json& j, const Vec3& v);
void from_json(const json& j, Vec3& v);
void to_json(json& j, const FrameStamp& s);
void from_json(const json& j, FrameStamp& s);
void to_json(json& j, const AircraftState& s);
void from_json(const json& j, AircraftState& s);
void to_json(json& j, const ControlCommand& c);
void from_json(const json& j, ControlCommand& c);

/// Polygon as [[north, east], ...] plus floor/ceiling.
json fence_to_json(const GeofenceConstraint& g);
GeofenceConstraint fence_from_json(const json& j);

void to_json(json& j, const EnvelopeLimits& e);
void from_json(const json& j, EnvelopeLimits& e);  // absent keys keep defaults

/// Recursive object merge; `over` wins, arrays are replaced wholesale.
json deep_merge(json base, const json& over);

}  // namespace mumt

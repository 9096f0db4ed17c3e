#pragma once

#include "kamred/counterexample.hpp"
#include "kamred/kam.hpp"
#include "kamred/rotation.hpp"
#include "kamred/weights.hpp"

#include <json.hpp>

namespace kamred {

using ojson = nlohmann::ordered_json;

ojson to_json(const Mat2& m);               // row-major array
ojson to_json(const BoundCheck& c);
ojson to_json(const StepDiagnostics& d);
ojson to_json(const KamSchedule& s);
ojson to_json(const ResidualReport& r);
ojson to_json(const ReducibilityReport& r);
ojson to_json(const RotationEstimate& e);
ojson to_json(const IntegralEvidence& e);
ojson to_json(const ConditionReport& r);
ojson to_json(const SubadditivityReport& r);
ojson to_json(const ResonanceChain& c);
ojson to_json(const NonsolvabilityEvidence& e);
ojson to_json(const RotationConditionResult& r);

} // namespace kamred

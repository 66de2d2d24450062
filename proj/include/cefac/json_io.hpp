#pragma once

#include <json.hpp>

#include "cefac/credibility.hpp"
#include "cefac/evidence.hpp"
#include "cefac/protocol.hpp"

namespace cefac {

/// {"frame": ["A1","A2"], "masses": {"A1": 0.6, "A1|A2": 0.1, ...}}
/// Subset keys are member labels joined by '|' in frame order; the empty set
/// is omitted when its mass is zero.
nlohmann::json mass_to_json(const MassFunction& m);
MassFunction mass_from_json(const nlohmann::json& j);

/// Column-major WAVCCME serialization with the frame alongside.
nlohmann::json wavccme_to_json(const WavccmeMatrix& w);

nlohmann::json fusion_result_to_json(const FusionResult& r);

/// Versioned message wire format:
/// {"v": 1, "round": t, "from": j, "to": i, "kind": "substate|weight|storage|
///  correction", "payload": ...}; ciphertexts as decimal strings.
nlohmann::json message_to_json(const protocol::Message& m);
protocol::Message message_from_json(const nlohmann::json& j);

}  // namespace cefac
